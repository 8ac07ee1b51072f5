"""Test doubles: a simulated Lean REPL subprocess for deterministic runs."""
