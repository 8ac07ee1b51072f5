"""Run parameters and budget accounting shared across the pipeline."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

MODULE_SYNTAX_REFINER = "syntax_refiner"
MODULE_AUTO_SOLVER = "auto_solver"
MODULE_LLM_REINVOKER = "llm_reinvoker"


@dataclass
class RepairConfig:
    max_depth_r: int = 2
    k_per_goal: int = 32
    compile_timeout: float = 300.0
    candidate_timeout: float = 60.0  # per-tactic trial compiles
    enable_syntax_refiner: bool = True
    enable_auto_solver: bool = True
    enable_llm_reinvoker: bool = True
    rules_path: str | None = None
    suite_path: str | None = None
    splice_mode: str = "inline"  # or "standalone"
    sample_cap: int = 1100  # per-theorem generation budget
    item_time_limit: float = 7200.0
    temperature: float = 1.0
    max_tokens: int = 16384
    combo_cap: int = 12

    def __post_init__(self):
        if self.max_depth_r < 0:
            raise ValueError("max_depth_r must be >= 0")
        if self.k_per_goal < 1:
            raise ValueError("k_per_goal must be >= 1")
        if self.splice_mode not in ("inline", "standalone"):
            raise ValueError(f"unknown splice mode {self.splice_mode!r}")


class BudgetLedger:
    """Monotone counters for samples, tokens, module triggers and REPL
    calls.  Increments are lock-protected so concurrent generate calls never
    lose counts."""

    def __init__(self):
        self._lock = threading.Lock()
        self.samples_used = 0
        self.tokens_generated = 0
        self.repl_calls = 0
        self.wall_time = 0.0
        self.module_triggers = {
            MODULE_SYNTAX_REFINER: 0,
            MODULE_AUTO_SOLVER: 0,
            MODULE_LLM_REINVOKER: 0,
        }

    def add_samples(self, n: int):
        with self._lock:
            self.samples_used += n

    def add_tokens(self, n: int):
        with self._lock:
            self.tokens_generated += n

    def add_repl_calls(self, n: int = 1):
        with self._lock:
            self.repl_calls += n

    def add_wall_time(self, seconds: float):
        with self._lock:
            self.wall_time += seconds

    def trigger(self, module: str, n: int = 1):
        with self._lock:
            self.module_triggers[module] += n

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "samples_used": self.samples_used,
                "tokens_generated": self.tokens_generated,
                "repl_calls": self.repl_calls,
                "wall_time": self.wall_time,
                "module_triggers": dict(self.module_triggers),
            }

    def merge(self, other: "BudgetLedger"):
        snap = other.snapshot()
        with self._lock:
            self.samples_used += snap["samples_used"]
            self.tokens_generated += snap["tokens_generated"]
            self.repl_calls += snap["repl_calls"]
            self.wall_time += snap["wall_time"]
            for key, val in snap["module_triggers"].items():
                self.module_triggers[key] += val
