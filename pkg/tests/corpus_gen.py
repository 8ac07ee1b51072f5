"""One-shot generator for the round-trip corpus under tests/corpus/.

Run from the repository root: python3 tests/corpus_gen.py
The files are committed; rerun only to regenerate them from scratch.
"""

from pathlib import Path

OUT = Path(__file__).parent / "corpus"

scripts = {}

scripts["001_rfl_inline.lean"] = "theorem one_eq_one : 1 = 1 := by rfl\n"

scripts["002_norm_num.lean"] = """\
import Mathlib

theorem two_plus_two : 2 + 2 = 4 := by
  norm_num
"""

scripts["003_single_have.lean"] = """\
import Mathlib

theorem sq_pos (x : ℝ) (hx : x ≠ 0) : x ^ 2 > 0 := by
  have h : x ^ 2 ≥ 0 := sq_nonneg x
  positivity
"""

scripts["004_nested_have.lean"] = """\
import Mathlib
open Real

theorem mathd_algebra_478 (b h v : ℝ) (h₀ : 0 < b ∧ 0 < h ∧ 0 < v) (h₁ : v = 1 / 3 * (b * h)) (h₂ : b = 30) (h₃ : h = 13 / 2) : v = 65 := by
  have hb : b = 30 := h₂
  have hh : h = 13 / 2 := by
    exact h₃
  subst hb
  subst hh
  norm_num at h₁
  linarith
"""

scripts["005_deep_nesting.lean"] = """\
import Mathlib

theorem nested_proof (a b c : ℕ) (hab : a ≤ b) (hbc : b ≤ c) : a ≤ c := by
  have step1 : a ≤ b := by
    have inner : a ≤ b := by
      exact hab
    exact inner
  exact le_trans step1 hbc
"""

scripts["006_comment_lines.lean"] = """\
import Mathlib

-- This proof uses the standard approach.
theorem amc12_2000_p5 (x p : ℝ) (h₀ : x < 2) (h₁ : abs (x - 2) = p) : x - p = 2 - 2 * p := by
  -- the absolute value unfolds because x < 2
  have h₂ : abs (x - 2) = -(x - 2) := by
    apply abs_of_neg
    linarith
  rw [h₂] at h₁
  -- now it is linear arithmetic
  linarith
"""

scripts["007_block_comment.lean"] = """\
import Mathlib

/- A block comment
   spanning lines with a sorry keyword inside
   that must not be counted. -/
theorem simple_add (n : ℕ) : n + 0 = n := by
  simp
"""

scripts["008_calc_chain.lean"] = """\
import Mathlib

theorem calc_example (a b : ℝ) (h1 : a = 2) (h2 : b = 3) : a + b = 5 := by
  calc a + b = 2 + b := by rw [h1]
    _ = 2 + 3 := by rw [h2]
    _ = 5 := by norm_num
"""

scripts["009_cases_bullets.lean"] = """\
import Mathlib

theorem or_comm_example (p q : Prop) (h : p ∨ q) : q ∨ p := by
  rcases h with hp | hq
  · exact Or.inr hp
  · exact Or.inl hq
"""

scripts["010_induction_case.lean"] = """\
import Mathlib

theorem sum_zero (n : ℕ) : n * 0 = 0 := by
  induction n with
  | zero => rfl
  | succ k ih =>
    rw [Nat.succ_mul]
    rw [ih]
"""

scripts["011_string_literal.lean"] = """\
import Mathlib

theorem with_string (n : ℕ) : n = n := by
  have note : "sorry inside a string" = "sorry inside a string" := rfl
  rfl
"""

scripts["012_empty_lines.lean"] = """\
import Mathlib

theorem spaced_out (x : ℤ) (h : x = 4) : x + 1 = 5 := by
  have h1 : x + 1 = 4 + 1 := by rw [h]

  rw [h1]
"""

scripts["013_real_sqrt.lean"] = """\
import Mathlib
open Real

theorem sqrt_four : Real.sqrt 4 = 2 := by
  rw [show (4 : ℝ) = 2 ^ 2 by norm_num]
  exact Real.sqrt_sq (by norm_num)
"""

scripts["014_unsolved_sorry.lean"] = """\
import Mathlib

theorem incomplete (a b : ℝ) (h : a < b) : a ^ 3 < b ^ 3 := by
  have cube_mono : StrictMono fun x : ℝ => x ^ 3 := by
    sorry
  exact cube_mono h
"""

scripts["015_omega.lean"] = """\
import Mathlib

theorem int_arith (n : ℤ) (h : 2 * n = 10) : n = 5 := by
  omega
"""

scripts["016_decide.lean"] = """\
import Mathlib

theorem mathd_numbertheory_466 : (∑ k in Finset.range 11, k) % 9 = 1 := by
  decide
"""

scripts["017_intro_apply.lean"] = """\
import Mathlib

theorem imp_trans (p q r : Prop) : (p → q) → (q → r) → p → r := by
  intro hpq hqr hp
  apply hqr
  apply hpq
  exact hp
"""

scripts["018_obtain.lean"] = """\
import Mathlib

theorem exists_half (x : ℝ) (h : ∃ y, y + y = x) : x / 2 + x / 2 = x := by
  obtain ⟨y, hy⟩ := h
  ring_nf
"""

scripts["019_unicode_idents.lean"] = """\
import Mathlib

theorem subscript_names (α : Type*) (s₁ s₂ : Set α) (h₀ : s₁ ⊆ s₂) (x : α) (hx : x ∈ s₁) : x ∈ s₂ := by
  exact h₀ hx
"""

scripts["020_long_statement.lean"] = """\
import Mathlib
set_option maxHeartbeats 400000
open BigOperators Real Nat Topology Rat

theorem mathd_algebra_332 (x y : ℝ) (h₀ : (x + y) / 2 = 7) (h₁ : Real.sqrt (x * y) = Real.sqrt 19) : x ^ 2 + y ^ 2 = 158 := by
  have h2 : x + y = 14 := by linarith
  have h6 : x * y = 19 := by
    nlinarith [Real.sq_sqrt (mul_nonneg (by nlinarith : (0:ℝ) ≤ x * y) le_rfl), h₁]
  nlinarith [h2, h6]
"""

scripts["021_field_simp.lean"] = """\
import Mathlib

theorem mathd_algebra_313 (v i z : ℂ) (h₀ : v = i * z) (h₁ : v = 1 + Complex.I) (h₂ : z = 2 - Complex.I) : i = 1 / 5 + 3 / 5 * Complex.I := by
  rw [h₁, h₂] at h₀
  rw [h₀]
  field_simp
  ring_nf
  simp [Complex.ext_iff]
  norm_num
"""

scripts["022_nlinarith_hints.lean"] = """\
import Mathlib

theorem amgm_two (a b : ℝ) (ha : 0 ≤ a) (hb : 0 ≤ b) : a * b ≤ (a ^ 2 + b ^ 2) / 2 := by
  nlinarith [sq_nonneg (a - b), sq_nonneg (a + b)]
"""

scripts["023_multi_goal_constructor.lean"] = """\
import Mathlib

theorem and_intro_example (x : ℕ) (h : x = 3) : x ≥ 1 ∧ x ≤ 5 := by
  constructor
  · omega
  · omega
"""

scripts["024_simp_at.lean"] = """\
import Mathlib

theorem simp_at_example (n : ℕ) (h : n + 0 = 5) : n = 5 := by
  simp at h
  exact h
"""

scripts["025_have_term_mode.lean"] = """\
import Mathlib

theorem term_have (a : ℝ) (h : 0 < a) : a ≠ 0 := by
  have h' : 0 ≠ a := ne_of_lt h
  exact h'.symm
"""

scripts["026_interval_cases.lean"] = """\
import Mathlib

theorem small_cases (n : ℕ) (h1 : 2 ≤ n) (h2 : n < 4) : n = 2 ∨ n = 3 := by
  interval_cases n
  · exact Or.inl rfl
  · exact Or.inr rfl
"""

scripts["027_gcd_example.lean"] = """\
import Mathlib

theorem mathd_numbertheory_188 : Nat.gcd 180 168 = 12 := by
  decide
"""

scripts["028_mod_cast.lean"] = """\
import Mathlib

theorem cast_example (n : ℕ) (h : (n : ℝ) = 4) : n = 4 := by
  exact_mod_cast h
"""

scripts["029_use_tactic.lean"] = """\
import Mathlib

theorem exists_witness : ∃ n : ℕ, n * n = 16 := by
  use 4
"""

scripts["030_by_contra.lean"] = """\
import Mathlib

theorem contra_example (x : ℝ) (h : x ^ 2 = 0) : x = 0 := by
  by_contra hne
  have hsq : x ^ 2 > 0 := by positivity
  linarith
"""

scripts["031_admit_placeholder.lean"] = """\
import Mathlib

theorem uses_admit (a b : ℕ) : a + b = b + a := by
  admit
"""

scripts["032_trailing_comment.lean"] = """\
import Mathlib

theorem trailing (x : ℝ) : x = x := by
  rfl
-- the proof above is definitional
"""

scripts["033_tab_free_indent.lean"] = """\
import Mathlib

theorem three_levels (p q : Prop) (hp : p) (hq : q) : p ∧ (q ∧ p) := by
  constructor
  · exact hp
  · constructor
    · exact hq
    · exact hp
"""

scripts["034_show_tactic.lean"] = """\
import Mathlib

theorem show_example (a : ℕ) : a + 1 = Nat.succ a := by
  show a + 1 = Nat.succ a
  rfl
"""

scripts["035_norm_num_mul.lean"] = """\
import Mathlib

theorem mathd_algebra_462 : (1 / 2 + 1 / 3 : ℚ) * (1 / 2 - 1 / 3) = 5 / 36 := by
  norm_num
"""

scripts["036_inline_then_more.lean"] = """\
import Mathlib

theorem inline_first (a : ℕ) (h : a = 2) : a + a = 4 := by subst h
  rfl
"""

scripts["037_long_nlinarith.lean"] = """\
import Mathlib

theorem big_hint_list (x y : ℝ) (h₀ : 0 < x) (h₁ : 0 < y) (h₂ : x + y = 10) : x * y ≤ 25 := by
  nlinarith [sq_nonneg (x - y), sq_nonneg (x + y), mul_pos h₀ h₁,
    sq_nonneg (x - 5), sq_nonneg (y - 5)]
"""

scripts["038_refine.lean"] = """\
import Mathlib

theorem refine_example (a b : ℕ) (h : a = b) : a + 1 = b + 1 := by
  refine congrArg (· + 1) ?_
  exact h
"""

scripts["039_double_have_same_line_kind.lean"] = """\
import Mathlib

theorem stacked_haves (x : ℝ) (h : x = 1) : x + x + x = 3 := by
  have h1 : x + x = 2 := by
    rw [h]
    norm_num
  have h2 : x + x + x = 2 + x := by
    rw [h1]
  rw [h2, h]
  norm_num
"""

scripts["040_all_goals.lean"] = """\
import Mathlib

theorem all_goals_example (a : ℕ) : a ≤ a + 1 ∧ a ≤ a + 2 := by
  constructor
  all_goals omega
"""

scripts["041_specialize.lean"] = """\
import Mathlib

theorem specialize_example (f : ℕ → ℕ) (h : ∀ n, f n = n + 1) : f 3 = 4 := by
  specialize h 3
  exact h
"""

scripts["042_push_neg.lean"] = """\
import Mathlib

theorem push_neg_example (s : Set ℝ) (h : ¬∃ x ∈ s, x < 0) : ∀ x ∈ s, 0 ≤ x := by
  push_neg at h
  exact h
"""

scripts["043_have_with_binder_types.lean"] = """\
import Mathlib

theorem binder_types (f : ℝ → ℝ) (hf : ∀ x : ℝ, f x = 2 * x) : f 3 = 6 := by
  have key : f 3 = 2 * 3 := hf 3
  rw [key]
  norm_num
"""

scripts["044_conv_rw.lean"] = """\
import Mathlib

theorem conv_example (a b : ℕ) (h : a = b) : a + b = b + b := by
  conv_lhs => rw [h]
"""

scripts["045_French_quotes.lean"] = """\
import Mathlib

theorem anonymous_ctor (a b : ℕ) (ha : a = 1) (hb : b = 2) : a = 1 ∧ b = 2 := by
  exact ⟨ha, hb⟩
"""

scripts["046_exact_question.lean"] = """\
import Mathlib

theorem mathd_algebra_455 (x : ℝ) (h₀ : 2 * (2 * (2 * (2 * x))) = 48) : x = 3 := by
  linarith
"""

scripts["047_repeat_tactic.lean"] = """\
import Mathlib

theorem repeat_example (a b c : ℕ) : a + b + c = c + b + a := by
  omega
"""

scripts["048_mixed_indent_width.lean"] = """\
import Mathlib

theorem mixed_width (x : ℝ) (h : x = 2) : x ^ 2 = 4 := by
    have expand : x ^ 2 = x * x := by
            ring
    rw [expand, h]
    norm_num
"""

scripts["049_lemma_keyword.lean"] = """\
import Mathlib

lemma helper_bound (n : ℕ) : n ≤ 2 * n := by
  omega
"""

scripts["050_multiline_statement.lean"] = """\
import Mathlib

theorem split_statement (a b : ℝ)
    (h₀ : a + b = 6)
    (h₁ : a - b = 2) :
    a = 4 := by
  linarith
"""

scripts["051_final_blank_lines.lean"] = """\
import Mathlib

theorem trailing_blanks (n : ℕ) : n = n := by
  rfl


"""

scripts["052_nested_block_comment.lean"] = """\
import Mathlib

/- outer /- inner nested -/ comment -/
theorem nested_comment_ok (x : ℕ) : x + 0 = x := by
  simp
"""

if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    for name, text in scripts.items():
        (OUT / name).write_text(text, encoding="utf-8")
    print(f"wrote {len(scripts)} corpus scripts to {OUT}")
