import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from consis.errors import UndefinedMetricError
from consis.metrics import (
    BoundsDiagnosticWarning,
    BoundsPair,
    ProbPairVector,
    accuracy,
    avg_cs,
    compute_cs,
    compute_heuristic_bounds,
    compute_math_bounds,
    compute_rcs,
    consistent_rate,
    difficulty_gap_stats,
    kendall_tau,
    leakage_adjusted_cs,
)

EXACT = 1e-12

EXAMPLE = [(0.9, 0.5), (0.6, 0.2)]

prob = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
prob_pairs = st.lists(st.tuples(prob, prob), min_size=1, max_size=60)


def nonzero_hard(entries):
    return sum(b for _, b in entries) > 0


class TestComputeCS:
    def test_worked_example(self):
        # 0.57 / 0.70, evaluated independently with exact rationals
        assert compute_cs(EXAMPLE) == pytest.approx(0.8142857142857143, abs=EXACT)

    def test_perfect_easy_accuracy(self):
        assert compute_cs([(1.0, 0.4), (1.0, 0.9)]) == pytest.approx(1.0, abs=EXACT)

    def test_single_pair_collapses_to_easy_probability(self):
        assert compute_cs([(0.37, 0.8)]) == pytest.approx(0.37, abs=EXACT)

    def test_zero_hard_mass_is_undefined(self):
        with pytest.raises(UndefinedMetricError):
            compute_cs([(0.9, 0.0), (0.5, 0.0)])

    def test_empty_vector_rejected(self):
        with pytest.raises(UndefinedMetricError):
            ProbPairVector([])

    def test_out_of_range_probability_rejected(self):
        with pytest.raises(UndefinedMetricError):
            ProbPairVector([(1.2, 0.5)])

    @given(prob_pairs)
    @settings(max_examples=100)
    def test_permutation_invariant(self, entries):
        if not nonzero_hard(entries):
            return
        shuffled = list(entries)
        np.random.default_rng(0).shuffle(shuffled)
        assert compute_cs(entries) == pytest.approx(compute_cs(shuffled), abs=EXACT)


class TestHeuristicBounds:
    def test_worked_example(self):
        bounds = compute_heuristic_bounds(EXAMPLE)
        assert bounds.family == "heuristic"
        assert bounds.low == pytest.approx(0.75, abs=EXACT)
        assert bounds.upp == pytest.approx(0.8142857142857143, abs=EXACT)
        mu, _ = difficulty_gap_stats(EXAMPLE)
        assert mu == pytest.approx(0.4, abs=EXACT)

    def test_zero_gap_upper_bound(self):
        entries = [(0.5, 0.5), (0.2, 0.2)]
        bounds = compute_heuristic_bounds(entries)
        expected = (0.5**2 + 0.2**2) / 0.7
        assert bounds.upp == pytest.approx(expected, abs=EXACT)

    def test_single_pair_collapse(self):
        bounds = compute_heuristic_bounds([(0.37, 0.8)])
        assert bounds.low == pytest.approx(0.37, abs=EXACT)
        assert bounds.upp == pytest.approx(0.37, abs=EXACT)

    def test_terms_outside_unit_interval_warn(self):
        with pytest.warns(BoundsDiagnosticWarning):
            compute_heuristic_bounds([(1.0, 0.05), (1.0, 0.2)])

    @given(prob_pairs)
    @settings(max_examples=100)
    def test_lower_bound_is_easy_accuracy(self, entries):
        if not nonzero_hard(entries):
            return
        bounds = compute_heuristic_bounds(entries)
        assert abs(bounds.low - accuracy(entries, "easy")) <= EXACT

    def test_uniform_gap_attains_upper_bound(self):
        entries = [(0.55, 0.25), (0.8, 0.5), (0.4, 0.1)]  # p_easy = p_hard + 0.3
        cs = compute_cs(entries)
        bounds = compute_heuristic_bounds(entries)
        assert cs == pytest.approx(bounds.upp, abs=EXACT)
        assert compute_rcs(cs, bounds) == pytest.approx(1.0, abs=1e-9)


class TestMathBounds:
    def test_worked_example(self):
        bounds = compute_math_bounds(EXAMPLE)
        assert bounds.family == "mathematical"
        assert bounds.low == pytest.approx(0.6857142857142857, abs=EXACT)
        assert bounds.upp == pytest.approx(0.8142857142857143, abs=EXACT)

    def test_single_pair_collapse(self):
        bounds = compute_math_bounds([(0.37, 0.8)])
        assert bounds.low == bounds.upp == pytest.approx(0.37, abs=EXACT)

    @given(prob_pairs)
    @settings(max_examples=200)
    def test_sandwich(self, entries):
        if not nonzero_hard(entries):
            return
        cs = compute_cs(entries)
        bounds = compute_math_bounds(entries)
        assert bounds.low <= cs + EXACT
        assert cs <= bounds.upp + EXACT

    def test_sandwich_seeded_sweep(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            n = int(rng.integers(1, 80))
            entries = list(zip(rng.uniform(0, 1, n), rng.uniform(0.01, 1, n)))
            cs = compute_cs(entries)
            bounds = compute_math_bounds(entries)
            assert bounds.low <= cs <= bounds.upp


class TestRCS:
    def test_published_code_rows(self):
        # anchored to published results for two models on the code domain
        rcs = compute_rcs(0.881, BoundsPair(0.855, 0.930, "heuristic"))
        assert rcs == pytest.approx(0.348, abs=0.005)
        rcs = compute_rcs(0.747, BoundsPair(0.345, 0.838, "heuristic"))
        assert rcs == pytest.approx(0.815, abs=0.005)

    def test_cs_at_upper_bound(self):
        assert compute_rcs(0.9, BoundsPair(0.5, 0.9, "heuristic")) == pytest.approx(1.0)

    def test_degenerate_interval(self):
        with pytest.raises(UndefinedMetricError):
            compute_rcs(0.9, BoundsPair(0.9, 0.9, "heuristic"))

    def test_unclamped_by_default_clamped_on_request(self):
        bounds = BoundsPair(0.2, 0.4, "heuristic")
        assert compute_rcs(0.5, bounds) == pytest.approx(1.5)
        assert compute_rcs(0.5, bounds, clamp=True) == 1.0
        assert compute_rcs(0.1, bounds, clamp=True) == 0.0


class TestAccuracyAndAverages:
    def test_easy_accuracy(self):
        assert accuracy(EXAMPLE, "easy") == pytest.approx(0.75, abs=EXACT)

    def test_hard_accuracy(self):
        assert accuracy(EXAMPLE, "hard") == pytest.approx(0.35, abs=EXACT)

    def test_all_zero(self):
        assert accuracy([(0.0, 0.0), (0.0, 0.0)], "easy") == 0.0

    def test_avg_cs_published_rows(self):
        assert avg_cs([0.881, 0.918, 0.968]) == pytest.approx(0.922, abs=5e-4)
        assert avg_cs([0.747, 0.810, 0.837]) == pytest.approx(0.798, abs=5e-4)

    def test_avg_identical(self):
        assert avg_cs([0.5, 0.5, 0.5]) == 0.5

    def test_avg_empty(self):
        with pytest.raises(UndefinedMetricError):
            avg_cs([])


class TestConsistentRate:
    def test_all_consistent(self):
        assert consistent_rate([(0.9, 0.1), (0.5, 0.2)]) == 1.0

    def test_half(self):
        assert consistent_rate([(0.3, 0.5), (0.9, 0.2)]) == 0.5

    def test_ties_count_consistent(self):
        assert consistent_rate([(0.4, 0.4), (0.7, 0.7)]) == 1.0


class TestLeakage:
    def test_easy_leak_worked_example(self):
        leaked = leakage_adjusted_cs(EXAMPLE, 0, "easy", 0.1)
        assert leaked == pytest.approx(0.8857142857142857, abs=EXACT)
        # exact agreement with a direct recompute on the perturbed vector
        assert leaked == compute_cs([(1.0, 0.5), (0.6, 0.2)])

    def test_zero_delta_is_identity(self):
        assert leakage_adjusted_cs(EXAMPLE, 1, "hard", 0.0) == compute_cs(EXAMPLE)

    def test_hard_leak_above_cs_increases(self):
        base = compute_cs(EXAMPLE)
        leaked = leakage_adjusted_cs(EXAMPLE, 0, "hard", 0.3)
        assert leaked == pytest.approx(0.84, abs=EXACT)
        assert leaked > base  # p_easy[0] = 0.9 exceeds the base score

    def test_closed_forms_match(self):
        entries = [(0.8, 0.3), (0.4, 0.6), (0.55, 0.15)]
        total = sum(b for _, b in entries)
        base = compute_cs(entries)
        easy = leakage_adjusted_cs(entries, 2, "easy", 0.2)
        assert easy == pytest.approx(base + 0.2 * 0.15 / total, abs=EXACT)
        hard = leakage_adjusted_cs(entries, 1, "hard", 0.25)
        num = sum(a * b for a, b in entries) + 0.4 * 0.25
        assert hard == pytest.approx(num / (total + 0.25), abs=EXACT)

    def test_negative_delta_reverses_direction(self):
        base = compute_cs(EXAMPLE)
        assert leakage_adjusted_cs(EXAMPLE, 0, "easy", -0.1) < base

    def test_index_out_of_range(self):
        with pytest.raises(UndefinedMetricError):
            leakage_adjusted_cs(EXAMPLE, 5, "easy", 0.1)

    def test_probability_overflow_rejected(self):
        with pytest.raises(UndefinedMetricError):
            leakage_adjusted_cs(EXAMPLE, 0, "easy", 0.2)  # 0.9 + 0.2 > 1

    def test_direction_signs(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            n = int(rng.integers(2, 40))
            entries = list(zip(rng.uniform(0, 0.85, n), rng.uniform(0.05, 0.85, n)))
            base = compute_cs(entries)
            idx = int(rng.integers(0, n))
            easy = leakage_adjusted_cs(entries, idx, "easy", 0.1)
            assert easy > base  # p_hard[idx] > 0 so the gain is strict
            hard = leakage_adjusted_cs(entries, idx, "hard", 0.1)
            expected_sign = math.copysign(1.0, entries[idx][0] - base)
            if hard != base:
                assert math.copysign(1.0, hard - base) == expected_sign


class TestKendallTau:
    def test_identical_orderings(self):
        assert kendall_tau([1, 2, 3, 4], [10, 20, 30, 40]) == pytest.approx(1.0)

    def test_reversed_orderings(self):
        assert kendall_tau([1, 2, 3, 4], [4, 3, 2, 1]) == pytest.approx(-1.0)

    def test_one_swap(self):
        # brute-force count over all 6 pairs: 5 concordant, 1 discordant
        assert kendall_tau([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.6667, abs=1e-4)

    def test_tie_correction(self):
        # brute-force tie-corrected value computed by pair enumeration: 0.8
        assert kendall_tau([1, 1, 2, 3], [1, 2, 2, 3]) == pytest.approx(0.8, abs=1e-12)

    def test_constant_input_undefined(self):
        with pytest.raises(UndefinedMetricError):
            kendall_tau([1, 1, 1], [1, 2, 3])

    def test_length_mismatch(self):
        with pytest.raises(UndefinedMetricError):
            kendall_tau([1, 2], [1, 2, 3])

    def test_too_short(self):
        with pytest.raises(UndefinedMetricError):
            kendall_tau([1], [2])


@given(prob_pairs)
@settings(max_examples=100)
def test_reordering_leaves_all_metrics_unchanged(entries):
    if not nonzero_hard(entries):
        return
    shuffled = list(entries)
    np.random.default_rng(3).shuffle(shuffled)
    for fn in (
        lambda e: compute_cs(e),
        lambda e: compute_heuristic_bounds(e).upp,
        lambda e: compute_math_bounds(e).low,
        lambda e: compute_math_bounds(e).upp,
        lambda e: accuracy(e, "easy"),
        lambda e: consistent_rate(e),
    ):
        assert fn(entries) == pytest.approx(fn(shuffled), abs=EXACT)
