"""Closed-form consistency metrics over per-pair probability vectors.

All operations are pure functions of their inputs and work on fractions in
[0, 1]; report rendering converts to percentages. Conventions that matter:

* The consistency score is the hard-success-weighted mean of the easy
  probabilities, i.e. the conditional probability of solving the easy
  question given the paired hard one was solved.
* Two bound families exist. The heuristic family is the default used for
  relative scoring; the mathematical family comes from sorting both
  probability sequences and pairing them in matching / opposing order, and
  always brackets the score.
* Upper-bound terms (p_hard + mean gap) are deliberately not clamped to
  [0, 1]; a diagnostic warning is emitted when any term leaves that range.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .errors import UndefinedMetricError

# All reductions go through math.fsum: its result is the correctly rounded
# true sum, so every metric is bit-for-bit invariant under entry reordering
# and exact mathematical ties (e.g. a vector already in the bound-attaining
# arrangement) stay exact in floating point.
_fsum = math.fsum

# Intervals narrower than this count as degenerate for relative scoring.
_DEGENERATE_EPS = 1e-12


class BoundsDiagnosticWarning(UserWarning):
    """Emitted when a heuristic upper-bound term leaves [0, 1]."""


@dataclass(frozen=True)
class BoundsPair:
    low: float
    upp: float
    family: str  # "heuristic" | "mathematical"


class ProbPairVector:
    """Ordered per-pair probabilities (easy, hard), each in [0, 1]."""

    def __init__(self, entries: Iterable[tuple[float, float]]):
        pairs = list(entries)
        if not pairs:
            raise UndefinedMetricError("probability vector must have at least one entry")
        arr = np.asarray(pairs, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise UndefinedMetricError("entries must be (p_easy, p_hard) pairs")
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise UndefinedMetricError("probabilities must lie in [0, 1]")
        self.p_easy = arr[:, 0].copy()
        self.p_hard = arr[:, 1].copy()

    def __len__(self) -> int:
        return len(self.p_easy)

    def entries(self) -> list[tuple[float, float]]:
        return list(zip(self.p_easy.tolist(), self.p_hard.tolist()))

    def perturbed(self, index: int, side: str, delta: float) -> "ProbPairVector":
        """Copy with `delta` added to one probability; validates the result."""
        if not 0 <= index < len(self):
            raise UndefinedMetricError(f"index {index} out of range for N={len(self)}")
        if side not in ("easy", "hard"):
            raise UndefinedMetricError(f"side must be 'easy' or 'hard', got {side!r}")
        arr = np.column_stack([self.p_easy, self.p_hard])
        col = 0 if side == "easy" else 1
        new_val = arr[index, col] + delta
        if not 0.0 <= new_val <= 1.0:
            raise UndefinedMetricError(
                f"perturbed probability {new_val:.6f} leaves [0, 1] at index {index}"
            )
        arr[index, col] = new_val
        return ProbPairVector(map(tuple, arr))


def as_vector(v: ProbPairVector | Iterable[tuple[float, float]]) -> ProbPairVector:
    return v if isinstance(v, ProbPairVector) else ProbPairVector(v)


def _hard_mass(v: ProbPairVector) -> float:
    total = _fsum(v.p_hard)
    if total <= 0.0:
        raise UndefinedMetricError(
            "consistency is undefined: no hard question is ever answered correctly"
        )
    return total


def compute_cs(v: ProbPairVector | Iterable[tuple[float, float]]) -> float:
    """Consistency score: sum(p_easy * p_hard) / sum(p_hard)."""
    v = as_vector(v)
    return _fsum(v.p_easy * v.p_hard) / _hard_mass(v)


def accuracy(v: ProbPairVector | Iterable[tuple[float, float]], side: str) -> float:
    """Mean single-sample success probability on one side of the dataset."""
    v = as_vector(v)
    if side == "easy":
        return _fsum(v.p_easy) / len(v)
    if side == "hard":
        return _fsum(v.p_hard) / len(v)
    raise UndefinedMetricError(f"side must be 'easy' or 'hard', got {side!r}")


def difficulty_gap_stats(v: ProbPairVector | Iterable[tuple[float, float]]) -> tuple[float, float]:
    """Mean and population standard deviation of (p_easy - p_hard).

    The standard deviation is diagnostic only; the upper bound treats the
    per-pair difficulty gap as constant.
    """
    v = as_vector(v)
    gaps = v.p_easy - v.p_hard
    mu = _fsum(gaps) / len(v)
    sigma = math.sqrt(_fsum((gaps - mu) ** 2) / len(v))
    return mu, sigma


def compute_heuristic_bounds(
    v: ProbPairVector | Iterable[tuple[float, float]],
) -> BoundsPair:
    """Bounds from the independence (lower) and uniform-gap (upper) hypotheses.

    low  = mean(p_easy)                      -- identical to easy accuracy
    upp  = sum((p_hard + mu) * p_hard) / sum(p_hard),  mu = mean(p_easy - p_hard)
    """
    v = as_vector(v)
    total = _hard_mass(v)
    low = accuracy(v, "easy")
    mu, _sigma = difficulty_gap_stats(v)
    terms = v.p_hard + mu
    if np.any(terms < 0.0) or np.any(terms > 1.0):
        warnings.warn(
            "heuristic upper-bound terms leave [0, 1]; value kept unclamped",
            BoundsDiagnosticWarning,
            stacklevel=2,
        )
    upp = _fsum(terms * v.p_hard) / total
    return BoundsPair(low=low, upp=upp, family="heuristic")


def compute_math_bounds(
    v: ProbPairVector | Iterable[tuple[float, float]],
) -> BoundsPair:
    """Rearrangement bounds: sorted-agreeing pairing maximizes the score,
    sorted-opposing pairing minimizes it."""
    v = as_vector(v)
    total = _hard_mass(v)
    easy_sorted = np.sort(v.p_easy)
    hard_sorted = np.sort(v.p_hard)
    upp = _fsum(easy_sorted * hard_sorted) / total
    low = _fsum(easy_sorted[::-1] * hard_sorted) / total
    return BoundsPair(low=low, upp=upp, family="mathematical")


def compute_rcs(cs: float, bounds: BoundsPair, clamp: bool = False) -> float:
    """Relative consistency score: (cs - low) / (upp - low).

    Unclamped by default so out-of-interval scores stay visible; pass
    clamp=True to clip into [0, 1] for presentation.
    """
    width = bounds.upp - bounds.low
    if abs(width) <= _DEGENERATE_EPS:
        raise UndefinedMetricError(
            f"relative score undefined: degenerate interval [{bounds.low}, {bounds.upp}]"
        )
    value = (cs - bounds.low) / width
    if clamp:
        value = min(1.0, max(0.0, value))
    return value


def avg_cs(per_domain_cs: Sequence[float]) -> float:
    """Unweighted arithmetic mean of per-domain consistency scores."""
    if len(per_domain_cs) == 0:
        raise UndefinedMetricError("cannot average an empty list of scores")
    return _fsum(float(x) for x in per_domain_cs) / len(per_domain_cs)


def consistent_rate(v: ProbPairVector | Iterable[tuple[float, float]]) -> float:
    """Fraction of pairs with p_easy >= p_hard (ties count as consistent)."""
    v = as_vector(v)
    return float(np.mean(v.p_easy >= v.p_hard))


def leakage_adjusted_cs(
    v: ProbPairVector | Iterable[tuple[float, float]],
    index: int,
    side: str,
    delta: float,
) -> float:
    """Consistency score after modeling contamination of one question as an
    additive probability increment.

    Computed by recomputing the score on the perturbed vector, which is
    algebraically identical to the closed forms
      easy: cs + delta * p_hard[index] / sum(p_hard)
      hard: (sum(p_easy*p_hard) + p_easy[index]*delta) / (sum(p_hard) + delta)
    and guarantees exact agreement with `compute_cs` on the perturbed input.
    """
    v = as_vector(v)
    return compute_cs(v.perturbed(index, side, delta))


def kendall_tau(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Tie-corrected Kendall rank correlation (tau-b) between two score lists."""
    if len(xs) != len(ys):
        raise UndefinedMetricError("rank correlation needs equal-length inputs")
    if len(xs) < 2:
        raise UndefinedMetricError("rank correlation needs at least two points")
    result = stats.kendalltau(np.asarray(xs, float), np.asarray(ys, float), variant="b")
    tau = float(result.statistic)
    if np.isnan(tau):
        raise UndefinedMetricError("rank correlation undefined for constant input")
    return tau
