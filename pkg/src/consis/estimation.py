"""Bernoulli probability estimation from outcome sequences.

Two schemes are supported:

* multiple sampling: a fixed number m of independent draws, estimate k/m;
* early stopping: draw a minimum batch, stop as soon as any draw succeeded,
  otherwise continue one draw at a time until the first success or the
  budget cap; estimate k_c/k over whatever was drawn.

The stopping policy itself is stateless; callers own the sampling loop and
consult `early_stop_decision` after every draw.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import EstimationError, UndefinedMetricError
from .metrics import ProbPairVector, compute_cs, compute_heuristic_bounds, compute_rcs

OutcomeSequence = Sequence[bool]

CONTINUE = "continue"
STOP = "stop"


@dataclass(frozen=True)
class EarlyStopConfig:
    k_min: int
    k_max: int

    def __post_init__(self):
        if not 1 <= self.k_min <= self.k_max:
            raise EstimationError(
                f"need 1 <= k_min <= k_max, got k_min={self.k_min}, k_max={self.k_max}"
            )


def mle_multiple(seq: OutcomeSequence) -> float:
    """Maximum-likelihood estimate from m independent draws: successes / m."""
    if len(seq) == 0:
        raise EstimationError("cannot estimate from an empty outcome sequence")
    return sum(bool(o) for o in seq) / len(seq)


def early_stop_decision(seq: OutcomeSequence, cfg: EarlyStopConfig) -> str:
    """Decide whether sampling stops after the draws seen so far.

    Stop once the minimum batch is complete and any draw succeeded, or when
    the budget cap is reached; continue otherwise.
    """
    n = len(seq)
    if n > cfg.k_max:
        raise EstimationError(f"sequence length {n} exceeds k_max={cfg.k_max}")
    if n == cfg.k_max:
        return STOP
    if n >= cfg.k_min and any(seq):
        return STOP
    return CONTINUE


def _reachable(k: int, k_c: int, cfg: EarlyStopConfig) -> bool:
    if k == cfg.k_min:
        return 0 <= k_c <= cfg.k_min
    if cfg.k_min < k < cfg.k_max:
        return k_c == 1
    if k == cfg.k_max:
        return k_c in (0, 1)
    return False


def mle_early_stopping(k: int, k_c: int, cfg: EarlyStopConfig) -> float:
    """Maximum-likelihood estimate under the stopping policy: k_c / k.

    Rejects (k, k_c) states the policy can never produce, so corrupt sample
    logs surface as errors instead of silently yielding an estimate.
    """
    if not _reachable(k, k_c, cfg):
        raise EstimationError(
            f"(k={k}, k_c={k_c}) is unreachable under the stopping policy "
            f"(k_min={cfg.k_min}, k_max={cfg.k_max})"
        )
    return k_c / k


def convergence_series(
    per_pair_outcomes: Mapping[str, tuple[OutcomeSequence, OutcomeSequence]],
    metric: str,
) -> list[tuple[int, float]]:
    """Metric value as a function of samples used per question.

    For t = 1..max sequence length, every per-side probability is estimated
    from the first t outcomes (shorter sequences are used whole) and the
    requested metric is evaluated on the resulting vector. Relative scores
    use the heuristic bound family.
    """
    if metric not in ("cs", "rcs"):
        raise UndefinedMetricError(f"metric must be 'cs' or 'rcs', got {metric!r}")
    if not per_pair_outcomes:
        raise EstimationError("no outcome sequences given")
    for pair_id, (easy_seq, hard_seq) in per_pair_outcomes.items():
        if len(easy_seq) == 0 or len(hard_seq) == 0:
            raise EstimationError(f"empty outcome sequence for pair {pair_id!r}")
    t_max = max(
        max(len(easy), len(hard)) for easy, hard in per_pair_outcomes.values()
    )
    series: list[tuple[int, float]] = []
    for t in range(1, t_max + 1):
        entries = [
            (mle_multiple(easy[:t]), mle_multiple(hard[:t]))
            for easy, hard in per_pair_outcomes.values()
        ]
        vector = ProbPairVector(entries)
        cs = compute_cs(vector)
        if metric == "cs":
            series.append((t, cs))
        else:
            series.append((t, compute_rcs(cs, compute_heuristic_bounds(vector))))
    return series
