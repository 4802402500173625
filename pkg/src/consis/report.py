"""Metric aggregation and report rendering.

One internal value drives both the JSON and markdown renderings: JSON keeps
full precision, markdown shows percentages at one decimal. An undefined
relative score renders as "—" in markdown and null in JSON.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Sequence

from .core import ProbEstimateTable, QuestionPair
from .errors import UndefinedMetricError
from .metrics import (
    ProbPairVector,
    accuracy,
    avg_cs,
    compute_cs,
    compute_heuristic_bounds,
    compute_math_bounds,
    compute_rcs,
    consistent_rate,
    difficulty_gap_stats,
)


@dataclass
class DomainMetrics:
    n_pairs: int
    easy_acc: float
    hard_acc: float
    cs: float
    heuristic_low: float
    heuristic_upp: float
    math_low: float
    math_upp: float
    rcs: float | None
    consistent_rate: float
    gap_mean: float
    gap_std: float  # diagnostic; the upper bound treats the gap as constant

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_pairs": self.n_pairs,
            "easy_acc": self.easy_acc,
            "hard_acc": self.hard_acc,
            "cs": self.cs,
            "heuristic_low": self.heuristic_low,
            "heuristic_upp": self.heuristic_upp,
            "math_low": self.math_low,
            "math_upp": self.math_upp,
            "rcs": self.rcs,
            "consistent_rate": self.consistent_rate,
            "gap_mean": self.gap_mean,
            "gap_std": self.gap_std,
        }


@dataclass
class MetricsReport:
    domains: dict[str, DomainMetrics]
    avg_cs: float
    metadata: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "domains": {name: dm.to_dict() for name, dm in self.domains.items()},
            "avg_cs": self.avg_cs,
            "metadata": dict(self.metadata),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def domain_metrics(vector: ProbPairVector, clamp_rcs: bool = False) -> DomainMetrics:
    cs = compute_cs(vector)
    heuristic = compute_heuristic_bounds(vector)
    mathematical = compute_math_bounds(vector)
    try:
        rcs = compute_rcs(cs, heuristic, clamp=clamp_rcs)
    except UndefinedMetricError:
        rcs = None
    gap_mean, gap_std = difficulty_gap_stats(vector)
    return DomainMetrics(
        n_pairs=len(vector),
        easy_acc=accuracy(vector, "easy"),
        hard_acc=accuracy(vector, "hard"),
        cs=cs,
        heuristic_low=heuristic.low,
        heuristic_upp=heuristic.upp,
        math_low=mathematical.low,
        math_upp=mathematical.upp,
        rcs=rcs,
        consistent_rate=consistent_rate(vector),
        gap_mean=gap_mean,
        gap_std=gap_std,
    )


def build_report(
    table: ProbEstimateTable,
    pairs: Sequence[QuestionPair],
    metadata: dict[str, Any] | None = None,
    clamp_rcs: bool = False,
) -> MetricsReport:
    """Group estimates by domain, compute every metric, and aggregate."""
    by_domain: dict[str, list[tuple[float, float]]] = {}
    for pair in pairs:
        row = table.rows.get(pair.id)
        if row is None:
            raise UndefinedMetricError(f"estimate table has no row for pair {pair.id!r}")
        by_domain.setdefault(pair.domain, []).append((row.p_easy, row.p_hard))
    domains = {
        name: domain_metrics(ProbPairVector(entries), clamp_rcs=clamp_rcs)
        for name, entries in sorted(by_domain.items())
    }
    meta = dict(metadata or {})
    meta.setdefault("estimator", table.estimator)
    meta.setdefault("params", dict(table.estimator_params))
    return MetricsReport(
        domains=domains,
        avg_cs=avg_cs([dm.cs for dm in domains.values()]),
        metadata=meta,
    )


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _pct(value: float | None) -> str:
    return "—" if value is None else f"{100.0 * value:.1f}"


def render_markdown(report: MetricsReport) -> str:
    meta = report.metadata
    lines = [
        "# Consistency report",
        "",
        f"backend: {meta.get('backend_id', '?')} | estimator: {meta.get('estimator', '?')} "
        f"{json.dumps(meta.get('params', {}), sort_keys=True)} | "
        f"timestamp: {meta.get('timestamp', '?')}",
        "",
        "## Scores (%)",
        "",
        "| Domain | Hard | Easy | CS | Consistent rate | N |",
        "|---|---:|---:|---:|---:|---:|",
    ]
    for name, dm in report.domains.items():
        lines.append(
            f"| {name} | {_pct(dm.hard_acc)} | {_pct(dm.easy_acc)} | {_pct(dm.cs)} "
            f"| {_pct(dm.consistent_rate)} | {dm.n_pairs} |"
        )
    lines += [
        f"| **Avg CS** |  |  | {_pct(report.avg_cs)} |  |  |",
        "",
        "## Bounds and relative score (%)",
        "",
        "| Domain | low | CS | upp | RCS | math low | math upp |",
        "|---|---:|---:|---:|---:|---:|---:|",
    ]
    for name, dm in report.domains.items():
        lines.append(
            f"| {name} | {_pct(dm.heuristic_low)} | {_pct(dm.cs)} | {_pct(dm.heuristic_upp)} "
            f"| {_pct(dm.rcs)} | {_pct(dm.math_low)} | {_pct(dm.math_upp)} |"
        )
    lines.append("")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Published-table recomputation (rcs-check)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RcsRowVerdict:
    label: str
    point: float | None  # recomputed RCS, percent
    feasible_min: float | None
    feasible_max: float | None
    verdict: str  # "feasible" | "rounding-sensitive" | "infeasible" | "degenerate"


# Written values are rounded to one decimal, so each carries +-0.05 slack.
_ROUNDING = 0.05
# A point recompute within half a point of the written value counts as a match.
_POINT_TOL = 0.5


def rcs_check_row(low: float, cs: float, upp: float, reported: float, label: str = "") -> RcsRowVerdict:
    """Recompute a published (low, CS, upp, RCS) row, all in percent units.

    The feasible interval is the min/max of the recomputed score over the
    +-0.05 rounding box around each input.
    """
    if abs(upp - low) <= 1e-9:
        return RcsRowVerdict(label, None, None, None, "degenerate")
    point = 100.0 * (cs - low) / (upp - low)
    corner_values = []
    for d_cs in (-_ROUNDING, _ROUNDING):
        for d_low in (-_ROUNDING, _ROUNDING):
            for d_upp in (-_ROUNDING, _ROUNDING):
                width = (upp + d_upp) - (low + d_low)
                if abs(width) <= 1e-9:
                    continue
                corner_values.append(100.0 * ((cs + d_cs) - (low + d_low)) / width)
    feasible_min, feasible_max = min(corner_values), max(corner_values)
    if abs(point - reported) <= _POINT_TOL:
        verdict = "feasible"
    elif feasible_min - 1e-9 <= reported <= feasible_max + 1e-9:
        verdict = "rounding-sensitive"
    else:
        verdict = "infeasible"
    return RcsRowVerdict(label, point, feasible_min, feasible_max, verdict)
