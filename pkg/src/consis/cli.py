"""Command-line surface: validate, evaluate, simulate, rcs-check, datagen, report.

The CLI is a thin single-threaded driver; sampling concurrency lives in the
orchestrator. `evaluate --backend http` reads the API key from the
CONSIS_API_KEY environment variable.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .backends import (
    DistSpec,
    EndpointConfig,
    HttpBackend,
    SimulatedBackend,
    ground_truth_for_pairs,
    simulated_outcome,
    synth_population,
)
from .core import QuestionPair, load_dataset, read_samples, validate_dataset
from .errors import ConsisError, UndefinedMetricError
from .estimation import convergence_series
from .metrics import (
    ProbPairVector,
    compute_cs,
    compute_heuristic_bounds,
    compute_math_bounds,
    kendall_tau,
    leakage_adjusted_cs,
)
from .orchestrator import (
    EARLY_STOPPING,
    MULTIPLE_SAMPLING,
    CampaignConfig,
    budget_report,
    resume_campaign,
    run_campaign,
)
from .report import MetricsReport, build_report, rcs_check_row, render_markdown

_ESTIMATOR_NAMES = {"multi": MULTIPLE_SAMPLING, "early": EARLY_STOPPING}


def _parse_dist(text: str) -> DistSpec:
    """Parse 'beta:A,B' or 'point:P' (bare numbers read as point masses)."""
    if text.startswith("beta:"):
        alpha, beta = (float(x) for x in text[len("beta:"):].split(","))
        return (alpha, beta)
    if text.startswith("point:"):
        return float(text[len("point:"):])
    return float(text)


def _campaign_config(args: argparse.Namespace, backend_id: str) -> CampaignConfig:
    return CampaignConfig(
        estimator=_ESTIMATOR_NAMES[args.estimator],
        m=args.m,
        k_min=args.k_min,
        k_max=args.k_max,
        parallelism=args.parallelism,
        backend_id=backend_id,
        seed=args.seed,
    )


def _make_backend(args: argparse.Namespace, pairs: Sequence[QuestionPair]):
    if args.backend == "http":
        if not args.base_url or not args.model:
            raise ConsisError("--base-url and --model are required with --backend http")
        return HttpBackend(EndpointConfig(base_url=args.base_url, model=args.model))
    rng = np.random.default_rng(args.seed)
    easy_dist = _parse_dist(args.sim_easy)
    hard_dist = _parse_dist(args.sim_hard)

    def draw(dist: DistSpec) -> float:
        if isinstance(dist, tuple):
            return float(rng.beta(*dist))
        return float(dist)

    probabilities = {p.id: (draw(easy_dist), draw(hard_dist)) for p in pairs}
    model = ground_truth_for_pairs(pairs, probabilities, seed=args.seed)
    return SimulatedBackend(model)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_validate(args: argparse.Namespace) -> int:
    pairs = load_dataset(args.dataset)
    violations = validate_dataset(pairs)
    for v in violations:
        print(f"{v.pair_id}: {v.rule}: {v.detail}")
    print(f"{len(pairs)} pairs, {len(violations)} violations")
    return 0 if not violations else 1


def cmd_evaluate(args: argparse.Namespace, timestamp: str | None = None) -> MetricsReport:
    pairs = load_dataset(args.dataset)
    violations = validate_dataset(pairs)
    if violations:
        raise ConsisError(
            f"dataset has {len(violations)} violations; run `consis validate` for details"
        )
    backend = _make_backend(args, pairs)
    cfg = _campaign_config(args, backend.backend_id)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    log_path = out_dir / "samples.jsonl"
    runner = resume_campaign if args.resume else run_campaign
    table = runner(pairs, backend, None, cfg, log_path, progress=not args.quiet)
    (out_dir / "estimates.json").write_text(table.to_json() + "\n", encoding="utf-8")

    metadata = {
        "backend_id": cfg.backend_id,
        "estimator": cfg.estimator,
        "params": {
            **cfg.estimator_params(),
            "temperature": cfg.temperature,
            "top_p": cfg.top_p,
            "seed": cfg.seed,
        },
        "timestamp": timestamp
        or datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    }
    report = build_report(table, pairs, metadata, clamp_rcs=args.clamp_rcs)
    (out_dir / "report.json").write_text(report.to_json(), encoding="utf-8")
    markdown = render_markdown(report)
    (out_dir / "report.md").write_text(markdown, encoding="utf-8")

    budget = budget_report(read_samples(log_path), pairs, cfg)
    print(markdown)
    print(f"total samples: {budget.total_samples}", file=sys.stderr)
    if budget.early_stop_savings is not None:
        print(f"early-stop savings: {budget.early_stop_savings}", file=sys.stderr)
    return report


def cmd_simulate(args: argparse.Namespace) -> None:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    easy_dist = _parse_dist(args.easy_dist)
    hard_dist = _parse_dist(args.hard_dist)
    seeds = [args.seed + i for i in range(args.seeds)]

    convergence_rows: list[dict[str, Any]] = []
    bounds_rows: list[dict[str, Any]] = []
    leakage_rows: list[dict[str, Any]] = []
    delta_grid = [round(0.02 * i, 2) for i in range(1, 11)]

    for seed in seeds:
        pairs, model = synth_population(
            args.n_pairs, easy_dist, hard_dist, seed=seed, ordered=args.ordered
        )
        true_vector = ProbPairVector(model.true_vector(pairs))
        true_cs = compute_cs(true_vector)

        # Convergence: estimate from t = 1..m prefix draws per question.
        outcomes = {
            p.id: (
                [simulated_outcome(model, p.id, "easy", j) for j in range(args.m)],
                [simulated_outcome(model, p.id, "hard", j) for j in range(args.m)],
            )
            for p in pairs
        }
        cs_series = convergence_series(outcomes, "cs")
        try:
            rcs_series: list[tuple[int, float | None]] = list(
                convergence_series(outcomes, "rcs")
            )
        except UndefinedMetricError:
            rcs_series = [(t, None) for t, _ in cs_series]
        for (t, cs_t), (_, rcs_t) in zip(cs_series, rcs_series):
            convergence_rows.append(
                {"seed": seed, "samples_used": t, "cs": cs_t, "rcs": rcs_t}
            )

        # Bound tightness on the true probability vector.
        heuristic = compute_heuristic_bounds(true_vector)
        mathematical = compute_math_bounds(true_vector)
        final_cs = cs_series[-1][1]
        bounds_rows.append(
            {
                "seed": seed,
                "true_cs": true_cs,
                "estimated_cs": final_cs,
                "heuristic_low": heuristic.low,
                "heuristic_upp": heuristic.upp,
                "math_low": mathematical.low,
                "math_upp": mathematical.upp,
            }
        )

        # Leakage sweep at the index with the most headroom per side.
        for side, probs in (("easy", true_vector.p_easy), ("hard", true_vector.p_hard)):
            index = int(np.argmin(probs))
            for delta in delta_grid:
                if probs[index] + delta > 1.0:
                    continue
                leakage_rows.append(
                    {
                        "seed": seed,
                        "side": side,
                        "index": index,
                        "delta": delta,
                        "cs_base": true_cs,
                        "cs_leak": leakage_adjusted_cs(true_vector, index, side, delta),
                    }
                )

    _write_csv(out_dir / "convergence.csv", convergence_rows)
    _write_csv(out_dir / "bounds.csv", bounds_rows)
    _write_csv(out_dir / "leakage.csv", leakage_rows)
    print(f"wrote {out_dir}/convergence.csv, bounds.csv, leakage.csv")


def _write_csv(path: Path, rows: list[dict[str, Any]]) -> None:
    if not rows:
        path.write_text("", encoding="utf-8")
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def cmd_rcs_check(args: argparse.Namespace) -> int:
    worst = "feasible"
    order = {"feasible": 0, "rounding-sensitive": 1, "degenerate": 2, "infeasible": 3}
    with open(args.table, newline="", encoding="utf-8") as fh:
        for i, row in enumerate(csv.DictReader(fh)):
            label = row.get("label", f"row {i}")
            verdict = rcs_check_row(
                float(row["low"]), float(row["cs"]), float(row["upp"]),
                float(row["reported_rcs"]), label=label,
            )
            point = "—" if verdict.point is None else f"{verdict.point:.1f}"
            print(f"{label}: {verdict.verdict} (recomputed {point})")
            if order[verdict.verdict] > order[worst]:
                worst = verdict.verdict
    return 1 if worst == "infeasible" else 0


def cmd_datagen(args: argparse.Namespace) -> None:
    from .datagen import generate_candidates, write_bundle

    pairs = load_dataset(args.dataset)
    backend = _make_backend(args, pairs)
    for pair in pairs:
        bundle = generate_candidates(pair, backend, n=args.n)
        path = write_bundle(bundle, args.out_dir)
        parsed = sum(1 for c in bundle.candidates if c.parsed is not None)
        print(f"{pair.id}: {parsed}/{len(bundle.candidates)} parsed -> {path}")


def cmd_report(args: argparse.Namespace) -> None:
    reports = []
    for path in sorted(Path(args.reports_dir).glob("*.json")):
        obj = json.loads(path.read_text(encoding="utf-8"))
        if "domains" in obj and "avg_cs" in obj:
            reports.append((path.stem, obj))
    if not reports:
        raise ConsisError(f"no report JSON files under {args.reports_dir}")

    domains = sorted({d for _, obj in reports for d in obj["domains"]})
    lines = ["# Cross-model summary", "", "| Model | " + " | ".join(
        f"{d} Hard | {d} CS" for d in domains) + " | Avg CS |"]
    lines.append("|---|" + "---:|" * (2 * len(domains) + 1))
    for name, obj in reports:
        cells = []
        for d in domains:
            dm = obj["domains"].get(d)
            cells.append("" if dm is None else f"{100 * dm['hard_acc']:.1f}")
            cells.append("" if dm is None else f"{100 * dm['cs']:.1f}")
        lines.append(f"| {name} | " + " | ".join(cells) + f" | {100 * obj['avg_cs']:.1f} |")
    lines += ["", "## Capability/consistency rank correlation", ""]
    for d in domains:
        points = [
            (obj["domains"][d]["hard_acc"], obj["domains"][d]["cs"])
            for _, obj in reports
            if d in obj["domains"]
        ]
        if len(points) < 2:
            lines.append(f"- {d}: not enough models")
            continue
        try:
            tau = kendall_tau([p[0] for p in points], [p[1] for p in points])
            lines.append(f"- {d}: Kendall tau (hard accuracy vs CS) = {tau:.3f}")
        except UndefinedMetricError as exc:
            lines.append(f"- {d}: undefined ({exc})")
    text = "\n".join(lines) + "\n"
    print(text)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _add_estimator_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--estimator", choices=("multi", "early"), default="multi")
    p.add_argument("--m", type=int, default=20, help="samples per question (multi)")
    p.add_argument("--k-min", type=int, default=3, help="initial draws (early)")
    p.add_argument("--k-max", type=int, default=20, help="draw budget (early)")


def _add_backend_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backend", choices=("http", "sim"), default="sim")
    p.add_argument("--base-url", help="chat-completions base URL (http backend)")
    p.add_argument("--model", help="model name (http backend)")
    p.add_argument("--sim-easy", default="beta:2,2",
                   help="easy-side probability distribution (sim backend)")
    p.add_argument("--sim-hard", default="beta:2,5",
                   help="hard-side probability distribution (sim backend)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="consis",
        description="Hard-to-easy consistency evaluation over pairwise datasets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="structurally validate a dataset")
    p.add_argument("--dataset", required=True)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("evaluate", help="run a sampling campaign and report metrics")
    p.add_argument("--dataset", required=True)
    _add_backend_flags(p)
    _add_estimator_flags(p)
    p.add_argument("--parallelism", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--clamp-rcs", action="store_true")
    p.add_argument("--resume", action="store_true",
                   help="reuse samples already in the out-dir log")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("simulate", help="convergence, bound, and leakage studies")
    p.add_argument("--n-pairs", type=int, default=300)
    p.add_argument("--easy-dist", default="beta:2,2")
    p.add_argument("--hard-dist", default="beta:2,5")
    p.add_argument("--ordered", action="store_true",
                   help="reject draws with p_easy < p_hard")
    p.add_argument("--m", type=int, default=20, help="draws per question and side")
    p.add_argument("--seeds", type=int, default=10, help="number of seeds")
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("rcs-check", help="recompute published (low, CS, upp, RCS) rows")
    p.add_argument("--table", required=True,
                   help="CSV with columns label,low,cs,upp,reported_rcs (percent)")
    p.set_defaults(fn=cmd_rcs_check)

    p = sub.add_parser("datagen", help="generate hard-question candidates for review")
    p.add_argument("--dataset", required=True)
    _add_backend_flags(p)
    p.add_argument("--n", type=int, default=3, help="candidates per easy datum")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=cmd_datagen)

    p = sub.add_parser("report", help="combine saved reports and correlate")
    p.add_argument("--reports-dir", required=True)
    p.add_argument("--out", help="optional output markdown path")
    p.set_defaults(fn=cmd_report)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = args.fn(args)
    except ConsisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(main())
