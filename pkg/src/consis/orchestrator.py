"""Sampling campaigns: iterate pairs, call a backend, verify answers,
persist records, and fill a probability estimate table.

Concurrency is per (pair, side) task; early-stopping draws are inherently
sequential inside a task. The main thread is the single log writer and
appends each task's records as it completes, so a killed campaign leaves a
valid log that `resume_campaign` can pick up without re-sampling.
"""

from __future__ import annotations

import sys
import time
from concurrent.futures import FIRST_EXCEPTION, ThreadPoolExecutor, wait
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

from .backends import Backend, GenerationRequest
from .core import (
    EstimateRow,
    ProbEstimateTable,
    QuestionPair,
    QuestionSpec,
    SampleLogWriter,
    SampleRecord,
    read_samples,
)
from .errors import BackendError, CampaignError, GenerationTimeout, TransportError
from .estimation import (
    CONTINUE,
    EarlyStopConfig,
    early_stop_decision,
    mle_early_stopping,
    mle_multiple,
)
from .verifiers import Verdict, verify_response

Verifier = Callable[[str, QuestionSpec], Verdict]

MULTIPLE_SAMPLING = "multiple_sampling"
EARLY_STOPPING = "early_stopping"


@dataclass(frozen=True)
class CampaignConfig:
    estimator: str = MULTIPLE_SAMPLING
    m: int = 20
    k_min: int = 3
    k_max: int = 20
    parallelism: int = 1
    backend_id: str = "sim"
    temperature: float = 0.7
    top_p: float = 0.95
    max_tokens: int = 1024
    seed: int = 0
    retry_attempts: int = 3
    retry_backoff_s: float = 1.0

    def __post_init__(self):
        if self.estimator not in (MULTIPLE_SAMPLING, EARLY_STOPPING):
            raise CampaignError(f"unknown estimator {self.estimator!r}")
        if self.m < 1:
            raise CampaignError("m must be >= 1")
        if not 1 <= self.k_min <= self.k_max:
            raise CampaignError("need 1 <= k_min <= k_max")
        if self.parallelism < 1:
            raise CampaignError("parallelism must be >= 1")

    def estimator_params(self) -> dict[str, int]:
        if self.estimator == MULTIPLE_SAMPLING:
            return {"m": self.m}
        return {"k_min": self.k_min, "k_max": self.k_max}

    def params_echo(self) -> dict[str, Any]:
        return {
            "estimator": self.estimator,
            **self.estimator_params(),
            "temperature": self.temperature,
            "top_p": self.top_p,
            "max_tokens": self.max_tokens,
            "seed": self.seed,
        }

    def request(self) -> GenerationRequest:
        return GenerationRequest(
            prompt="",
            temperature=self.temperature,
            top_p=self.top_p,
            max_tokens=self.max_tokens,
        )


@dataclass
class _SideResult:
    pair_id: str
    side: str
    outcomes: list[bool]
    new_records: list[SampleRecord]


def _draw_once(
    backend: Backend,
    prompt: str,
    pair_id: str,
    side: str,
    draw_index: int,
    cfg: CampaignConfig,
) -> tuple[str, float]:
    """One backend call with retries on transient transport failures."""
    delay = cfg.retry_backoff_s
    attempts = cfg.retry_attempts + 1
    last: BackendError | None = None
    request = GenerationRequest(
        prompt=prompt,
        temperature=cfg.temperature,
        top_p=cfg.top_p,
        max_tokens=cfg.max_tokens,
    )
    for attempt in range(attempts):
        started = time.perf_counter()
        try:
            text = backend.generate(
                prompt,
                pair_id=pair_id,
                side=side,
                draw_index=draw_index,
                request=request,
            )
            return text, time.perf_counter() - started
        except (TransportError, GenerationTimeout) as exc:
            last = exc
            if attempt < attempts - 1:
                time.sleep(delay)
                delay *= 2
    raise CampaignError(
        f"backend failed for ({pair_id}, {side}, sample {draw_index}) "
        f"after {attempts} attempts: {last}"
    )


def _sample_side(
    pair: QuestionPair,
    side: str,
    backend: Backend,
    verifier: Verifier,
    cfg: CampaignConfig,
    existing: list[bool],
) -> _SideResult:
    spec: QuestionSpec = getattr(pair, side)
    outcomes = list(existing)
    new_records: list[SampleRecord] = []
    echo = cfg.params_echo()
    stop_cfg = EarlyStopConfig(cfg.k_min, cfg.k_max)

    def should_continue() -> bool:
        if cfg.estimator == MULTIPLE_SAMPLING:
            return len(outcomes) < cfg.m
        return early_stop_decision(outcomes, stop_cfg) == CONTINUE

    while should_continue():
        index = len(outcomes)
        text, elapsed = _draw_once(backend, spec.prompt, pair.id, side, index, cfg)
        try:
            verdict = verifier(text, spec)
        except Exception as exc:  # verifier crash: score wrong, flag the harness
            verdict = Verdict(False, f"verifier crashed: {exc}", harness_fault=True)
        params = dict(echo)
        if verdict.harness_fault:
            params["harness_fault"] = True
        new_records.append(
            SampleRecord(
                pair_id=pair.id,
                side=side,
                index=index,
                backend_id=cfg.backend_id,
                response=text,
                verdict=verdict.correct,
                wall_time=elapsed,
                params_echo=params,
            )
        )
        outcomes.append(verdict.correct)
    return _SideResult(pair.id, side, outcomes, new_records)


def _assemble_table(
    pairs: Sequence[QuestionPair],
    outcomes: dict[tuple[str, str], list[bool]],
    cfg: CampaignConfig,
) -> ProbEstimateTable:
    rows: dict[str, EstimateRow] = {}
    for pair in pairs:
        side_stats = {}
        for side in ("easy", "hard"):
            seq = outcomes[(pair.id, side)]
            k, kc = len(seq), sum(seq)
            if cfg.estimator == MULTIPLE_SAMPLING:
                p = mle_multiple(seq)
            else:
                p = mle_early_stopping(k, kc, EarlyStopConfig(cfg.k_min, cfg.k_max))
            side_stats[side] = (p, k, kc)
        rows[pair.id] = EstimateRow(
            p_easy=side_stats["easy"][0],
            p_hard=side_stats["hard"][0],
            k_easy=side_stats["easy"][1],
            kc_easy=side_stats["easy"][2],
            k_hard=side_stats["hard"][1],
            kc_hard=side_stats["hard"][2],
        )
    return ProbEstimateTable(
        rows=rows,
        estimator=cfg.estimator,
        estimator_params=cfg.estimator_params(),
    )


def _check_log_compatible(
    records: list[SampleRecord], cfg: CampaignConfig
) -> None:
    # Estimates must come from one sampling regime: estimator, its
    # parameters, and the generation parameters all have to match.
    expected = cfg.params_echo()
    keys = tuple(expected)
    for rec in records:
        if rec.backend_id != cfg.backend_id:
            raise CampaignError(
                f"log was written by backend {rec.backend_id!r}, "
                f"campaign uses {cfg.backend_id!r}"
            )
        for key in keys:
            if rec.params_echo.get(key) != expected[key]:
                raise CampaignError(
                    f"log/config mismatch on {key!r}: log has "
                    f"{rec.params_echo.get(key)!r}, campaign wants {expected[key]!r}"
                )


def _run(
    pairs: Sequence[QuestionPair],
    backend: Backend,
    verifier: Verifier,
    cfg: CampaignConfig,
    log_path: str | Path,
    existing: list[SampleRecord],
    progress: bool,
) -> ProbEstimateTable:
    writer = SampleLogWriter(log_path)
    prior: dict[tuple[str, str], list[bool]] = {
        (p.id, side): [] for p in pairs for side in ("easy", "hard")
    }
    for rec in sorted(existing, key=lambda r: r.index):
        key = (rec.pair_id, rec.side)
        if key in prior:
            prior[key].append(rec.verdict)

    for (pair_id, side), seq in prior.items():
        cap = cfg.m if cfg.estimator == MULTIPLE_SAMPLING else cfg.k_max
        if len(seq) > cap:
            raise CampaignError(
                f"log holds {len(seq)} samples for ({pair_id}, {side}), over budget {cap}"
            )

    outcomes: dict[tuple[str, str], list[bool]] = {}
    done_sides: dict[str, int] = {}
    done_pairs = 0
    total = len(pairs)

    with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
        futures = {
            pool.submit(
                _sample_side, pair, side, backend, verifier, cfg, prior[(pair.id, side)]
            ): (pair.id, side)
            for pair in pairs
            for side in ("easy", "hard")
        }
        pending = set(futures)
        try:
            while pending:
                finished, pending = wait(pending, return_when=FIRST_EXCEPTION)
                for fut in finished:
                    result = fut.result()  # re-raises task failures
                    writer.append(result.new_records)
                    outcomes[(result.pair_id, result.side)] = result.outcomes
                    done_sides[result.pair_id] = done_sides.get(result.pair_id, 0) + 1
                    if done_sides[result.pair_id] == 2:
                        done_pairs += 1
                        if progress:
                            print(f"pairs done: {done_pairs}/{total}", file=sys.stderr)
        except Exception:
            for fut in pending:
                fut.cancel()
            raise

    return _assemble_table(pairs, outcomes, cfg)


def run_campaign(
    pairs: Sequence[QuestionPair],
    backend: Backend,
    verifier: Verifier | None,
    cfg: CampaignConfig,
    log_path: str | Path,
    progress: bool = False,
) -> ProbEstimateTable:
    """Sample every (pair, side) from scratch and return the estimate table.

    Refuses to run over a non-empty log; use `resume_campaign` for that.
    """
    existing = read_samples(log_path)
    if existing:
        raise CampaignError(
            f"log {log_path} already holds {len(existing)} records; use resume_campaign"
        )
    return _run(pairs, backend, verifier or verify_response, cfg, log_path, [], progress)


def resume_campaign(
    pairs: Sequence[QuestionPair],
    backend: Backend,
    verifier: Verifier | None,
    cfg: CampaignConfig,
    log_path: str | Path,
    progress: bool = False,
) -> ProbEstimateTable:
    """Continue a campaign from an existing log, re-using every logged sample.

    The log must have been produced under the same estimator configuration
    and backend id; anything else is refused explicitly.
    """
    existing = read_samples(log_path)
    _check_log_compatible(existing, cfg)
    return _run(pairs, backend, verifier or verify_response, cfg, log_path, existing, progress)


# ---------------------------------------------------------------------------
# Budget accounting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BudgetReport:
    total_samples: int
    samples_per_domain: dict[str, int]
    samples_per_side: dict[str, int]
    early_stop_savings: int | None


def budget_report(
    records: Iterable[SampleRecord],
    pairs: Sequence[QuestionPair] = (),
    cfg: CampaignConfig | None = None,
) -> BudgetReport:
    """Count samples per domain and side; with an early-stopping config,
    also report how many draws the policy saved versus the full budget."""
    domain_of = {p.id: p.domain for p in pairs}
    per_domain: dict[str, int] = {}
    per_side: dict[str, int] = {}
    total = 0
    for rec in records:
        total += 1
        domain = domain_of.get(rec.pair_id, "unknown")
        per_domain[domain] = per_domain.get(domain, 0) + 1
        per_side[rec.side] = per_side.get(rec.side, 0) + 1
    savings = None
    if cfg is not None and cfg.estimator == EARLY_STOPPING and pairs:
        savings = cfg.k_max * len(pairs) * 2 - total
    return BudgetReport(
        total_samples=total,
        samples_per_domain=per_domain,
        samples_per_side=per_side,
        early_stop_savings=savings,
    )
