"""Pairwise dataset schema, loading, structural validation, and sample logs.

A dataset is line-delimited JSON, one easy/hard question pair per line.
Sample logs are append-only JSONL files holding one sampled response per
line. Both formats are documented in the README.
"""

from __future__ import annotations

import json
import os
from collections import Counter
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Any, Iterable

from .errors import DatasetError, SampleLogError

DOMAINS = ("math", "code", "instruction_following")
SIDES = ("easy", "hard")


# ---------------------------------------------------------------------------
# Checkers and question pairs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NumericAnswer:
    """Answer is correct iff its final numeric literal equals `expected`."""

    expected: str

    kind = "numeric"


@dataclass(frozen=True)
class CodeCheck:
    """Answer is a program checked by running `check_source` against it."""

    entry_point: str
    check_source: str

    kind = "code"


@dataclass(frozen=True)
class Constraint:
    type_id: str
    kwargs: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class ConstraintList:
    """Answer is correct iff every rule-based constraint passes."""

    items: tuple[Constraint, ...]

    kind = "constraints"


Checker = NumericAnswer | CodeCheck | ConstraintList


@dataclass(frozen=True)
class QuestionSpec:
    prompt: str
    checker: Checker


@dataclass(frozen=True)
class QuestionPair:
    """One easy/hard question pair sharing a checker kind."""

    id: str
    domain: str
    easy: QuestionSpec
    hard: QuestionSpec


@dataclass(frozen=True)
class Violation:
    """One structural-validation finding; violations are data, not failures."""

    pair_id: str
    rule: str
    detail: str = ""


# ---------------------------------------------------------------------------
# JSON (de)serialization
# ---------------------------------------------------------------------------

def checker_to_dict(checker: Checker) -> dict[str, Any]:
    if isinstance(checker, NumericAnswer):
        return {"kind": "numeric", "expected": checker.expected}
    if isinstance(checker, CodeCheck):
        return {
            "kind": "code",
            "entry_point": checker.entry_point,
            "check_source": checker.check_source,
        }
    if isinstance(checker, ConstraintList):
        return {
            "kind": "constraints",
            "items": [{"type": c.type_id, "kwargs": dict(c.kwargs)} for c in checker.items],
        }
    raise TypeError(f"unknown checker type: {type(checker)!r}")


def checker_from_dict(obj: Any) -> Checker:
    if not isinstance(obj, dict):
        raise ValueError("checker must be an object")
    kind = obj.get("kind")
    if kind == "numeric":
        expected = obj.get("expected")
        if not isinstance(expected, str):
            raise ValueError("numeric checker requires string field 'expected'")
        return NumericAnswer(expected=expected)
    if kind == "code":
        entry, source = obj.get("entry_point"), obj.get("check_source")
        if not isinstance(entry, str) or not isinstance(source, str):
            raise ValueError("code checker requires 'entry_point' and 'check_source'")
        return CodeCheck(entry_point=entry, check_source=source)
    if kind == "constraints":
        items = obj.get("items")
        if not isinstance(items, list):
            raise ValueError("constraints checker requires list field 'items'")
        parsed = []
        for item in items:
            if not isinstance(item, dict) or not isinstance(item.get("type"), str):
                raise ValueError("constraint items need a string 'type'")
            kwargs = item.get("kwargs", {})
            if not isinstance(kwargs, dict):
                raise ValueError("constraint 'kwargs' must be an object")
            parsed.append(Constraint(type_id=item["type"], kwargs=kwargs))
        return ConstraintList(items=tuple(parsed))
    raise ValueError(f"unknown checker kind: {kind!r}")


def spec_to_dict(spec: QuestionSpec) -> dict[str, Any]:
    return {"prompt": spec.prompt, "checker": checker_to_dict(spec.checker)}


def spec_from_dict(obj: Any) -> QuestionSpec:
    if not isinstance(obj, dict) or not isinstance(obj.get("prompt"), str):
        raise ValueError("question spec requires a string 'prompt'")
    return QuestionSpec(prompt=obj["prompt"], checker=checker_from_dict(obj.get("checker")))


def pair_to_dict(pair: QuestionPair) -> dict[str, Any]:
    return {
        "id": pair.id,
        "domain": pair.domain,
        "easy": spec_to_dict(pair.easy),
        "hard": spec_to_dict(pair.hard),
    }


def pair_from_dict(obj: Any) -> QuestionPair:
    if not isinstance(obj, dict):
        raise ValueError("pair must be an object")
    pair_id = obj.get("id")
    if not isinstance(pair_id, str) or not pair_id:
        raise ValueError("pair requires a non-empty string 'id'")
    domain = obj.get("domain")
    if domain not in DOMAINS:
        raise ValueError(f"domain must be one of {DOMAINS}, got {domain!r}")
    return QuestionPair(
        id=pair_id,
        domain=domain,
        easy=spec_from_dict(obj.get("easy")),
        hard=spec_from_dict(obj.get("hard")),
    )


# ---------------------------------------------------------------------------
# Dataset loading and validation
# ---------------------------------------------------------------------------

def load_dataset(path: str | Path) -> list[QuestionPair]:
    """Load a JSONL dataset, in file order, rejecting malformed lines.

    Raises DatasetError naming the offending line number or duplicate id.
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"dataset file not found: {path}")
    pairs: list[QuestionPair] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
            try:
                pair = pair_from_dict(obj)
            except ValueError as exc:
                raise DatasetError(f"line {lineno}: {exc}") from exc
            if pair.id in seen:
                raise DatasetError(f"duplicate pair id {pair.id!r} (line {lineno})")
            seen.add(pair.id)
            pairs.append(pair)
    return pairs


def dump_dataset(pairs: Iterable[QuestionPair], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(pair_to_dict(pair), ensure_ascii=False) + "\n")


def _is_finite_decimal(text: str) -> bool:
    try:
        return Decimal(text).is_finite()
    except InvalidOperation:
        return False


def validate_dataset(
    pairs: Iterable[QuestionPair],
    registered_constraints: Iterable[str] | None = None,
) -> list[Violation]:
    """Check type invariants over a pair collection; pure, order-preserving.

    `registered_constraints` defaults to the built-in constraint registry.
    """
    if registered_constraints is None:
        from .verifiers import registered_constraint_types

        registered_constraints = registered_constraint_types()
    registry = set(registered_constraints)

    violations: list[Violation] = []
    for pair in pairs:
        for side in SIDES:
            spec: QuestionSpec = getattr(pair, side)
            if not spec.prompt.strip():
                violations.append(Violation(pair.id, "empty_prompt", f"{side} prompt is empty"))
            checker = spec.checker
            if isinstance(checker, NumericAnswer) and not _is_finite_decimal(checker.expected):
                violations.append(
                    Violation(pair.id, "expected_not_decimal",
                              f"{side} expected {checker.expected!r} is not a finite decimal")
                )
            if isinstance(checker, ConstraintList):
                for item in checker.items:
                    if item.type_id not in registry:
                        violations.append(
                            Violation(pair.id, "unregistered_constraint_type",
                                      f"{side} uses unknown constraint {item.type_id!r}")
                        )
        if pair.easy.checker.kind != pair.hard.checker.kind:
            violations.append(
                Violation(pair.id, "checker_kind_mismatch",
                          f"easy is {pair.easy.checker.kind}, hard is {pair.hard.checker.kind}")
            )
        elif pair.domain == "instruction_following" and isinstance(pair.easy.checker, ConstraintList):
            easy_types = Counter(c.type_id for c in pair.easy.checker.items)
            hard_types = Counter(c.type_id for c in pair.hard.checker.items)
            proper = all(hard_types[t] >= n for t, n in easy_types.items()) and (
                sum(easy_types.values()) < sum(hard_types.values())
            )
            if not proper:
                violations.append(
                    Violation(pair.id, "not_strict_submultiset",
                              "easy constraint types are not a strict sub-multiset of hard's")
                )
    return violations


# ---------------------------------------------------------------------------
# Sample logs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SampleRecord:
    """One sampled response with its verdict; lives in an append-only log."""

    pair_id: str
    side: str
    index: int
    backend_id: str
    response: str
    verdict: bool
    wall_time: float
    params_echo: dict[str, Any] = field(default_factory=dict)

    def key(self) -> tuple[str, str, str]:
        return (self.pair_id, self.side, self.backend_id)


def record_to_dict(rec: SampleRecord) -> dict[str, Any]:
    return {
        "pair_id": rec.pair_id,
        "side": rec.side,
        "index": rec.index,
        "backend_id": rec.backend_id,
        "response": rec.response,
        "verdict": rec.verdict,
        "wall_time": rec.wall_time,
        "params": dict(rec.params_echo),
    }


def record_from_dict(obj: Any) -> SampleRecord:
    if not isinstance(obj, dict):
        raise ValueError("sample record must be an object")
    try:
        return SampleRecord(
            pair_id=str(obj["pair_id"]),
            side=str(obj["side"]),
            index=int(obj["index"]),
            backend_id=str(obj["backend_id"]),
            response=str(obj["response"]),
            verdict=bool(obj["verdict"]),
            wall_time=float(obj["wall_time"]),
            params_echo=dict(obj.get("params", {})),
        )
    except KeyError as exc:
        raise ValueError(f"sample record missing field {exc.args[0]!r}") from exc


def read_samples(log_path: str | Path) -> list[SampleRecord]:
    """Read all records from a sample log; missing file reads as empty."""
    path = Path(log_path)
    if not path.exists():
        return []
    records: list[SampleRecord] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(record_from_dict(json.loads(line)))
            except (json.JSONDecodeError, ValueError) as exc:
                raise SampleLogError(f"{path}, line {lineno}: {exc}") from exc
    return records


class SampleLogWriter:
    """Single-writer append access to one log file.

    Validates uniqueness and per-key index contiguity against everything
    already in the log before any byte is written, so a rejected batch
    leaves the file untouched. Callers must serialize access externally
    (one writer per log file).
    """

    def __init__(self, log_path: str | Path):
        self.path = Path(log_path)
        self._counts: dict[tuple[str, str, str], int] = {}
        for rec in read_samples(self.path):
            self._register(rec)

    def _register(self, rec: SampleRecord) -> None:
        key = rec.key()
        expected = self._counts.get(key, 0)
        if rec.index < expected:
            raise SampleLogError(
                f"duplicate sample index {rec.index} for {key}"
            )
        if rec.index > expected:
            raise SampleLogError(
                f"non-contiguous index {rec.index} for {key}; expected {expected}"
            )
        if rec.side not in SIDES:
            raise SampleLogError(f"invalid side {rec.side!r} for pair {rec.pair_id!r}")
        self._counts[key] = expected + 1

    def count(self, pair_id: str, side: str, backend_id: str) -> int:
        return self._counts.get((pair_id, side, backend_id), 0)

    def append(self, records: list[SampleRecord]) -> int:
        """Append records; returns the number written. All-or-nothing."""
        snapshot = dict(self._counts)
        try:
            for rec in records:
                self._register(rec)
        except SampleLogError:
            self._counts = snapshot
            raise
        lines = [json.dumps(record_to_dict(r), ensure_ascii=False) for r in records]
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write("".join(line + "\n" for line in lines))
            fh.flush()
            os.fsync(fh.fileno())
        return len(records)


def append_samples(log_path: str | Path, records: list[SampleRecord]) -> int:
    """Append records to a log file, validating against its current content."""
    return SampleLogWriter(log_path).append(records)


# ---------------------------------------------------------------------------
# Probability estimate tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EstimateRow:
    p_easy: float
    p_hard: float
    k_easy: int
    kc_easy: int
    k_hard: int
    kc_hard: int

    def __post_init__(self):
        for k, kc, side in (
            (self.k_easy, self.kc_easy, "easy"),
            (self.k_hard, self.kc_hard, "hard"),
        ):
            if not 0 <= kc <= k:
                raise DatasetError(
                    f"estimate row needs 0 <= correct <= total on the {side} side, "
                    f"got {kc}/{k}"
                )


@dataclass
class ProbEstimateTable:
    """Per-pair probability estimates with their sampling counts."""

    rows: dict[str, EstimateRow]
    estimator: str  # "multiple_sampling" | "early_stopping"
    estimator_params: dict[str, int]

    def to_dict(self) -> dict[str, Any]:
        return {
            "estimator": self.estimator,
            "estimator_params": dict(self.estimator_params),
            "rows": {
                pid: {
                    "p_easy": row.p_easy,
                    "p_hard": row.p_hard,
                    "k_easy": row.k_easy,
                    "kc_easy": row.kc_easy,
                    "k_hard": row.k_hard,
                    "kc_hard": row.kc_hard,
                }
                for pid, row in self.rows.items()
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @staticmethod
    def from_dict(obj: dict[str, Any]) -> "ProbEstimateTable":
        rows = {
            pid: EstimateRow(
                p_easy=float(r["p_easy"]),
                p_hard=float(r["p_hard"]),
                k_easy=int(r["k_easy"]),
                kc_easy=int(r["kc_easy"]),
                k_hard=int(r["k_hard"]),
                kc_hard=int(r["kc_hard"]),
            )
            for pid, r in obj["rows"].items()
        }
        return ProbEstimateTable(
            rows=rows,
            estimator=obj["estimator"],
            estimator_params=dict(obj["estimator_params"]),
        )
