"""Correctness verdicts for raw model responses.

Three checker families: final-number extraction with exact decimal
comparison (math), rule-based text constraints (instruction following),
and delegation to an isolated subprocess runner (code). Numeric and
constraint verification are pure; code verification spawns one runner
process per call.
"""

from __future__ import annotations

import json
import os
import re
import shutil
import subprocess
import sys
import tempfile
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Callable

from .core import Checker, CodeCheck, Constraint, ConstraintList, NumericAnswer, QuestionSpec
from .errors import SandboxUnavailableError

RUNNER_ENV_VAR = "CONSIS_RUNNER"
DEFAULT_RUNNER = "sandbox-runner"


@dataclass(frozen=True)
class Verdict:
    correct: bool
    detail: str = ""
    harness_fault: bool = False


# ---------------------------------------------------------------------------
# Numeric answers
# ---------------------------------------------------------------------------

# Numbers with optional sign, optional 3-digit thousands groups, optional
# decimal part. Currency symbols are stripped before matching. ASCII-only:
# Unicode digit lookalikes must not change a verdict across platforms.
_NUMBER_RE = re.compile(r"[-+]?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?", re.ASCII)
_CURRENCY_RE = re.compile(r"[$€£¥]")


def extract_final_number(response: str) -> Decimal | None:
    """Return the last numeric literal in the text, or None.

    Currency symbols and thousands separators are stripped so "$1,555."
    reads as 1555. The final literal wins, which tolerates worked
    reasoning before the answer.
    """
    cleaned = _CURRENCY_RE.sub("", response)
    matches = _NUMBER_RE.findall(cleaned)
    if not matches:
        return None
    return Decimal(matches[-1].replace(",", ""))


def verify_numeric(response: str, expected: str) -> Verdict:
    """Correct iff the final extracted number equals `expected` exactly.

    Comparison is exact-decimal: 47.3 never matches 47.25, and no float
    round-off is involved.
    """
    try:
        expected_value = Decimal(expected)
    except InvalidOperation:
        return Verdict(False, f"expected value {expected!r} is not a decimal", harness_fault=True)
    found = extract_final_number(response)
    if found is None:
        return Verdict(False, "no number extracted")
    if found == expected_value:
        return Verdict(True, f"extracted {found}")
    return Verdict(False, f"extracted {found}, expected {expected_value}")


# ---------------------------------------------------------------------------
# Rule-based constraints
# ---------------------------------------------------------------------------

_SENTENCE_END = re.compile(r"[.!?]+(?=\s|$)")
_ABBREVIATIONS = {"e.g", "i.e", "mr", "dr"}


def count_sentences(text: str) -> int:
    """Count sentences ended by ./!/? followed by whitespace or end of text.

    Common abbreviations (e.g., i.e., Mr., Dr.) do not end a sentence;
    trailing unterminated text counts as one sentence.
    """
    count = 0
    tail = 0
    for match in _SENTENCE_END.finditer(text):
        if match.group().startswith("."):
            words = text[: match.start()].split()
            last = words[-1].lstrip("('\"[{") if words else ""
            if last.lower() in _ABBREVIATIONS:
                continue
        count += 1
        tail = match.end()
    if text[tail:].strip():
        count += 1
    return count


def _check_no_comma(text: str) -> bool:
    return "," not in text


def _check_number_sentences(text: str, relation: str, num_sentences: int) -> bool:
    n = count_sentences(text)
    if relation == "at least":
        return n >= num_sentences
    if relation == "at most":
        return n <= num_sentences
    raise ValueError(f"unknown relation {relation!r}")


def _check_keywords_existence(text: str, keywords: list[str]) -> bool:
    lowered = text.lower()
    return all(str(kw).lower() in lowered for kw in keywords)


# type id -> (checker callable, required kwargs)
_CONSTRAINT_REGISTRY: dict[str, tuple[Callable[..., bool], tuple[str, ...]]] = {
    "punctuation:no_comma": (_check_no_comma, ()),
    "length_constraints:number_sentences": (
        _check_number_sentences,
        ("relation", "num_sentences"),
    ),
    "keywords:existence": (_check_keywords_existence, ("keywords",)),
}


def register_constraint(
    type_id: str, fn: Callable[..., bool], required_kwargs: tuple[str, ...] = ()
) -> None:
    """Add a constraint checker; fn takes (text, **kwargs) and returns bool."""
    _CONSTRAINT_REGISTRY[type_id] = (fn, required_kwargs)


def registered_constraint_types() -> list[str]:
    return sorted(_CONSTRAINT_REGISTRY)


def constraint_kwargs_valid(item: Constraint) -> bool:
    entry = _CONSTRAINT_REGISTRY.get(item.type_id)
    if entry is None:
        return False
    _, required = entry
    return all(name in item.kwargs for name in required)


def verify_constraints(response: str, items: list[Constraint] | ConstraintList) -> Verdict:
    """Correct iff every constraint in the list passes."""
    if isinstance(items, ConstraintList):
        items = list(items.items)
    failures = []
    for item in items:
        entry = _CONSTRAINT_REGISTRY.get(item.type_id)
        if entry is None:
            return Verdict(
                False,
                f"unregistered constraint type {item.type_id!r}",
                harness_fault=True,
            )
        fn, _required = entry
        try:
            ok = fn(response, **item.kwargs)
        except (TypeError, ValueError) as exc:
            return Verdict(
                False,
                f"constraint {item.type_id!r} rejected kwargs: {exc}",
                harness_fault=True,
            )
        if not ok:
            failures.append(item.type_id)
    if failures:
        return Verdict(False, "failed: " + ", ".join(failures))
    return Verdict(True, f"all {len(items)} constraints passed")


# ---------------------------------------------------------------------------
# Code checks via the sandbox runner
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CodeRunLimits:
    timeout_s: float = 10.0
    memory_bytes: int = 256 * 1024 * 1024


_FENCE_RE = re.compile(r"```(?:python)?\s*\n(.*?)```", re.DOTALL)


def extract_code(response: str) -> str:
    """Pull code out of a fenced block when present, else return as-is."""
    match = _FENCE_RE.search(response)
    return (match.group(1) if match else response).strip("\n")


def assemble_program(prompt_stub: str, response: str, entry_point: str) -> str:
    """Turn a raw response into a runnable program defining `entry_point`.

    Responses that already define the function are used directly; anything
    else is treated as a completion body and indented under the prompt's
    function stub.
    """
    code = extract_code(response)
    if re.search(rf"\bdef\s+{re.escape(entry_point)}\s*\(", code):
        return code
    body = "\n".join(
        ("    " + line if line.strip() else line)
        for line in code.splitlines()
    )
    stub = prompt_stub.rstrip("\n")
    return f"{stub}\n{body}\n"


def runner_command() -> str:
    return os.environ.get(RUNNER_ENV_VAR, DEFAULT_RUNNER)


def runner_available(command: str | None = None) -> bool:
    return shutil.which(command or runner_command()) is not None


def _limit_resources(memory_bytes: int) -> Callable[[], None] | None:
    if sys.platform == "win32":
        return None

    def apply() -> None:
        import resource

        resource.setrlimit(resource.RLIMIT_AS, (memory_bytes, memory_bytes))

    return apply


def verify_code(
    candidate: str,
    check: CodeCheck,
    limits: CodeRunLimits = CodeRunLimits(),
    runner: str | None = None,
) -> Verdict:
    """Run the candidate program against the check function in a sandboxed
    subprocess; correct iff the runner reports a pass within limits."""
    command = runner or runner_command()
    if shutil.which(command) is None:
        raise SandboxUnavailableError(
            f"code-check runner {command!r} not found on PATH"
        )
    with tempfile.TemporaryDirectory(prefix="consis-check-") as tmp:
        cand_path = Path(tmp) / "candidate.py"
        check_path = Path(tmp) / "check.py"
        cand_path.write_text(candidate, encoding="utf-8")
        check_path.write_text(check.check_source, encoding="utf-8")
        try:
            proc = subprocess.run(
                [command, str(cand_path), str(check_path), check.entry_point],
                capture_output=True,
                text=True,
                timeout=limits.timeout_s,
                cwd=tmp,
                preexec_fn=_limit_resources(limits.memory_bytes),
            )
        except subprocess.TimeoutExpired:
            return Verdict(False, "timeout")
    if proc.returncode != 0:
        return Verdict(
            False,
            f"runner failed with exit code {proc.returncode}: {proc.stderr.strip()[:200]}",
            harness_fault=True,
        )
    line = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else ""
    try:
        result = json.loads(line)
        passed = bool(result["passed"])
        detail = f"{result.get('error_kind', 'none')}: {result.get('message', '')}".strip(": ")
    except (json.JSONDecodeError, KeyError, IndexError):
        return Verdict(False, f"unparseable runner output: {line[:200]!r}", harness_fault=True)
    return Verdict(passed, detail)


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

def verify_response(
    response: str,
    spec: QuestionSpec,
    limits: CodeRunLimits = CodeRunLimits(),
    runner: str | None = None,
) -> Verdict:
    """Route a raw response to the verifier matching the question's checker."""
    checker: Checker = spec.checker
    if isinstance(checker, NumericAnswer):
        return verify_numeric(response, checker.expected)
    if isinstance(checker, ConstraintList):
        return verify_constraints(response, checker)
    if isinstance(checker, CodeCheck):
        program = assemble_program(spec.prompt, response, checker.entry_point)
        return verify_code(program, checker, limits=limits, runner=runner)
    raise TypeError(f"unknown checker type: {type(checker)!r}")
