"""Single-shot check execution with a one-line JSON verdict on stdout.

The caller spawns one fresh interpreter per check, so nothing a hostile
candidate does can corrupt the calling process. Candidate and check code
run with their stdout redirected to stderr, keeping the JSON protocol line
the only thing on stdout. The process chdirs into its own temp directory
before executing anything and enforces no internal timeout: wall-clock and
memory limits are the caller's job.

Exit code 0 means a determinate verdict was printed (pass or fail alike);
nonzero means the runner itself failed.
"""

from __future__ import annotations

import contextlib
import json
import os
import sys
import tempfile
from dataclasses import dataclass

ERROR_NONE = "none"
ERROR_ASSERTION = "assertion"
ERROR_EXCEPTION = "exception"
ERROR_TIMEOUT = "timeout_internal"  # reserved; no internal timeout is enforced


@dataclass(frozen=True)
class RunnerResult:
    passed: bool
    error_kind: str
    message: str

    def to_json(self) -> str:
        return json.dumps(
            {"passed": self.passed, "error_kind": self.error_kind, "message": self.message}
        )


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def run_check(candidate_path: str, check_path: str, entry_point: str) -> RunnerResult:
    """Define the candidate, load the check source, call check(candidate).

    Never raises: every failure mode is folded into the result.
    """
    try:
        candidate_source = _read(candidate_path)
        check_source = _read(check_path)
    except OSError as exc:
        return RunnerResult(False, ERROR_EXCEPTION, f"unreadable input: {exc}")

    candidate_ns: dict = {}
    check_ns: dict = {}
    with contextlib.redirect_stdout(sys.stderr):
        try:
            exec(compile(candidate_source, candidate_path, "exec"), candidate_ns)
        except BaseException as exc:
            return RunnerResult(False, ERROR_EXCEPTION, f"candidate failed to load: {exc!r}")
        fn = candidate_ns.get(entry_point)
        if not callable(fn):
            return RunnerResult(
                False, ERROR_EXCEPTION, f"candidate does not define {entry_point}()"
            )
        try:
            exec(compile(check_source, check_path, "exec"), check_ns)
        except BaseException as exc:
            return RunnerResult(False, ERROR_EXCEPTION, f"check failed to load: {exc!r}")
        check = check_ns.get("check")
        if not callable(check):
            return RunnerResult(
                False, ERROR_EXCEPTION, "check source does not define check(candidate)"
            )
        try:
            check(fn)
        except AssertionError as exc:
            return RunnerResult(False, ERROR_ASSERTION, str(exc) or "assertion failed")
        except BaseException as exc:
            return RunnerResult(False, ERROR_EXCEPTION, repr(exc))
    return RunnerResult(True, ERROR_NONE, "")


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 3:
        print("usage: sandbox-runner <candidate_file> <check_file> <entry_point>", file=sys.stderr)
        return 2
    candidate_path, check_path, entry_point = (os.path.abspath(argv[0]),
                                               os.path.abspath(argv[1]),
                                               argv[2])
    try:
        with tempfile.TemporaryDirectory(prefix="runner-") as tmp:
            os.chdir(tmp)
            result = run_check(candidate_path, check_path, entry_point)
        sys.stdout.write(result.to_json() + "\n")
        sys.stdout.flush()
        return 0
    except Exception as exc:  # runner failure, not a verdict
        print(f"runner error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
