"""Protocol tests: spawn the CLI, expect exactly one JSON line on stdout."""

import json
import subprocess
import sys

import pytest

from sandbox_runner.runner import run_check

STRLEN_CANDIDATE = "def strlen(string):\n    return len(string)\n"
STRLEN_CHECK = (
    "def check(candidate):\n"
    "    assert candidate('') == 0\n"
    "    assert candidate('x') == 1\n"
    "    assert candidate('asdasnakj') == 9\n"
)


def write(tmp_path, name, content):
    path = tmp_path / name
    path.write_text(content, encoding="utf-8")
    return str(path)


def spawn(*args):
    return subprocess.run(
        [sys.executable, "-m", "sandbox_runner.runner", *args],
        capture_output=True,
        text=True,
        timeout=30,
    )


class TestRunCheck:
    def test_passing_candidate(self, tmp_path):
        result = run_check(
            write(tmp_path, "cand.py", STRLEN_CANDIDATE),
            write(tmp_path, "check.py", STRLEN_CHECK),
            "strlen",
        )
        assert result.passed
        assert result.error_kind == "none"

    def test_assertion_failure(self, tmp_path):
        result = run_check(
            write(tmp_path, "cand.py", "def strlen(s):\n    return 0\n"),
            write(tmp_path, "check.py", STRLEN_CHECK),
            "strlen",
        )
        assert not result.passed
        assert result.error_kind == "assertion"

    def test_raising_candidate(self, tmp_path):
        result = run_check(
            write(tmp_path, "cand.py", "def strlen(s):\n    raise RuntimeError('boom')\n"),
            write(tmp_path, "check.py", STRLEN_CHECK),
            "strlen",
        )
        assert not result.passed
        assert result.error_kind == "exception"
        assert "boom" in result.message

    def test_syntax_error_in_candidate(self, tmp_path):
        result = run_check(
            write(tmp_path, "cand.py", "def strlen(s:\n"),
            write(tmp_path, "check.py", STRLEN_CHECK),
            "strlen",
        )
        assert not result.passed
        assert result.error_kind == "exception"

    def test_missing_entry_point(self, tmp_path):
        result = run_check(
            write(tmp_path, "cand.py", "def other(s):\n    return 0\n"),
            write(tmp_path, "check.py", STRLEN_CHECK),
            "strlen",
        )
        assert not result.passed
        assert "strlen" in result.message

    def test_check_without_check_function(self, tmp_path):
        result = run_check(
            write(tmp_path, "cand.py", STRLEN_CANDIDATE),
            write(tmp_path, "check.py", "x = 1\n"),
            "strlen",
        )
        assert not result.passed
        assert result.error_kind == "exception"

    def test_unreadable_input(self, tmp_path):
        result = run_check(str(tmp_path / "missing.py"),
                           write(tmp_path, "check.py", STRLEN_CHECK), "strlen")
        assert not result.passed
        assert result.error_kind == "exception"

    def test_passed_implies_no_error_kind(self, tmp_path):
        result = run_check(
            write(tmp_path, "cand.py", STRLEN_CANDIDATE),
            write(tmp_path, "check.py", STRLEN_CHECK),
            "strlen",
        )
        assert result.passed and result.error_kind == "none"


class TestProcessProtocol:
    def test_single_json_line_on_pass(self, tmp_path):
        proc = spawn(
            write(tmp_path, "cand.py", STRLEN_CANDIDATE),
            write(tmp_path, "check.py", STRLEN_CHECK),
            "strlen",
        )
        assert proc.returncode == 0
        lines = proc.stdout.strip().splitlines()
        assert len(lines) == 1
        verdict = json.loads(lines[0])
        assert verdict == {"passed": True, "error_kind": "none", "message": ""}

    def test_failure_is_still_exit_zero(self, tmp_path):
        proc = spawn(
            write(tmp_path, "cand.py", "def strlen(s):\n    return 0\n"),
            write(tmp_path, "check.py", STRLEN_CHECK),
            "strlen",
        )
        assert proc.returncode == 0
        verdict = json.loads(proc.stdout.strip())
        assert verdict["passed"] is False
        assert verdict["error_kind"] == "assertion"

    def test_candidate_prints_go_to_stderr(self, tmp_path):
        noisy = "def strlen(s):\n    print('noise')\n    return len(s)\n"
        proc = spawn(
            write(tmp_path, "cand.py", noisy),
            write(tmp_path, "check.py", STRLEN_CHECK),
            "strlen",
        )
        assert proc.returncode == 0
        lines = proc.stdout.strip().splitlines()
        assert len(lines) == 1
        assert json.loads(lines[0])["passed"] is True
        assert "noise" in proc.stderr

    def test_bad_usage_is_nonzero(self):
        proc = spawn("only-one-arg")
        assert proc.returncode != 0
        assert proc.stdout == ""

    @pytest.mark.parametrize("entry", ["strlen"])
    def test_console_script_available(self, tmp_path, entry):
        import shutil

        if shutil.which("sandbox-runner") is None:
            pytest.skip("console script not installed")
        proc = subprocess.run(
            [
                "sandbox-runner",
                write(tmp_path, "cand.py", STRLEN_CANDIDATE),
                write(tmp_path, "check.py", STRLEN_CHECK),
                entry,
            ],
            capture_output=True,
            text=True,
            timeout=30,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout.strip())["passed"] is True
