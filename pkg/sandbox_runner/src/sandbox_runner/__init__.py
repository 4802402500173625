from .runner import RunnerResult, main, run_check

__all__ = ["RunnerResult", "main", "run_check"]
