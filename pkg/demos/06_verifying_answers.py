"""What counts as a correct answer, for each of the three checker kinds.

Math answers are judged by their final numeric literal under exact decimal
comparison; instruction-following answers by rule-based constraints; code
answers by running the check function against the candidate in an isolated
subprocess (skipped here if the runner is not installed).

    python demos/06_verifying_answers.py
"""

from consis.core import CodeCheck, Constraint
from consis.verifiers import (
    assemble_program,
    runner_available,
    verify_code,
    verify_constraints,
    verify_numeric,
)

print("numeric answers (final literal, exact decimals):")
cases = [
    ("George has 490 fruits in total.", "490"),
    ("the total is $1,555.", "1555"),
    ("maybe 12, or 15... no: 18.", "18"),
    ("each painter put in 47.25 hours", "47.3"),
    ("I cannot solve this.", "5"),
]
for response, expected in cases:
    verdict = verify_numeric(response, expected)
    mark = "correct  " if verdict.correct else "incorrect"
    print(f"  {mark} expected {expected:>6}: {response!r} ({verdict.detail})")

print("\nconstraint lists (all rules must pass):")
rules = [
    Constraint("punctuation:no_comma"),
    Constraint("length_constraints:number_sentences",
               {"relation": "at least", "num_sentences": 3}),
]
texts = [
    "The tide comes in. The gulls argue. The boats wait.",
    "The tide comes in, slowly. The gulls argue. The boats wait.",
    "The tide comes in.",
]
for text in texts:
    verdict = verify_constraints(text, rules)
    mark = "correct  " if verdict.correct else "incorrect"
    print(f"  {mark} {text!r} ({verdict.detail})")

print("\ncode answers (sandboxed check function):")
if not runner_available():
    print("  sandbox-runner not on PATH; install it with: pip install -e ./sandbox_runner")
else:
    prompt = (
        "def strlen(string: str) -> int:\n"
        "    ''' Return length of given string '''\n"
    )
    check = CodeCheck(
        entry_point="strlen",
        check_source=(
            "def check(candidate):\n"
            "    assert candidate('') == 0\n"
            "    assert candidate('abc') == 3\n"
        ),
    )
    for body in ("return len(string)", "return 42"):
        program = assemble_program(prompt, body, "strlen")
        verdict = verify_code(program, check)
        mark = "correct  " if verdict.correct else "incorrect"
        print(f"  {mark} {body!r} ({verdict.detail})")
