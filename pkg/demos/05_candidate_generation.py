"""Growing a pairwise dataset: prompt a generator for harder variants.

An easy question is wrapped in a domain template, a backend samples
candidate harder versions, and each parseable candidate gets machine
checks (difficulty order, self-consistency). Nothing is promoted
automatically: bundles land in a review directory for a human to pick
from. Here a scripted stand-in plays the generator so the demo runs
offline.

    python demos/05_candidate_generation.py
"""

import tempfile

from consis.core import NumericAnswer, QuestionPair, QuestionSpec
from consis.datagen import (
    DEFAULT_DEMONSTRATIONS,
    build_prompt,
    generate_candidates,
    write_bundle,
)

easy = QuestionSpec(
    prompt="A crate holds 6 boxes. Each box holds 8 candles. How many candles are in the crate?",
    checker=NumericAnswer("48"),
)
pair = QuestionPair(id="m-001", domain="math", easy=easy, hard=easy)

prompt = build_prompt("math", easy, DEFAULT_DEMONSTRATIONS["math"])
print("generation prompt (first 12 lines):")
for line in prompt.splitlines()[:12]:
    print("  " + line)
print("  ...")


class ScriptedGenerator:
    """Plays the role of a strong generator model."""

    backend_id = "scripted"
    RESPONSES = [
        "#Problem#:\n"
        "A crate holds 6 boxes. Each box holds 8 candles. Candles sell for 3 "
        "dollars each and the seller pays 20 dollars in fees. How many dollars "
        "does the seller keep after selling one full crate?\n\n"
        "#Answer#:\n"
        "One crate holds 6 * 8 = 48 candles. Selling them earns 48 * 3 = 144 "
        "dollars. After fees the seller keeps 144 - 20 = 124 dollars. The "
        "answer is 124.",
        "free-form rambling that ignores the requested sections entirely",
    ]

    def __init__(self):
        self.calls = 0

    def generate(self, prompt, *, pair_id, side, draw_index, request):
        response = self.RESPONSES[self.calls % len(self.RESPONSES)]
        self.calls += 1
        return response


bundle = generate_candidates(pair, ScriptedGenerator(), n=2)
print(f"\nbundle for {bundle.source_pair_id}: {len(bundle.candidates)} candidates, "
      f"status {bundle.status!r}")
for i, candidate in enumerate(bundle.candidates):
    if candidate.parsed is None:
        print(f"  #{i}: unparseable ({candidate.parse_error})")
        continue
    checks = ", ".join(f"{r.rule}={'pass' if r.passed else 'FAIL'}"
                       for r in candidate.auto_checks)
    print(f"  #{i}: expected answer {candidate.parsed.checker.expected!r}; {checks}")

with tempfile.TemporaryDirectory() as tmp:
    path = write_bundle(bundle, tmp)
    print(f"\nbundle written for offline review: {path.name}")
