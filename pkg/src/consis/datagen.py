"""Hard-question candidate generation for dataset growth.

The automatic half of the dataset pipeline: render a domain prompt template
around an existing easy question, sample candidate harder variants from a
backend, parse and auto-validate them, and write bundles to a review
directory for offline human selection. Candidates are never promoted into
a dataset by this module; every bundle carries status "needs_human_review".
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from .backends import Backend, GenerationRequest
from .core import (
    CodeCheck,
    Constraint,
    ConstraintList,
    NumericAnswer,
    QuestionPair,
    QuestionSpec,
)
from .errors import DatasetError, SandboxUnavailableError
from .verifiers import (
    assemble_program,
    constraint_kwargs_valid,
    extract_final_number,
    registered_constraint_types,
    verify_code,
)

# ---------------------------------------------------------------------------
# Prompt templates
#
# Section headers double as parse delimiters for the generated candidates,
# so the exact "#Name#:" spelling is load-bearing.
# ---------------------------------------------------------------------------

CODE_TEMPLATE = """\
#Instruction#:
I want you to act as a helpful assistant. Please help me modify some programming problems and make them harder. A programming problem datum consists of three parts: #Problem#, #Answer#, and #Check Function#. The #Problem# includes the name of a python function, function signature, and docstring; the #Answer# is the specific code that fulfills the function's purpose; in addition to that, there is a #Check Function# to verify whether the answer is correct. Please follow the format of the following demonstrations, modify the original problem, and make it more challenging. To ensure that there is a strict order in difficulty between the original problem and modified one, steps to solve the original problem should be included in that of the modified problem. In other words, steps to solve the original problem is a proper subset of that of the modified problem. Except the modified #Problem#, you should also provide #Answer# and #Check Function# to the modified #Problem#.

#Demonstrations#:
{demonstrations}

The above are some demonstrations showing how to modify the original problems. Please follow their format and modify the following problem:

#Problem#:
{problem}

#Answer#:
{answer}

#Check Function#:
{check_function}

Please modified the above #Problem# and then provide #Answer# and #Check Function# to the modified #Problem#:
"""

MATH_TEMPLATE = """\
#Instruction#:
I want you to act as a helpful assistant. Please help me modify some grade school math problems and make them harder. A math problem datum consists of two parts: #Problem# and #Answer#. The #Problem# provides a background description of a real-world mathematical problem, along with the conditions known and the unknown content to be solved. There is a strict gurrantee that the unknown value can be derived through a few proper computational steps based on konwn conditions. The #Answer# encompasses several computational steps based on logical reasoning with the known conditions, culminating in the numerical value of the final answer. Please follow the format of the following demonstrations, modify the original problem and make it more challenging. To ensure that there is a strict order in difficulty between the original problem and modified one, steps to solve the original should be included in that of the modified problem. In other words, steps to solve the original problem is a proper subset of that of the modified problem. Except for the modified #Problem#, you should also provide #Answer# to the modified #Problem#.

#Demonstrations#:
{demonstrations}

The above are some demonstrations showing how to modify the original problems. Please follow their format and modify the following problem:

#Problem#:
{problem}

#Answer#:
{answer}

Please modified the above #Problem# and then provide #Answer# to the modified #Problem#:
"""

IF_TEMPLATE = """\
#Instruction#:
I want you to act as a helpful assistant. Please help me modify some instruction following problems and make them harder. An instruction following problem datum consists of three parts: #Prompt#, #Constraint Type List#, and #Constraint Kwargs#. The #Prompt# consists of several constraints that guide the model to generate text. The #Constraint Type List# and #Constraint Kwargs# include the types and keyword arguments of the constraints contained within the #Prompt#, respectively. They are utilized to verify whether the text generated by the model meets the constraints. We provide a #Candidate Constraint Set# containing a variety of constraints. Please select an appropriate constraint from this set and follow the format of the demonstrations provided to add to the original #Prompt#. By doing so, you will create a more challenging new #Prompt#. Except for the modified #Prompt#, you should also provide #Constraint Type List#, and #Constraint Kwargs# to the modified #Prompt#.

#Candidate Constraint Set#:
{candidate_constraints}

#Demonstrations#:
{demonstrations}

The above are some demonstrations showing how to modify the original problems. Please follow their format and modify the following problem:

#Prompt#:
{prompt}

#Constraint Type List#:
{constraint_types}

#Constraint Kwargs#:
{constraint_kwargs}

Please modified the above #Prompt# and then provide #Constraint Type List# and #Constraint Kwargs# to the modified #Prompt#:
"""

# Ships with the package as format references only; none of these come from
# any benchmark.
DEFAULT_DEMONSTRATIONS: dict[str, list[str]] = {
    "code": [
        """\
#Problem#:
def add(a: int, b: int) -> int:
    ''' Return the sum of two integers
    >>> add(2, 3)
    5
    '''

#Answer#:
    return a + b

#Check Function#:
def check(candidate):
    assert candidate(2, 3) == 5
    assert candidate(0, 0) == 0

Modified version:

#Problem#:
def add_scaled(a: int, b: int, factor: int) -> int:
    ''' Return the sum of two integers multiplied by a factor
    >>> add_scaled(2, 3, 2)
    10
    '''

#Answer#:
    return (a + b) * factor

#Check Function#:
def check(candidate):
    assert candidate(2, 3, 2) == 10
    assert candidate(0, 0, 5) == 0
    assert candidate(1, 1, 3) == 6""",
    ],
    "math": [
        """\
#Problem#:
Tom has 3 boxes with 4 pens in each box. How many pens does Tom have?

#Answer#:
Each box holds 4 pens and there are 3 boxes, so Tom has 3 * 4 = 12 pens. The answer is 12.

Modified version:

#Problem#:
Tom has 3 boxes with 4 pens in each box. Each pen costs 2 dollars. Tom sells all his pens and spends 5 dollars on lunch. How much money does Tom have left?

#Answer#:
Each box holds 4 pens and there are 3 boxes, so Tom has 3 * 4 = 12 pens. Selling them earns 12 * 2 = 24 dollars. After lunch he keeps 24 - 5 = 19 dollars. The answer is 19.""",
    ],
    "instruction_following": [
        """\
#Prompt#:
Describe a sunrise without using any commas.

#Constraint Type List#:
["punctuation:no_comma"]

#Constraint Kwargs#:
[{}]

Modified version:

#Prompt#:
Describe a sunrise without using any commas. Your description must be at least 4 sentences long.

#Constraint Type List#:
["punctuation:no_comma", "length_constraints:number_sentences"]

#Constraint Kwargs#:
[{}, {"relation": "at least", "num_sentences": 4}]""",
    ],
}


def build_prompt(
    domain: str,
    easy: QuestionSpec,
    demonstrations: Sequence[str],
    easy_answer: str | None = None,
) -> str:
    """Instantiate the domain's generation template around one easy datum.

    `easy_answer` is the reference answer for the easy question; for math
    it defaults to the checker's expected number, for code it must be
    given (checkers carry no reference solution).
    """
    if not demonstrations:
        raise DatasetError("at least one demonstration is required")
    demo_block = "\n\n".join(demonstrations)
    checker = easy.checker
    if domain == "code":
        if not isinstance(checker, CodeCheck):
            raise DatasetError("code generation needs a code checker on the easy datum")
        if easy_answer is None:
            raise DatasetError("code generation needs the easy datum's reference answer")
        return CODE_TEMPLATE.format(
            demonstrations=demo_block,
            problem=easy.prompt,
            answer=easy_answer,
            check_function=checker.check_source,
        )
    if domain == "math":
        if not isinstance(checker, NumericAnswer):
            raise DatasetError("math generation needs a numeric checker on the easy datum")
        return MATH_TEMPLATE.format(
            demonstrations=demo_block,
            problem=easy.prompt,
            answer=easy_answer if easy_answer is not None else checker.expected,
        )
    if domain == "instruction_following":
        if not isinstance(checker, ConstraintList):
            raise DatasetError(
                "instruction-following generation needs a constraints checker"
            )
        types = [c.type_id for c in checker.items]
        kwargs = [dict(c.kwargs) for c in checker.items]
        return IF_TEMPLATE.format(
            candidate_constraints=json.dumps(registered_constraint_types()),
            demonstrations=demo_block,
            prompt=easy.prompt,
            constraint_types=json.dumps(types),
            constraint_kwargs=json.dumps(kwargs),
        )
    raise DatasetError(f"unknown domain {domain!r}")


# ---------------------------------------------------------------------------
# Candidate parsing
# ---------------------------------------------------------------------------

_SECTION_HEADERS = (
    "#Problem#",
    "#Answer#",
    "#Check Function#",
    "#Prompt#",
    "#Constraint Type List#",
    "#Constraint Kwargs#",
)
_HEADER_RE = re.compile(
    r"^\s*(" + "|".join(re.escape(h) for h in _SECTION_HEADERS) + r")\s*:\s*$|"
    r"^\s*(" + "|".join(re.escape(h) for h in _SECTION_HEADERS) + r")\s*:\s*",
    re.MULTILINE,
)


def split_sections(text: str) -> dict[str, str]:
    """Split generated text into its last occurrence of each #Section#.

    Generators sometimes echo the original datum before the modified one;
    keeping the last occurrence picks up the modified version.
    """
    matches = list(_HEADER_RE.finditer(text))
    sections: dict[str, str] = {}
    for i, match in enumerate(matches):
        name = (match.group(1) or match.group(2)).strip()
        start = match.end()
        end = matches[i + 1].start() if i + 1 < len(matches) else len(text)
        sections[name] = text[start:end].strip()
    return sections


_DEF_RE = re.compile(r"def\s+([A-Za-z_][A-Za-z0-9_]*)\s*\(")


@dataclass
class Candidate:
    raw: str
    parsed: QuestionSpec | None = None
    parse_error: str | None = None
    answer_text: str | None = None
    auto_checks: list["RuleResult"] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        from .core import spec_to_dict

        return {
            "raw": self.raw,
            "parsed": spec_to_dict(self.parsed) if self.parsed else None,
            "parse_error": self.parse_error,
            "answer_text": self.answer_text,
            "auto_checks": [
                {"rule": r.rule, "passed": r.passed, "detail": r.detail}
                for r in self.auto_checks
            ],
        }


@dataclass(frozen=True)
class RuleResult:
    rule: str
    passed: bool
    detail: str = ""


@dataclass
class CandidateBundle:
    source_pair_id: str
    domain: str
    candidates: list[Candidate]
    status: str = "needs_human_review"

    def to_dict(self) -> dict[str, Any]:
        return {
            "source_pair_id": self.source_pair_id,
            "domain": self.domain,
            "status": self.status,
            "candidates": [c.to_dict() for c in self.candidates],
        }


def parse_candidate(raw: str, domain: str) -> Candidate:
    sections = split_sections(raw)
    if domain == "code":
        problem = sections.get("#Problem#")
        answer = sections.get("#Answer#")
        check = sections.get("#Check Function#")
        if not problem or not answer or not check:
            return Candidate(raw=raw, parse_error="missing #Problem#/#Answer#/#Check Function# section")
        name_match = _DEF_RE.search(problem) or _DEF_RE.search(answer)
        if not name_match:
            return Candidate(raw=raw, parse_error="no function definition found")
        return Candidate(
            raw=raw,
            parsed=QuestionSpec(
                prompt=problem,
                checker=CodeCheck(entry_point=name_match.group(1), check_source=check),
            ),
            answer_text=answer,
        )
    if domain == "math":
        problem = sections.get("#Problem#")
        answer = sections.get("#Answer#")
        if not problem or not answer:
            return Candidate(raw=raw, parse_error="missing #Problem#/#Answer# section")
        number = extract_final_number(answer)
        if number is None:
            return Candidate(raw=raw, parse_error="no final number in #Answer#", answer_text=answer)
        return Candidate(
            raw=raw,
            parsed=QuestionSpec(prompt=problem, checker=NumericAnswer(expected=str(number))),
            answer_text=answer,
        )
    if domain == "instruction_following":
        prompt = sections.get("#Prompt#")
        types_raw = sections.get("#Constraint Type List#")
        kwargs_raw = sections.get("#Constraint Kwargs#")
        if not prompt or not types_raw or not kwargs_raw:
            return Candidate(raw=raw, parse_error="missing #Prompt#/#Constraint ...# section")
        try:
            types = json.loads(types_raw)
            kwargs = json.loads(kwargs_raw)
            if not isinstance(types, list) or not isinstance(kwargs, list):
                raise ValueError("constraint sections must be JSON lists")
            if len(types) != len(kwargs):
                raise ValueError("type list and kwargs list differ in length")
            items = tuple(
                Constraint(type_id=str(t), kwargs=dict(k)) for t, k in zip(types, kwargs)
            )
        except (ValueError, TypeError) as exc:
            return Candidate(raw=raw, parse_error=f"bad constraint sections: {exc}")
        return Candidate(
            raw=raw,
            parsed=QuestionSpec(prompt=prompt, checker=ConstraintList(items=items)),
        )
    raise DatasetError(f"unknown domain {domain!r}")


# ---------------------------------------------------------------------------
# Generation and auto-validation
# ---------------------------------------------------------------------------

def auto_validate(candidate: Candidate, easy: QuestionSpec) -> list[RuleResult]:
    """Machine-checkable quality rules for one parsed candidate.

    Results are data: a failed rule marks the candidate for extra reviewer
    attention, nothing more.
    """
    if candidate.parsed is None:
        raise DatasetError("auto_validate requires a parsed candidate")
    checker = candidate.parsed.checker
    results: list[RuleResult] = []
    if isinstance(checker, CodeCheck):
        if candidate.answer_text is None:
            results.append(RuleResult("correctness", False, "no answer section"))
        else:
            program = assemble_program(
                candidate.parsed.prompt, candidate.answer_text, checker.entry_point
            )
            try:
                verdict = verify_code(program, checker)
                results.append(RuleResult("correctness", verdict.correct, verdict.detail))
            except SandboxUnavailableError as exc:
                results.append(RuleResult("correctness", False, str(exc)))
    elif isinstance(checker, NumericAnswer):
        ok = candidate.answer_text is not None and (
            extract_final_number(candidate.answer_text) is not None
        )
        results.append(
            RuleResult("answer_extractable", ok, "" if ok else "answer has no final number")
        )
    elif isinstance(checker, ConstraintList):
        hard_types = Counter(c.type_id for c in checker.items)
        if isinstance(easy.checker, ConstraintList):
            easy_types = Counter(c.type_id for c in easy.checker.items)
            proper = all(hard_types[t] >= n for t, n in easy_types.items()) and (
                sum(easy_types.values()) < sum(hard_types.values())
            )
        else:
            proper = False
        results.append(
            RuleResult(
                "difficulty_order", proper,
                "" if proper else "easy types are not a strict sub-multiset of hard's",
            )
        )
        kwargs_ok = all(constraint_kwargs_valid(c) for c in checker.items)
        results.append(
            RuleResult(
                "kwargs_valid", kwargs_ok,
                "" if kwargs_ok else "unknown type or missing required kwargs",
            )
        )
    return results


def generate_candidates(
    pair: QuestionPair,
    backend: Backend,
    n: int = 3,
    demonstrations: Sequence[str] | None = None,
    easy_answer: str | None = None,
    request: GenerationRequest | None = None,
) -> CandidateBundle:
    """Sample n harder variants of the pair's easy question and auto-check them."""
    if n < 1:
        raise DatasetError("n must be >= 1")
    demos = list(demonstrations) if demonstrations else DEFAULT_DEMONSTRATIONS[pair.domain]
    prompt = build_prompt(pair.domain, pair.easy, demos, easy_answer=easy_answer)
    req = request or GenerationRequest(prompt=prompt)
    candidates: list[Candidate] = []
    for i in range(n):
        raw = backend.generate(
            prompt, pair_id=pair.id, side="easy", draw_index=i, request=req
        )
        candidate = parse_candidate(raw, pair.domain)
        if candidate.parsed is not None:
            candidate.auto_checks = auto_validate(candidate, pair.easy)
        candidates.append(candidate)
    return CandidateBundle(
        source_pair_id=pair.id, domain=pair.domain, candidates=candidates
    )


def write_bundle(bundle: CandidateBundle, review_dir: str | Path) -> Path:
    """Write one bundle to the review directory as {source_pair_id}.candidates.json."""
    review_dir = Path(review_dir)
    review_dir.mkdir(parents=True, exist_ok=True)
    path = review_dir / f"{bundle.source_pair_id}.candidates.json"
    path.write_text(
        json.dumps(bundle.to_dict(), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
    return path
