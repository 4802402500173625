import json

import pytest

from consis.core import CodeCheck, Constraint, ConstraintList, NumericAnswer, QuestionPair, QuestionSpec
from consis.datagen import (
    DEFAULT_DEMONSTRATIONS,
    CandidateBundle,
    auto_validate,
    build_prompt,
    generate_candidates,
    parse_candidate,
    split_sections,
    write_bundle,
)
from consis.errors import DatasetError
from consis.verifiers import runner_available

from conftest import if_pair

needs_runner = pytest.mark.skipif(
    not runner_available(), reason="code-check runner not on PATH"
)

STRLEN_EASY = QuestionSpec(
    prompt=(
        "def strlen(string: str) -> int:\n"
        "    ''' Return length of given string\n"
        "    >>> strlen('')\n    0\n    >>> strlen('abc')\n    3\n    '''"
    ),
    checker=CodeCheck(
        entry_point="strlen",
        check_source=(
            "def check(candidate):\n"
            "    assert candidate('') == 0\n"
            "    assert candidate('x') == 1\n"
            "    assert candidate('asdasnakj') == 9"
        ),
    ),
)

STRLEN_ADD_CANDIDATE = """\
#Problem#:
def strlen_add(string1: str, string2: str) -> str:
    ''' Return length sum of two given strings
    >>> strlen_add('abc', 'd')
    4
    '''

#Answer#:
    return len(string1 + string2)

#Check Function#:
def check(candidate):
    assert candidate('abc', 'd') == 4
    assert candidate('', 'z') == 1
    assert candidate('x', 'y') == 2
    assert candidate('hello', '!') == 6
"""


class ScriptedBackend:
    backend_id = "scripted"

    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = 0

    def generate(self, prompt, *, pair_id, side, draw_index, request):
        response = self.responses[self.calls % len(self.responses)]
        self.calls += 1
        return response


class TestBuildPrompt:
    def test_code_template_has_check_function_header(self):
        text = build_prompt("code", STRLEN_EASY, DEFAULT_DEMONSTRATIONS["code"],
                            easy_answer="    return len(string)")
        assert "#Check Function#:" in text
        assert STRLEN_EASY.prompt in text
        assert "    return len(string)" in text

    def test_math_template_answer_header_count(self):
        easy = QuestionSpec(prompt="How many pens?", checker=NumericAnswer("12"))
        demo = "#Problem#:\nA toy problem.\n\n#Answer#:\nThe answer is 3."
        text = build_prompt("math", easy, [demo])
        # one header from the single demonstration plus one for the target datum
        assert text.count("#Answer#:") == 2

    def test_instantiation_is_byte_stable(self):
        easy = QuestionSpec(prompt="How many pens?", checker=NumericAnswer("12"))
        first = build_prompt("math", easy, DEFAULT_DEMONSTRATIONS["math"])
        second = build_prompt("math", easy, DEFAULT_DEMONSTRATIONS["math"])
        assert first == second

    def test_if_template_carries_constraints(self):
        pair = if_pair()
        text = build_prompt("instruction_following", pair.easy,
                            DEFAULT_DEMONSTRATIONS["instruction_following"])
        assert "#Constraint Type List#:" in text
        assert '"punctuation:no_comma"' in text
        assert "#Candidate Constraint Set#:" in text

    def test_empty_demonstrations_rejected(self):
        with pytest.raises(DatasetError):
            build_prompt("math", QuestionSpec("p", NumericAnswer("1")), [])

    def test_code_without_answer_rejected(self):
        with pytest.raises(DatasetError):
            build_prompt("code", STRLEN_EASY, DEFAULT_DEMONSTRATIONS["code"])

    def test_wrong_checker_for_domain_rejected(self):
        with pytest.raises(DatasetError):
            build_prompt("math", STRLEN_EASY, DEFAULT_DEMONSTRATIONS["math"])


class TestParseCandidate:
    def test_code_candidate_round_trip(self):
        candidate = parse_candidate(STRLEN_ADD_CANDIDATE, "code")
        assert candidate.parse_error is None
        assert isinstance(candidate.parsed.checker, CodeCheck)
        assert candidate.parsed.checker.entry_point == "strlen_add"
        assert "assert candidate('abc', 'd') == 4" in candidate.parsed.checker.check_source
        assert candidate.answer_text == "return len(string1 + string2)"

    def test_missing_answer_section_flags_parse_failure(self):
        raw = "#Problem#:\ndef f(x):\n    pass\n\n#Check Function#:\ndef check(c): pass"
        candidate = parse_candidate(raw, "code")
        assert candidate.parsed is None
        assert "Answer" in candidate.parse_error

    def test_math_candidate(self):
        raw = "#Problem#:\nHow many windows?\n\n#Answer#:\n2 houses times 6 windows is 12. The answer is 12."
        candidate = parse_candidate(raw, "math")
        assert candidate.parsed.checker == NumericAnswer("12")

    def test_math_without_number_flags(self):
        raw = "#Problem#:\nHow many?\n\n#Answer#:\nno idea"
        assert parse_candidate(raw, "math").parsed is None

    def test_if_candidate(self):
        raw = (
            "#Prompt#:\nWrite a riddle with no commas and at least 6 sentences.\n"
            "#Constraint Type List#:\n"
            '["punctuation:no_comma", "length_constraints:number_sentences"]\n'
            "#Constraint Kwargs#:\n"
            '[{}, {"relation": "at least", "num_sentences": 6}]'
        )
        candidate = parse_candidate(raw, "instruction_following")
        checker = candidate.parsed.checker
        assert isinstance(checker, ConstraintList)
        assert [c.type_id for c in checker.items] == [
            "punctuation:no_comma",
            "length_constraints:number_sentences",
        ]

    def test_if_mismatched_lists_flag(self):
        raw = (
            "#Prompt#:\np\n#Constraint Type List#:\n[\"punctuation:no_comma\"]\n"
            "#Constraint Kwargs#:\n[{}, {}]"
        )
        assert parse_candidate(raw, "instruction_following").parsed is None

    def test_split_sections_keeps_last_occurrence(self):
        text = "#Answer#:\nold\n\n#Answer#:\nnew"
        assert split_sections(text)["#Answer#"] == "new"


class TestAutoValidate:
    def test_if_equal_lists_fail_order_rule(self):
        pair = if_pair()
        raw = (
            "#Prompt#:\nsame as easy\n"
            "#Constraint Type List#:\n[\"punctuation:no_comma\"]\n"
            "#Constraint Kwargs#:\n[{}]"
        )
        candidate = parse_candidate(raw, "instruction_following")
        results = {r.rule: r.passed for r in auto_validate(candidate, pair.easy)}
        assert results["difficulty_order"] is False
        assert results["kwargs_valid"] is True

    def test_if_proper_extension_passes(self):
        pair = if_pair()
        raw = (
            "#Prompt#:\nharder\n"
            "#Constraint Type List#:\n"
            '["punctuation:no_comma", "length_constraints:number_sentences"]\n'
            "#Constraint Kwargs#:\n"
            '[{}, {"relation": "at least", "num_sentences": 6}]'
        )
        candidate = parse_candidate(raw, "instruction_following")
        results = {r.rule: r.passed for r in auto_validate(candidate, pair.easy)}
        assert results == {"difficulty_order": True, "kwargs_valid": True}

    def test_math_extractable_number(self):
        raw = "#Problem#:\nHow many?\n\n#Answer#:\nThe answer is 42."
        candidate = parse_candidate(raw, "math")
        results = auto_validate(candidate, QuestionSpec("p", NumericAnswer("7")))
        assert results[0].rule == "answer_extractable" and results[0].passed

    def test_unparsed_candidate_rejected(self):
        candidate = parse_candidate("no sections at all", "math")
        with pytest.raises(DatasetError):
            auto_validate(candidate, QuestionSpec("p", NumericAnswer("7")))

    @needs_runner
    def test_code_self_check_passes_for_consistent_candidate(self):
        candidate = parse_candidate(STRLEN_ADD_CANDIDATE, "code")
        results = {r.rule: r.passed for r in auto_validate(candidate, STRLEN_EASY)}
        assert results["correctness"] is True

    @needs_runner
    def test_code_self_check_fails_for_inconsistent_candidate(self):
        broken = STRLEN_ADD_CANDIDATE.replace(
            "return len(string1 + string2)", "return 0"
        )
        candidate = parse_candidate(broken, "code")
        results = {r.rule: r.passed for r in auto_validate(candidate, STRLEN_EASY)}
        assert results["correctness"] is False


class TestGenerateCandidates:
    def test_bundle_of_three(self):
        backend = ScriptedBackend([STRLEN_ADD_CANDIDATE])
        pair = QuestionPair(id="c-001", domain="code", easy=STRLEN_EASY, hard=STRLEN_EASY)
        bundle = generate_candidates(
            pair, backend, n=3, easy_answer="    return len(string)"
        )
        assert backend.calls == 3
        assert len(bundle.candidates) == 3
        assert bundle.status == "needs_human_review"

    def test_unparseable_candidate_kept_raw(self):
        backend = ScriptedBackend(["free-form rambling with no sections"])
        pair = QuestionPair(id="m-009", domain="math",
                            easy=QuestionSpec("How many?", NumericAnswer("4")),
                            hard=QuestionSpec("How many now?", NumericAnswer("8")))
        bundle = generate_candidates(pair, backend, n=2)
        assert len(bundle.candidates) == 2
        assert all(c.parsed is None for c in bundle.candidates)
        assert all(c.parse_error for c in bundle.candidates)

    def test_bundle_round_trips_to_json(self, tmp_path):
        backend = ScriptedBackend([STRLEN_ADD_CANDIDATE])
        pair = QuestionPair(id="c-002", domain="code", easy=STRLEN_EASY, hard=STRLEN_EASY)
        bundle = generate_candidates(pair, backend, n=1,
                                     easy_answer="    return len(string)")
        path = write_bundle(bundle, tmp_path / "review")
        assert path.name == "c-002.candidates.json"
        reloaded = json.loads(path.read_text())
        assert reloaded["source_pair_id"] == "c-002"
        assert reloaded["status"] == "needs_human_review"
        assert reloaded["candidates"][0]["parsed"]["checker"]["kind"] == "code"

    def test_invalid_n(self):
        with pytest.raises(DatasetError):
            generate_candidates(if_pair(), ScriptedBackend(["x"]), n=0)
