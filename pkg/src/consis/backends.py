"""Answer generators: a chat-completions HTTP client and a seeded
Bernoulli simulator with known true probabilities.

The simulator is the verification oracle for the whole pipeline: it draws
success or failure deterministically from (seed, pair_id, side, draw_index)
via a counter-based hash, then emits a canonical correct or wrong answer so
the ordinary verifiers produce the intended verdict. Because each draw is
keyed rather than pulled from a shared sequential generator, results are
reproducible under any concurrency schedule.
"""

from __future__ import annotations

import hashlib
import os
import threading
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterable, Protocol

import numpy as np
import requests

from .core import (
    Constraint,
    ConstraintList,
    NumericAnswer,
    QuestionPair,
    QuestionSpec,
)
from .errors import (
    ConfigurationError,
    DatasetError,
    GenerationTimeout,
    ProtocolError,
    TransportError,
)

API_KEY_ENV_VAR = "CONSIS_API_KEY"


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    temperature: float = 0.7
    top_p: float = 0.95
    max_tokens: int = 1024

    def __post_init__(self):
        if self.temperature < 0:
            raise ConfigurationError("temperature must be >= 0")
        if not 0 < self.top_p <= 1:
            raise ConfigurationError("top_p must lie in (0, 1]")
        if self.max_tokens < 1:
            raise ConfigurationError("max_tokens must be >= 1")


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    model: str
    api_key: str | None = None  # falls back to the CONSIS_API_KEY env var
    timeout_s: float = 120.0


class Backend(Protocol):
    """Anything able to produce one answer per (pair, side, draw_index)."""

    backend_id: str

    def generate(
        self, prompt: str, *, pair_id: str, side: str, draw_index: int,
        request: GenerationRequest,
    ) -> str: ...


# ---------------------------------------------------------------------------
# HTTP backend
# ---------------------------------------------------------------------------

def http_generate(req: GenerationRequest, endpoint: EndpointConfig) -> str:
    """POST one chat-completions request and return the first choice's text.

    The prompt is transmitted byte-for-byte as a single user turn. The API
    key is resolved before any network activity so a missing key fails fast.
    """
    api_key = endpoint.api_key or os.environ.get(API_KEY_ENV_VAR)
    if not api_key:
        raise ConfigurationError(
            f"no API key: set {API_KEY_ENV_VAR} or pass api_key in the endpoint config"
        )
    url = endpoint.base_url.rstrip("/") + "/chat/completions"
    payload = {
        "model": endpoint.model,
        "messages": [{"role": "user", "content": req.prompt}],
        "temperature": req.temperature,
        "top_p": req.top_p,
        "max_tokens": req.max_tokens,
    }
    headers = {
        "Content-Type": "application/json",
        "Authorization": f"Bearer {api_key}",
    }
    try:
        response = requests.post(url, json=payload, headers=headers, timeout=endpoint.timeout_s)
    except requests.Timeout as exc:
        raise GenerationTimeout(f"no response within {endpoint.timeout_s}s") from exc
    except requests.RequestException as exc:
        raise TransportError(0, str(exc)) from exc
    if not 200 <= response.status_code < 300:
        raise TransportError(response.status_code, response.text[:500])
    try:
        body = response.json()
        return body["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise ProtocolError(f"malformed chat-completions body: {exc}") from exc


class HttpBackend:
    """Backend over any chat-completions-compatible endpoint."""

    def __init__(self, endpoint: EndpointConfig, backend_id: str | None = None):
        self.endpoint = endpoint
        self.backend_id = backend_id or endpoint.model

    def generate(
        self, prompt: str, *, pair_id: str, side: str, draw_index: int,
        request: GenerationRequest,
    ) -> str:
        req = GenerationRequest(
            prompt=prompt,
            temperature=request.temperature,
            top_p=request.top_p,
            max_tokens=request.max_tokens,
        )
        return http_generate(req, self.endpoint)


# ---------------------------------------------------------------------------
# Simulated ground-truth backend
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SideTruth:
    true_p: float
    correct_response: str
    wrong_response: str

    def __post_init__(self):
        if not 0.0 <= self.true_p <= 1.0:
            raise DatasetError(f"true probability {self.true_p} outside [0, 1]")


@dataclass
class GroundTruthModel:
    """Known per-pair success probabilities plus canonical answer texts."""

    seed: int
    truths: dict[str, dict[str, SideTruth]] = field(default_factory=dict)

    def add(self, pair_id: str, side: str, truth: SideTruth) -> None:
        self.truths.setdefault(pair_id, {})[side] = truth

    def truth(self, pair_id: str, side: str) -> SideTruth:
        try:
            return self.truths[pair_id][side]
        except KeyError:
            raise DatasetError(f"unknown pair/side ({pair_id!r}, {side!r}) in ground-truth model")

    def true_vector(self, pairs: Iterable[QuestionPair]) -> list[tuple[float, float]]:
        return [
            (self.truth(p.id, "easy").true_p, self.truth(p.id, "hard").true_p)
            for p in pairs
        ]


def _uniform_draw(seed: int, pair_id: str, side: str, draw_index: int) -> float:
    key = f"{seed}|{pair_id}|{side}|{draw_index}".encode()
    digest = hashlib.sha256(key).digest()
    return int.from_bytes(digest[:8], "big") / 2**64


def simulated_outcome(
    model: GroundTruthModel, pair_id: str, side: str, draw_index: int
) -> bool:
    """The Bernoulli draw behind `simulated_generate`, as a bare boolean."""
    truth = model.truth(pair_id, side)
    return _uniform_draw(model.seed, pair_id, side, draw_index) < truth.true_p


def simulated_generate(
    model: GroundTruthModel, pair_id: str, side: str, draw_index: int
) -> str:
    """Emit the canonical correct answer with probability true_p, else the
    canonical wrong one; a pure function of (seed, pair_id, side, draw_index)."""
    truth = model.truth(pair_id, side)
    if simulated_outcome(model, pair_id, side, draw_index):
        return truth.correct_response
    return truth.wrong_response


class SimulatedBackend:
    backend_id = "sim"

    def __init__(self, model: GroundTruthModel):
        self.model = model
        self._calls = 0
        self._lock = threading.Lock()

    @property
    def call_count(self) -> int:
        return self._calls

    def generate(
        self, prompt: str, *, pair_id: str, side: str, draw_index: int,
        request: GenerationRequest,
    ) -> str:
        with self._lock:
            self._calls += 1
        return simulated_generate(self.model, pair_id, side, draw_index)


# ---------------------------------------------------------------------------
# Canonical answers for trivially-verifiable checkers
# ---------------------------------------------------------------------------

def canonical_answers(spec: QuestionSpec) -> tuple[str, str]:
    """Build (correct, wrong) response texts for a question's checker.

    Supported for numeric checkers and for constraint lists made of
    built-in rules; code checkers carry no reference solution, so callers
    must supply answers explicitly.
    """
    checker = spec.checker
    if isinstance(checker, NumericAnswer):
        right = Decimal(checker.expected)
        return (
            f"The final answer is {checker.expected}.",
            f"The final answer is {right + 1}.",
        )
    if isinstance(checker, ConstraintList):
        return (
            _satisfying_text(checker.items),
            _violating_text(checker.items),
        )
    raise DatasetError(
        f"cannot derive canonical answers for checker kind {checker.kind!r}"
    )


def _satisfying_text(items: tuple[Constraint, ...]) -> str:
    sentences: list[str] = []
    min_sentences = 1
    max_sentences: int | None = None
    for item in items:
        if item.type_id == "length_constraints:number_sentences":
            n = int(item.kwargs["num_sentences"])
            if item.kwargs["relation"] == "at least":
                min_sentences = max(min_sentences, n)
            else:
                max_sentences = n if max_sentences is None else min(max_sentences, n)
        elif item.type_id == "keywords:existence":
            for kw in item.kwargs["keywords"]:
                sentences.append(f"Here is the word {kw} as requested.")
        elif item.type_id != "punctuation:no_comma":
            raise DatasetError(f"no canonical answer rule for constraint {item.type_id!r}")
    while len(sentences) < min_sentences:
        sentences.append("All good things take time.")
    if max_sentences is not None and len(sentences) > max_sentences:
        raise DatasetError("constraint list is unsatisfiable by the canonical builder")
    return " ".join(sentences)


def _violating_text(items: tuple[Constraint, ...]) -> str:
    # Violating the first constraint is enough; correctness needs all to pass.
    first = items[0]
    if first.type_id == "punctuation:no_comma":
        return "Well, this answer starts with a comma splice, sadly."
    if first.type_id == "length_constraints:number_sentences":
        n = int(first.kwargs["num_sentences"])
        if first.kwargs["relation"] == "at least":
            return " ".join("Too short." for _ in range(max(0, n - 1)))
        return " ".join("One more sentence." for _ in range(n + 1))
    if first.type_id == "keywords:existence":
        return "This text avoids every requested term entirely."
    raise DatasetError(f"no violation rule for constraint {first.type_id!r}")


def ground_truth_for_pairs(
    pairs: Iterable[QuestionPair],
    probabilities: dict[str, tuple[float, float]],
    seed: int,
    answers: dict[str, dict[str, tuple[str, str]]] | None = None,
) -> GroundTruthModel:
    """Attach known probabilities (pair_id -> (p_easy, p_hard)) to a dataset.

    `answers` optionally overrides (correct, wrong) texts per pair/side,
    which is required for code checkers.
    """
    model = GroundTruthModel(seed=seed)
    answers = answers or {}
    for pair in pairs:
        try:
            p_easy, p_hard = probabilities[pair.id]
        except KeyError:
            raise DatasetError(f"no probabilities given for pair {pair.id!r}")
        for side, spec, p in (("easy", pair.easy, p_easy), ("hard", pair.hard, p_hard)):
            override = answers.get(pair.id, {}).get(side)
            correct, wrong = override if override else canonical_answers(spec)
            model.add(pair.id, side, SideTruth(p, correct, wrong))
    return model


# ---------------------------------------------------------------------------
# Synthetic populations
# ---------------------------------------------------------------------------

# A distribution spec is either a float (point mass) or a (alpha, beta)
# tuple of Beta shape parameters.
DistSpec = float | tuple[float, float]


def _sample_dist(rng: np.random.Generator, dist: DistSpec) -> float:
    if isinstance(dist, (int, float)):
        p = float(dist)
        if not 0.0 <= p <= 1.0:
            raise DatasetError(f"point-mass probability {p} outside [0, 1]")
        return p
    alpha, beta = dist
    if alpha <= 0 or beta <= 0:
        raise DatasetError(f"Beta shape parameters must be positive, got {dist}")
    return float(rng.beta(alpha, beta))


def synth_population(
    n_pairs: int,
    easy_dist: DistSpec,
    hard_dist: DistSpec,
    seed: int,
    ordered: bool = False,
) -> tuple[list[QuestionPair], GroundTruthModel]:
    """Draw a population of trivially-verifiable pairs with known truth.

    Each pair gets an echo-style numeric question per side, success
    probabilities drawn from the given distributions, and a round-robin
    domain label so multi-domain reports can be exercised. In ordered mode,
    draws with p_easy < p_hard are rejected, modeling the guaranteed
    difficulty order of a curated dataset.
    """
    if n_pairs < 1:
        raise DatasetError("n_pairs must be >= 1")
    rng = np.random.default_rng(seed)
    domains = ("math", "code", "instruction_following")
    pairs: list[QuestionPair] = []
    model = GroundTruthModel(seed=seed)
    for i in range(n_pairs):
        while True:
            p_easy = _sample_dist(rng, easy_dist)
            p_hard = _sample_dist(rng, hard_dist)
            if not ordered or p_easy >= p_hard:
                break
        pair_id = f"synth-{i:04d}"
        easy_expected = str(1000 + 2 * i)
        hard_expected = str(9000 + 2 * i + 1)
        pair = QuestionPair(
            id=pair_id,
            domain=domains[i % 3],
            easy=QuestionSpec(
                prompt=f"Item {i}: reply with the number {easy_expected} and nothing else.",
                checker=NumericAnswer(expected=easy_expected),
            ),
            hard=QuestionSpec(
                prompt=(
                    f"Item {i}: first restate the rules in your head, then reply "
                    f"with the number {hard_expected} and nothing else."
                ),
                checker=NumericAnswer(expected=hard_expected),
            ),
        )
        pairs.append(pair)
        model.add(pair_id, "easy", SideTruth(
            p_easy, f"The final answer is {easy_expected}.",
            f"The final answer is {int(easy_expected) + 7}.",
        ))
        model.add(pair_id, "hard", SideTruth(
            p_hard, f"The final answer is {hard_expected}.",
            f"The final answer is {int(hard_expected) + 7}.",
        ))
    return pairs, model
