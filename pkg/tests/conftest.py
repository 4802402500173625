import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from consis.core import (
    Constraint,
    ConstraintList,
    NumericAnswer,
    QuestionPair,
    QuestionSpec,
)


class _StubHandler(BaseHTTPRequestHandler):
    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        body = json.loads(self.rfile.read(length)) if length else {}
        self.server.requests.append(
            {"path": self.path, "body": body, "headers": dict(self.headers)}
        )
        behavior = self.server.script.pop(0) if self.server.script else ("ok", "42")
        kind = behavior[0]
        if kind == "sleep":
            time.sleep(behavior[1])
            kind, behavior = "ok", ("ok", "late")
        if kind == "ok":
            payload = json.dumps(
                {"choices": [{"message": {"content": behavior[1]}}]}
            ).encode()
            self._reply(200, payload)
        elif kind == "status":
            self._reply(behavior[1], b"server says no")
        elif kind == "malformed":
            self._reply(200, b'{"unexpected": "shape"}')

    def _reply(self, status, payload):
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


class StubChatServer:
    """Scriptable loopback chat-completions endpoint."""

    def __init__(self):
        self._server = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
        self._server.script = []
        self._server.requests = []
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    @property
    def base_url(self):
        host, port = self._server.server_address
        return f"http://{host}:{port}/v1"

    @property
    def requests(self):
        return self._server.requests

    def enqueue(self, *behaviors):
        self._server.script.extend(behaviors)

    def close(self):
        self._server.shutdown()
        self._server.server_close()


@pytest.fixture
def stub_server():
    server = StubChatServer()
    yield server
    server.close()


def write_jsonl(path, objects):
    with open(path, "w", encoding="utf-8") as fh:
        for obj in objects:
            fh.write(json.dumps(obj) + "\n")
    return path


def math_pair_dict(pair_id="m-001", easy_expected="490", hard_expected="1555"):
    return {
        "id": pair_id,
        "domain": "math",
        "easy": {
            "prompt": "How many fruits are there in total?",
            "checker": {"kind": "numeric", "expected": easy_expected},
        },
        "hard": {
            "prompt": "How much are the fruits worth in total?",
            "checker": {"kind": "numeric", "expected": hard_expected},
        },
    }


def if_pair(pair_id="if-001", easy_types=None, hard_types=None):
    easy_types = easy_types if easy_types is not None else [("punctuation:no_comma", {})]
    hard_types = hard_types if hard_types is not None else [
        ("punctuation:no_comma", {}),
        ("length_constraints:number_sentences", {"relation": "at least", "num_sentences": 6}),
    ]
    return QuestionPair(
        id=pair_id,
        domain="instruction_following",
        easy=QuestionSpec(
            prompt="Write a riddle for kids but do not use any commas.",
            checker=ConstraintList(tuple(Constraint(t, k) for t, k in easy_types)),
        ),
        hard=QuestionSpec(
            prompt="Write a riddle for kids with no commas and at least 6 sentences.",
            checker=ConstraintList(tuple(Constraint(t, k) for t, k in hard_types)),
        ),
    )


def numeric_pair(pair_id="m-001", easy_expected="490", hard_expected="1555"):
    return QuestionPair(
        id=pair_id,
        domain="math",
        easy=QuestionSpec(prompt="easy question", checker=NumericAnswer(easy_expected)),
        hard=QuestionSpec(prompt="hard question", checker=NumericAnswer(hard_expected)),
    )


@pytest.fixture
def tmp_log(tmp_path):
    return tmp_path / "samples.jsonl"
