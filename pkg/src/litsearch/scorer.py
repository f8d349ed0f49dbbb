"""Relevance scorers: a deterministic built-in and an external-process bridge.

A scorer answers two kinds of questions: how relevant is passage d to query q
(pointwise, probability in [0,1]), and how likely is passage d_i to be more
relevant than d_j (pairwise). The built-in ReferenceScorer is a cheap lexical
stand-in for neural models; real models plug in over a newline-delimited JSON
wire protocol spoken by ExternalScorer (child-process pipes or a TCP socket).

Wire protocol, one JSON object per line:

    request:  {"kind": "pointwise"|"pairwise"|"extract", "id": int,
               "query": str, "doc": str, "doc2": str?}
    response: {"id": int, "score": float}           (score in [0,1])
              {"id": int, "terms": [str, ...]}      (extract only)

Requests may be pipelined; responses come back one per request, in request
order, ids echoed.
"""

from __future__ import annotations

import json
import math
import shlex
import socket
import subprocess
import threading
from typing import Mapping, Protocol, Sequence

from .errors import ScorerError
from .index import tokenize

# All probabilities are snapped to this grid. Complementary pairwise
# probabilities then satisfy p + (1 - p) == 1.0 bitwise, and preference-sum
# aggregates of up to 50 candidates stay exact in float64.
_QUANTUM = 2.0 ** -20


def _quantize(p: float) -> float:
    return round(p / _QUANTUM) * _QUANTUM


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


class Scorer(Protocol):
    def score_pointwise(self, query: str, docs: Sequence[str]) -> list[float]: ...

    def score_pairwise(self, query: str, pairs: Sequence[tuple[str, str]]) -> list[float]: ...


class ReferenceScorer:
    """Deterministic lexical scorer.

    Pointwise: sigmoid(GAIN * coverage - BIAS), where coverage is the
    idf-weighted fraction of distinct query terms present in the passage
    (idf weight 1.0 for terms without an idf entry). A passage with no query
    terms scores sigmoid(-BIAS) < 0.5; full coverage scores highest.

    Pairwise: sigmoid(pointwise(d_i) - pointwise(d_j)), computed so that the
    two orientations of a pair are exact complements.
    """

    GAIN = 4.0
    BIAS = 1.0

    def __init__(self, idf: Mapping[str, float] | None = None):
        self.idf = dict(idf) if idf else {}

    def _coverage(self, query_terms: Sequence[str], doc: str) -> float:
        if not query_terms:
            return 0.0
        doc_terms = set(tokenize(doc))
        total = 0.0
        hit = 0.0
        for term in query_terms:
            weight = self.idf.get(term, 1.0)
            total += weight
            if term in doc_terms:
                hit += weight
        return hit / total if total > 0 else 0.0

    def _pointwise_one(self, query_terms: Sequence[str], doc: str) -> float:
        coverage = self._coverage(query_terms, doc)
        return _quantize(_sigmoid(self.GAIN * coverage - self.BIAS))

    def score_pointwise(self, query: str, docs: Sequence[str]) -> list[float]:
        query_terms = sorted(set(tokenize(query)))
        return [self._pointwise_one(query_terms, doc) for doc in docs]

    def score_pairwise(self, query: str, pairs: Sequence[tuple[str, str]]) -> list[float]:
        query_terms = sorted(set(tokenize(query)))
        out = []
        for doc_a, doc_b in pairs:
            a = self._pointwise_one(query_terms, doc_a)
            b = self._pointwise_one(query_terms, doc_b)
            # Evaluate each unordered pair in one canonical orientation so
            # the flipped call returns the bitwise complement.
            if a >= b:
                out.append(_quantize(_sigmoid(a - b)))
            else:
                out.append(1.0 - _quantize(_sigmoid(b - a)))
        return out


class ExternalScorer:
    """Bridge to a scorer process speaking the wire protocol.

    Specs: ``exec:CMD`` starts CMD as a child process and talks over its
    stdin/stdout; ``tcp:HOST:PORT`` connects a socket. Batches are pipelined:
    all requests are written, then one response line is read per request.
    """

    def __init__(self, spec: str, timeout: float = 30.0):
        self.spec = spec
        self.timeout = timeout
        self._proc: subprocess.Popen | None = None
        self._sock: socket.socket | None = None
        self._sock_reader = None
        if spec.startswith("exec:"):
            cmd = shlex.split(spec[len("exec:"):])
            self._proc = subprocess.Popen(
                cmd, stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True, bufsize=1
            )
        elif spec.startswith("tcp:"):
            host, _, port = spec[len("tcp:"):].rpartition(":")
            if not host or not port.isdigit():
                raise ScorerError(f"bad scorer spec {spec!r}")
            # Split read/write paths: a single "rw" file object wraps the
            # socket in a buffered pair that can lose interleaved writes.
            self._sock = socket.create_connection((host, int(port)), timeout=timeout)
            self._sock_reader = self._sock.makefile("r", encoding="utf-8", newline="\n")
        else:
            raise ScorerError(f"bad scorer spec {spec!r} (expected exec:CMD or tcp:HOST:PORT)")
        self._next_id = 0
        # Batches must not interleave on the shared channel.
        self._lock = threading.Lock()

    def close(self) -> None:
        if self._proc is not None:
            if self._proc.stdin:
                self._proc.stdin.close()
            self._proc.wait(timeout=5)
            self._proc = None
        if self._sock_reader is not None:
            self._sock_reader.close()
            self._sock_reader = None
        if self._sock is not None:
            self._sock.close()
            self._sock = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _write_line(self, line: str, batch_index: int) -> None:
        try:
            if self._proc is not None:
                self._proc.stdin.write(line + "\n")
                self._proc.stdin.flush()
            elif self._sock is not None:
                self._sock.sendall((line + "\n").encode("utf-8"))
            else:
                raise ScorerError("scorer channel is closed", batch_index)
        except (BrokenPipeError, OSError) as exc:
            raise ScorerError(f"scorer channel write failed: {exc}", batch_index) from exc

    def _read_line(self, batch_index: int) -> str:
        try:
            if self._proc is not None:
                line = self._proc.stdout.readline()
            elif self._sock_reader is not None:
                line = self._sock_reader.readline()
            else:
                raise ScorerError("scorer channel is closed", batch_index)
        except (socket.timeout, OSError) as exc:
            raise ScorerError(f"scorer channel read failed: {exc}", batch_index) from exc
        if not line:
            raise ScorerError("scorer channel closed mid-batch", batch_index)
        return line

    def _roundtrip(self, requests: list[dict]) -> list[dict]:
        with self._lock:
            ids = []
            for i, request in enumerate(requests):
                request["id"] = self._next_id
                ids.append(self._next_id)
                self._next_id += 1
                self._write_line(json.dumps(request, ensure_ascii=False), i)
            responses = []
            for i, expected_id in enumerate(ids):
                line = self._read_line(i)
                try:
                    response = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ScorerError(f"malformed scorer response: {exc.msg}", i) from exc
                if response.get("id") != expected_id:
                    raise ScorerError(
                        f"scorer response id {response.get('id')!r} != expected {expected_id}", i
                    )
                responses.append(response)
            return responses

    def _scores(self, requests: list[dict]) -> list[float]:
        out = []
        for i, response in enumerate(self._roundtrip(requests)):
            score = response.get("score")
            if not isinstance(score, (int, float)) or math.isnan(score) or not 0.0 <= score <= 1.0:
                raise ScorerError(f"scorer returned invalid score {score!r}", i)
            out.append(float(score))
        return out

    def score_pointwise(self, query: str, docs: Sequence[str]) -> list[float]:
        return self._scores([{"kind": "pointwise", "query": query, "doc": d} for d in docs])

    def score_pairwise(self, query: str, pairs: Sequence[tuple[str, str]]) -> list[float]:
        return self._scores(
            [{"kind": "pairwise", "query": query, "doc": a, "doc2": b} for a, b in pairs]
        )

    def extract(self, text: str) -> list[str]:
        (response,) = self._roundtrip([{"kind": "extract", "query": text}])
        terms = response.get("terms")
        if not isinstance(terms, list) or not all(isinstance(t, str) for t in terms):
            raise ScorerError(f"scorer returned invalid terms {terms!r}", 0)
        return terms


def make_scorer(spec: str, idf: Mapping[str, float] | None = None):
    """Build a scorer from a CLI spec: ``reference``, ``exec:CMD`` or ``tcp:HOST:PORT``."""
    if spec == "reference":
        return ReferenceScorer(idf=idf)
    return ExternalScorer(spec)
