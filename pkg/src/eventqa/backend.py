"""Answer-provider protocol: HTTP client plus built-in mock answerers.

The wire protocol is a single batched POST /answer endpoint exchanging
token-index spans, so any QA model can sit behind it.  The mocks make the
whole pipeline testable end to end without a model: an oracle that reads
gold answers, degenerate always-no-answer / first-token answerers, and a
noisy oracle with seeded drop and shift rates.
"""

from __future__ import annotations

import logging
import random
import time
from dataclasses import dataclass
from typing import Iterable, Protocol, Sequence

import requests as _requests

from .corpus import Corpus, Span
from .question_gen import QAInstance
from .util import stable_hash

logger = logging.getLogger(__name__)


class ProtocolError(RuntimeError):
    """The server's reply violates the wire contract."""


class TransportError(RuntimeError):
    """The endpoint stayed unreachable after retries."""


@dataclass(frozen=True)
class AnswerRequest:
    instance_id: str
    context: tuple[tuple[str, ...], ...]
    question: str
    trigger: Span

    def n_tokens(self) -> int:
        return sum(len(s) for s in self.context)

    def to_json(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "context": [list(s) for s in self.context],
            "question": self.question,
            "trigger": {"start": self.trigger.start, "end": self.trigger.end},
        }


@dataclass(frozen=True)
class AnswerResponse:
    instance_id: str
    answer: Span | None

    def to_json(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "answer": (None if self.answer is None
                       else {"start": self.answer.start, "end": self.answer.end}),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "AnswerResponse":
        try:
            instance_id = obj["instance_id"]
            raw = obj["answer"]
        except (KeyError, TypeError):
            raise ProtocolError(f"malformed response entry: {obj!r}") from None
        answer = None if raw is None else Span(int(raw["start"]), int(raw["end"]))
        return cls(instance_id, answer)


class Answerer(Protocol):
    def answer(self, requests: Sequence[AnswerRequest]) -> list[AnswerResponse]: ...


def requests_from_instances(corpus: Corpus,
                            instances: Iterable[QAInstance]) -> list[AnswerRequest]:
    """Build protocol requests for QA instances, resolving their contexts."""
    out = []
    for inst in instances:
        doc = inst.context or corpus.document(inst.doc_id)
        if inst.event_id and inst.context is None:
            trigger = corpus.frame(inst.doc_id, inst.event_id).trigger
        else:
            trigger = Span(0, 0)  # external contexts carry no event trigger
        out.append(AnswerRequest(inst.instance_id, doc.sentences, inst.question,
                                 trigger))
    return out


class OracleAnswerer:
    """Replays the gold answer recorded on each instance."""

    def __init__(self, instances: Iterable[QAInstance]):
        self._gold = {inst.instance_id: inst.answer for inst in instances}

    def answer(self, requests: Sequence[AnswerRequest]) -> list[AnswerResponse]:
        out = []
        for req in requests:
            if req.instance_id not in self._gold:
                raise KeyError(f"oracle has no gold answer for {req.instance_id!r}")
            out.append(AnswerResponse(req.instance_id, self._gold[req.instance_id]))
        return out


class NoAnswerAnswerer:
    def answer(self, requests: Sequence[AnswerRequest]) -> list[AnswerResponse]:
        return [AnswerResponse(req.instance_id, None) for req in requests]


class FirstTokenAnswerer:
    def answer(self, requests: Sequence[AnswerRequest]) -> list[AnswerResponse]:
        return [AnswerResponse(req.instance_id, Span(0, 0)) for req in requests]


class NoisyAnswerer:
    """Oracle with seeded noise: gold answers are dropped with probability
    p_drop, surviving spans slide by one token with probability p_shift
    (clamped to the context bounds).  Noise is keyed by instance_id, so it
    does not depend on request order."""

    def __init__(self, instances: Iterable[QAInstance], p_drop: float,
                 p_shift: float, seed: int = 0):
        if not 0 <= p_drop <= 1 or not 0 <= p_shift <= 1:
            raise ValueError("p_drop and p_shift must be within [0, 1]")
        self._oracle = OracleAnswerer(instances)
        self.p_drop = p_drop
        self.p_shift = p_shift
        self.seed = seed

    def answer(self, requests: Sequence[AnswerRequest]) -> list[AnswerResponse]:
        out = []
        for req, resp in zip(requests, self._oracle.answer(requests)):
            span = resp.answer
            if span is not None:
                rng = random.Random(stable_hash(self.seed, req.instance_id))
                if rng.random() < self.p_drop:
                    span = None
                elif rng.random() < self.p_shift:
                    delta = rng.choice((-1, 1))
                    total = req.n_tokens()
                    start, end = span.start + delta, span.end + delta
                    if start < 0:
                        start, end = 0, len(span) - 1
                    if end >= total:
                        end = total - 1
                        start = end - len(span) + 1
                    span = Span(start, end)
            out.append(AnswerResponse(req.instance_id, span))
        return out


MOCKS = ("oracle", "no_answer", "first_token", "noisy")


def make_mock(name: str, instances: Iterable[QAInstance] = (),
              p_drop: float = 0.0, p_shift: float = 0.0, seed: int = 0) -> Answerer:
    if name == "oracle":
        return OracleAnswerer(instances)
    if name == "no_answer":
        return NoAnswerAnswerer()
    if name == "first_token":
        return FirstTokenAnswerer()
    if name == "noisy":
        return NoisyAnswerer(instances, p_drop, p_shift, seed)
    raise ValueError(f"unknown mock {name!r}; expected one of {', '.join(MOCKS)}")


class HttpAnswerer:
    """Client for an external answer server speaking the /answer protocol."""

    def __init__(self, endpoint: str, batch_size: int = 32, retries: int = 3,
                 backoff: float = 0.5, timeout: float = 60.0,
                 session: "_requests.Session | None" = None):
        self.url = endpoint.rstrip("/")
        if not self.url.endswith("/answer"):
            self.url += "/answer"
        self.batch_size = batch_size
        self.retries = retries
        self.backoff = backoff
        self.timeout = timeout
        self.session = session or _requests.Session()

    def _post(self, chunk: Sequence[AnswerRequest]) -> list[dict]:
        body = {"requests": [req.to_json() for req in chunk]}
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                resp = self.session.post(self.url, json=body, timeout=self.timeout)
                if resp.status_code >= 500:
                    raise _requests.HTTPError(f"server error {resp.status_code}")
                resp.raise_for_status()
                payload = resp.json()
                if not isinstance(payload, dict) or "responses" not in payload:
                    raise ProtocolError(f"reply lacks 'responses': {payload!r}")
                return payload["responses"]
            except (_requests.ConnectionError, _requests.Timeout,
                    _requests.HTTPError) as exc:
                last_error = exc
                if attempt < self.retries:
                    time.sleep(self.backoff * (2 ** attempt))
        raise TransportError(
            f"endpoint {self.url} unreachable after {self.retries + 1} attempts: "
            f"{last_error}")

    def answer(self, requests: Sequence[AnswerRequest]) -> list[AnswerResponse]:
        out: list[AnswerResponse] = []
        for i in range(0, len(requests), self.batch_size):
            chunk = requests[i:i + self.batch_size]
            raw = self._post(chunk)
            if len(raw) != len(chunk):
                raise ProtocolError(
                    f"sent {len(chunk)} requests, got {len(raw)} responses")
            by_id = {}
            for obj in raw:
                entry = AnswerResponse.from_json(obj)
                by_id[entry.instance_id] = entry
            for req in chunk:
                if req.instance_id not in by_id:
                    raise ProtocolError(f"no response for {req.instance_id!r}")
                out.append(by_id[req.instance_id])
        return out


def answer_batch(client: "Answerer | str",
                 requests: Sequence[AnswerRequest]) -> list[AnswerResponse]:
    """One response per request, order preserved.

    client is either an endpoint URL or any object with an answer() method.
    Out-of-bounds spans coming back from a server are rejected per response
    (the span is dropped to null with a warning).
    """
    answerer: Answerer = HttpAnswerer(client) if isinstance(client, str) else client
    responses = answerer.answer(requests)
    if len(responses) != len(requests):
        raise ProtocolError(
            f"{len(requests)} requests but {len(responses)} responses")
    out = []
    for req, resp in zip(requests, responses):
        if resp.instance_id != req.instance_id:
            raise ProtocolError(
                f"response id {resp.instance_id!r} does not match request "
                f"{req.instance_id!r}")
        span = resp.answer
        if span is not None and not (0 <= span.start <= span.end < req.n_tokens()):
            logger.warning("rejecting out-of-bounds span %s for %s",
                           tuple(span), req.instance_id)
            span = None
        out.append(AnswerResponse(req.instance_id, span))
    return out
