"""Data model for document-level event-argument annotations.

Documents are sentence-segmented, pre-tokenized texts indexed by a single
global token index that runs over the concatenation of all sentences.  All
spans (triggers and arguments) are inclusive [start, end] pairs of global
token indices.  Everything here is immutable after construction and safe to
share across threads.
"""

from __future__ import annotations

import logging
import re
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple

from .util import read_jsonl

logger = logging.getLogger(__name__)


class CorpusError(ValueError):
    """Malformed record, out-of-bounds span, or ontology violation."""


class Span(NamedTuple):
    """Inclusive [start, end] pair of global token indices."""

    start: int
    end: int

    def __len__(self) -> int:
        return self.end - self.start + 1

    def overlaps(self, other: "Span") -> bool:
        return self.start <= other.end and other.start <= self.end

    def contains(self, other: "Span") -> bool:
        return self.start <= other.start and other.end <= self.end


@dataclass(frozen=True)
class Document:
    """A tokenized multi-sentence document with global token indexing.

    Token j of sentence i sits at global index sum(len(s) for s in
    sentences[:i]) + j.  Sentences must be non-empty and there must be at
    least one of them.
    """

    doc_id: str
    sentences: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        if not self.sentences:
            raise CorpusError(f"document {self.doc_id!r} has no sentences")
        for i, sent in enumerate(self.sentences):
            if not sent:
                raise CorpusError(f"document {self.doc_id!r}: sentence {i} is empty")

    @classmethod
    def from_lists(cls, doc_id: str, sentences: Iterable[Iterable[str]]) -> "Document":
        return cls(doc_id, tuple(tuple(s) for s in sentences))

    @cached_property
    def sentence_starts(self) -> tuple[int, ...]:
        starts = []
        total = 0
        for sent in self.sentences:
            starts.append(total)
            total += len(sent)
        return tuple(starts)

    @cached_property
    def n_tokens(self) -> int:
        return sum(len(s) for s in self.sentences)

    @cached_property
    def tokens(self) -> tuple[str, ...]:
        return tuple(tok for sent in self.sentences for tok in sent)

    def sentence_of(self, index: int) -> int:
        """Sentence index containing the given global token index."""
        if not 0 <= index < self.n_tokens:
            raise CorpusError(
                f"document {self.doc_id!r}: token index {index} out of range "
                f"[0, {self.n_tokens})"
            )
        return bisect_right(self.sentence_starts, index) - 1

    def check_span(self, span: Span) -> None:
        if not (0 <= span.start <= span.end < self.n_tokens):
            raise CorpusError(
                f"document {self.doc_id!r}: span {tuple(span)} out of bounds "
                f"for {self.n_tokens} tokens"
            )

    def span_tokens(self, span: Span) -> tuple[str, ...]:
        self.check_span(span)
        return self.tokens[span.start : span.end + 1]

    def span_text(self, span: Span) -> str:
        return " ".join(self.span_tokens(span))


@dataclass(frozen=True)
class EventFrame:
    """One event trigger plus its role-labeled argument spans.

    The argument list is a multiset in document order: a role may occur
    more than once on the same event.
    """

    event_id: str
    trigger: Span
    event_type: str
    arguments: tuple[tuple[str, Span], ...]

    def spans_with_roles(self) -> list[tuple[str | None, Span]]:
        """Trigger (role None) followed by the arguments."""
        return [(None, self.trigger)] + [(r, s) for r, s in self.arguments]

    def first_span(self, role: str) -> Span | None:
        """Earliest argument span (by document order) carrying the role."""
        spans = [s for r, s in self.arguments if r == role]
        return min(spans, key=lambda s: (s.start, s.end)) if spans else None


@dataclass(frozen=True)
class Ontology:
    """Event-type paths mapped to the ordered role names they license.

    Role lookup is an exact match on the (possibly non-leaf) dotted path;
    the ontology file must list roles at every level it wants resolvable.
    """

    events: dict[str, tuple[str, ...]]
    roles: frozenset[str] = field(default=frozenset())

    def __post_init__(self) -> None:
        if not self.roles:
            all_roles = frozenset(r for rs in self.events.values() for r in rs)
            object.__setattr__(self, "roles", all_roles)

    @classmethod
    def load(cls, path: str | Path) -> "Ontology":
        """Load the flat tab-separated table: event-type path, then roles."""
        events: dict[str, tuple[str, ...]] = {}
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                fields = line.split("\t")
                if len(fields) < 1 or not fields[0]:
                    raise CorpusError(f"{path}:{lineno}: missing event type")
                events[fields[0]] = tuple(r for r in fields[1:] if r)
        return cls(events)

    def licensed_roles(self, event_type: str) -> tuple[str, ...]:
        try:
            return self.events[event_type]
        except KeyError:
            raise CorpusError(f"unknown event type {event_type!r}") from None

    def check_frame(self, frame: EventFrame) -> None:
        licensed = self.licensed_roles(frame.event_type)
        for role, _ in frame.arguments:
            if role not in licensed:
                raise CorpusError(
                    f"role {role!r} not licensed for event type {frame.event_type!r}"
                )


@dataclass(frozen=True)
class CorpusStats:
    n_documents: int
    n_events: int
    n_arguments: int
    n_intra: int
    n_inter: int
    args_per_event: Fraction


# RAMS role strings carry a positional prefix in the public release
# (e.g. "evt089arg01victim"); this is the one place it gets stripped.
_ROLE_PREFIX = re.compile(r"^evt\d+arg\d+")


def normalize_role(role: str) -> str:
    return _ROLE_PREFIX.sub("", role)


def sentence_of(doc: Document, index: int) -> int:
    return doc.sentence_of(index)


def argument_distance(doc: Document, frame: EventFrame, arg_span: Span) -> int:
    """Signed sentence offset from trigger to argument (negative = before)."""
    doc.check_span(arg_span)
    doc.check_span(frame.trigger)
    return doc.sentence_of(arg_span.start) - doc.sentence_of(frame.trigger.start)


def _parse_record(record: dict, lineno: int, ontology: Ontology | None,
                  on_unknown: str) -> tuple[Document, list[EventFrame]] | None:
    try:
        doc_key = record["doc_key"]
        sentences = record["sentences"]
        evt_triggers = record.get("evt_triggers", [])
        links = record.get("gold_evt_links", [])
    except (KeyError, TypeError) as exc:
        raise CorpusError(f"line {lineno}: missing field {exc}") from None

    doc = Document.from_lists(doc_key, sentences)

    frames = []
    by_trigger: dict[Span, EventFrame] = {}
    for i, trig in enumerate(evt_triggers):
        try:
            start, end, types = trig[0], trig[1], trig[2]
            event_type = types[0][0]
        except (IndexError, TypeError) as exc:
            raise CorpusError(f"line {lineno}: malformed trigger entry {trig!r}") from exc
        span = Span(int(start), int(end))
        doc.check_span(span)
        if ontology is not None and event_type not in ontology.events:
            if on_unknown == "skip":
                logger.warning("line %d: skipping unknown event type %r", lineno, event_type)
                continue
            raise CorpusError(f"line {lineno}: unknown event type {event_type!r}")
        frame_args: list[tuple[str, Span]] = []
        frame = EventFrame(f"{doc_key}#ev{i}", span, event_type, ())
        by_trigger[span] = frame
        frames.append((frame, frame_args))

    for link in links:
        try:
            (ts, te), (as_, ae), role = link[0], link[1], link[2]
        except (IndexError, TypeError, ValueError) as exc:
            raise CorpusError(f"line {lineno}: malformed argument link {link!r}") from exc
        trig_span = Span(int(ts), int(te))
        arg_span = Span(int(as_), int(ae))
        doc.check_span(arg_span)
        role = normalize_role(str(role))
        frame = by_trigger.get(trig_span)
        if frame is None:
            raise CorpusError(
                f"line {lineno}: argument link references unknown trigger {tuple(trig_span)}"
            )
        licensed = ontology.licensed_roles(frame.event_type) if ontology else None
        if licensed is not None and role not in licensed:
            if on_unknown == "skip":
                logger.warning("line %d: skipping unlicensed role %r for %r",
                               lineno, role, frame.event_type)
                continue
            raise CorpusError(
                f"line {lineno}: role {role!r} not licensed for {frame.event_type!r}"
            )
        for f, args in frames:
            if f is frame:
                args.append((role, arg_span))
                break

    built = [EventFrame(f.event_id, f.trigger, f.event_type, tuple(args))
             for f, args in frames]
    return doc, built


def load_corpus(path: str | Path, ontology: Ontology | None = None,
                on_unknown: str = "raise") -> list[tuple[Document, list[EventFrame]]]:
    """Load a RAMS-format JSON-lines annotation file.

    Records are returned in file order.  With an ontology, event types and
    roles are validated; on_unknown selects between rejecting ("raise") and
    warn-and-skip ("skip").  Spans are always validated against document
    bounds.
    """
    if on_unknown not in ("raise", "skip"):
        raise ValueError(f"on_unknown must be 'raise' or 'skip', got {on_unknown!r}")
    out = []
    for lineno, record in read_jsonl(path):
        try:
            parsed = _parse_record(record, lineno, ontology, on_unknown)
        except CorpusError as exc:
            raise CorpusError(f"{path}: {exc}") from None
        if parsed is not None:
            out.append(parsed)
    return out


class Corpus:
    """Indexed view over (document, frames) pairs, preserving load order."""

    def __init__(self, pairs: Iterable[tuple[Document, list[EventFrame]]]):
        self.pairs = [(doc, list(frames)) for doc, frames in pairs]
        self.documents: dict[str, Document] = {}
        self._frames: dict[tuple[str, str], EventFrame] = {}
        for doc, frames in self.pairs:
            if doc.doc_id in self.documents:
                raise CorpusError(f"duplicate doc_id {doc.doc_id!r}")
            self.documents[doc.doc_id] = doc
            for frame in frames:
                self._frames[(doc.doc_id, frame.event_id)] = frame

    @classmethod
    def load(cls, path: str | Path, ontology: Ontology | None = None,
             on_unknown: str = "raise") -> "Corpus":
        return cls(load_corpus(path, ontology, on_unknown))

    def __iter__(self) -> Iterator[tuple[Document, list[EventFrame]]]:
        return iter(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def document(self, doc_id: str) -> Document:
        try:
            return self.documents[doc_id]
        except KeyError:
            raise CorpusError(f"unknown doc_id {doc_id!r}") from None

    def frame(self, doc_id: str, event_id: str) -> EventFrame:
        try:
            return self._frames[(doc_id, event_id)]
        except KeyError:
            raise CorpusError(f"unknown event {event_id!r} in doc {doc_id!r}") from None


def corpus_stats(corpus: Iterable[tuple[Document, list[EventFrame]]]) -> CorpusStats:
    """Count documents, events, and intra-/inter-sentential arguments."""
    n_docs = n_events = n_args = n_intra = 0
    for doc, frames in corpus:
        n_docs += 1
        for frame in frames:
            n_events += 1
            for _, span in frame.arguments:
                n_args += 1
                if argument_distance(doc, frame, span) == 0:
                    n_intra += 1
    per_event = Fraction(n_args, n_events) if n_events else Fraction(0)
    return CorpusStats(n_docs, n_events, n_args, n_intra, n_args - n_intra, per_event)
