"""Turn event frames into question-answer pairs.

Two sources of questions are handled here: instantiating the fixed
"Wh-word is the [role] of the event [trigger]?" template for every role an
event type licenses, and ingesting questions generated offline by a
sequence-to-sequence model (those exist only for arguments that are
actually present).  A third path ingests generic QA pairs from external
corpora for transfer-learning merges.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .corpus import Corpus, CorpusError, Document, EventFrame, Ontology, Span
from .util import read_jsonl

# Answer value for roles with no argument in the document.
NO_ANSWER = None

SOURCES = ("template", "transformer", "external")


class QuestionGenError(ValueError):
    pass


@dataclass(frozen=True)
class QAInstance:
    """One question-answer pair tied to a document, event, and role.

    answer is a Span or None (no answer).  For external instances the
    originating record has no corpus document, so the standalone context
    travels with the instance.
    """

    instance_id: str
    doc_id: str
    event_id: str
    role: str | None
    question: str
    answer: Span | None
    source: str
    wh_word: str | None = None
    context: Document | None = None

    def __post_init__(self) -> None:
        if self.source not in SOURCES:
            raise QuestionGenError(f"unknown source {self.source!r}")
        if self.source == "transformer" and self.answer is None:
            raise QuestionGenError(
                "transformer questions exist only for present arguments"
            )


def make_instance_id(doc_id: str, event_id: str, role: str | None, question: str) -> str:
    """Stable content hash so merges across runs (and sources) deduplicate.

    The question text is part of the key: a generated question that exactly
    duplicates the template question for the same (event, role) collapses
    with it on merge.
    """
    key = "\x1f".join([doc_id, event_id, role or "", question])
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]


# Inferred default wh-word table.  Roles naming places ask "where", roles
# naming people or agents ask "who", manner/instrument-like roles ask
# "how", and everything else falls back to "what".
_WHERE_ROLES = (
    "place", "origin", "destination", "hidingplace", "territoryorfacility",
    "placeofemployment",
)
_WHO_ROLES = (
    "transporter", "giver", "recipient", "beneficiary", "communicator",
    "victim", "attacker", "participant", "otherparticipant", "employee",
    "passenger", "jailer", "detainee", "violator", "killer", "injurer",
    "damager", "destroyer", "damagerdestroyer", "defendant", "prosecutor",
    "executioner", "extraditer", "founder", "inspector", "investigator",
    "demonstrator", "deceased", "driverpassenger", "monitor", "observer",
    "preventer", "retreater", "surrenderer", "voter", "yielder",
    "manufacturer", "spy", "gpe", "candidate",
)
_HOW_ROLES = ("instrument", "manner")

DEFAULT_WH_WORD = "what"
WH_WORDS = ("what", "where", "who", "how")


@dataclass(frozen=True)
class WhTable:
    """Role name to wh-word mapping, total over any role set via the default."""

    mapping: dict[str, str]
    default: str | None = DEFAULT_WH_WORD

    @classmethod
    def builtin(cls) -> "WhTable":
        mapping = {r: "where" for r in _WHERE_ROLES}
        mapping.update({r: "who" for r in _WHO_ROLES})
        mapping.update({r: "how" for r in _HOW_ROLES})
        return cls(mapping)

    @classmethod
    def load(cls, path: str | Path) -> "WhTable":
        """Read a key=value table; a __default__ entry sets the fallback."""
        mapping: dict[str, str] = {}
        default = None
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise QuestionGenError(f"{path}:{lineno}: expected role=wh-word")
                role, wh = (part.strip() for part in line.split("=", 1))
                if wh not in WH_WORDS:
                    raise QuestionGenError(f"{path}:{lineno}: unknown wh-word {wh!r}")
                if role == "__default__":
                    default = wh
                else:
                    mapping[role] = wh
        return cls(mapping, default)

    def wh_for(self, role: str) -> str:
        wh = self.mapping.get(role, self.default)
        if wh is None:
            raise QuestionGenError(f"no wh-word for role {role!r} and no default")
        return wh


def render_question(wh: str, role: str, trigger_text: str) -> str:
    return f"{wh.capitalize()} is the {role} of the event {trigger_text}?"


def template_questions(doc: Document, frame: EventFrame, ontology: Ontology,
                       wh: WhTable | None = None) -> list[QAInstance]:
    """One QAInstance per licensed role of the frame's event type.

    Questions are produced in ontology role order whether or not the
    argument is present; absent roles get NO_ANSWER.  When a role repeats,
    the first gold occurrence in document order is the answer.
    """
    wh = wh or WhTable.builtin()
    trigger_text = " ".join(t.lower() for t in doc.span_tokens(frame.trigger))
    out = []
    for role in ontology.licensed_roles(frame.event_type):
        word = wh.wh_for(role)
        question = render_question(word, role, trigger_text)
        answer = frame.first_span(role)
        out.append(QAInstance(
            instance_id=make_instance_id(doc.doc_id, frame.event_id, role, question),
            doc_id=doc.doc_id,
            event_id=frame.event_id,
            role=role,
            question=question,
            answer=answer,
            source="template",
            wh_word=word,
        ))
    return out


def ingest_transformer_questions(path: str | Path, corpus: Corpus) -> list[QAInstance]:
    """Read offline-generated questions: JSON-lines {doc_id, event_id, role, question}.

    Each record must reference an argument present in the corpus; the gold
    span becomes the answer.  Question text is stored verbatim even when it
    is worded about some other event in the document.
    """
    out = []
    for lineno, record in read_jsonl(path):
        try:
            doc_id, event_id = record["doc_id"], record["event_id"]
            role, question = record["role"], record["question"]
        except (KeyError, TypeError):
            raise QuestionGenError(f"{path}:{lineno}: missing field") from None
        doc = corpus.document(doc_id)
        frame = corpus.frame(doc_id, event_id)
        if role not in (r for r, _ in frame.arguments):
            raise QuestionGenError(
                f"{path}:{lineno}: question for absent argument {role!r} "
                f"of event {event_id!r}"
            )
        answer = frame.first_span(role)
        out.append(QAInstance(
            instance_id=make_instance_id(doc.doc_id, event_id, role, question),
            doc_id=doc_id,
            event_id=event_id,
            role=role,
            question=question,
            answer=answer,
            source="transformer",
        ))
    return out


def ingest_external_qa(path: str | Path) -> list[QAInstance]:
    """Read generic QA pairs: JSON-lines {context, question, answer}.

    context is an array of sentence token arrays, answer a global [start,
    end] token span or null.  Every record becomes a standalone
    single-document context; role and wh-word are absent.
    """
    stem = Path(path).stem
    out = []
    for lineno, record in read_jsonl(path):
        try:
            context, question = record["context"], record["question"]
        except (KeyError, TypeError):
            raise QuestionGenError(f"{path}:{lineno}: missing field") from None
        if "answer" not in record:
            raise QuestionGenError(f"{path}:{lineno}: missing answer field")
        doc_id = f"{stem}#{lineno}"
        try:
            doc = Document.from_lists(doc_id, context)
        except CorpusError as exc:
            raise QuestionGenError(f"{path}:{lineno}: {exc}") from None
        raw = record["answer"]
        if raw is None:
            answer = None
        else:
            answer = Span(int(raw[0]), int(raw[1]))
            try:
                doc.check_span(answer)
            except CorpusError as exc:
                raise QuestionGenError(f"{path}:{lineno}: {exc}") from None
        out.append(QAInstance(
            instance_id=make_instance_id(doc_id, "", None, question),
            doc_id=doc_id,
            event_id="",
            role=None,
            question=question,
            answer=answer,
            source="external",
            context=doc,
        ))
    return out


def answered(instances: Iterable[QAInstance]) -> list[QAInstance]:
    return [inst for inst in instances if inst.answer is not None]
