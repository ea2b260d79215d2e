"""Zero-/few-shot prompt construction and lenient answer mapping.

Prompts present the whole document, an instruction, and every template
question at once.  Few-shot prompts are preceded by exemplar blocks in the
identical layout with gold answers filled in, including the roles whose
answer is "No answer".  Generated free-text answers are mapped back to
token spans leniently: an answer counts as correct if any occurrence of its
tokens in the document equals the gold span.
"""

from __future__ import annotations

import random
import re
import string
from dataclasses import dataclass
from typing import Sequence

from .corpus import Corpus, Document, EventFrame, Ontology, Span
from .question_gen import QAInstance, WhTable, template_questions

DEFAULT_INSTRUCTION = (
    "Answer the questions below using only the document above. Copy each "
    "answer verbatim from the document, one answer per line, in order. If "
    "the document does not contain the answer, write exactly: No answer."
)

NO_ANSWER_TEXT = "No answer"


class PromptingError(ValueError):
    pass


@dataclass(frozen=True)
class PromptConfig:
    """Layout knobs; the instruction is configurable, not canonical."""

    instruction: str = DEFAULT_INSTRUCTION
    questions_label: str = "Questions:"
    answers_label: str = "Answers:"
    block_separator: str = "\n\n---\n\n"


@dataclass(frozen=True)
class PromptBundle:
    doc_id: str
    event_id: str
    prompt_text: str
    expected_roles: tuple[str, ...]
    shots: tuple[str, ...] = ()


@dataclass(frozen=True)
class GeneratedAnswers:
    """Raw answer text per role (None marks a generated "No answer")."""

    doc_id: str
    event_id: str
    answers: tuple[str | None, ...]


def _document_text(doc: Document) -> str:
    return " ".join(" ".join(sent) for sent in doc.sentences)


def _block(doc: Document, instances: Sequence[QAInstance], config: PromptConfig,
           with_answers: bool) -> str:
    lines = [_document_text(doc), "", config.instruction, "", config.questions_label]
    for i, inst in enumerate(instances, start=1):
        lines.append(f"{i}. {inst.question}")
    lines.append(config.answers_label)
    if with_answers:
        for i, inst in enumerate(instances, start=1):
            text = (doc.span_text(inst.answer) if inst.answer is not None
                    else NO_ANSWER_TEXT)
            lines.append(f"{i}. {text}")
    return "\n".join(lines)


def sample_shots(pool: Sequence[tuple[Document, EventFrame]], k: int,
                 seed: int = 0) -> list[tuple[Document, EventFrame]]:
    if k == 0:
        return []
    if not pool:
        raise PromptingError("shot sampling requested with an empty pool")
    return random.Random(seed).sample(list(pool), k)


def build_prompt(doc: Document, frame: EventFrame, ontology: Ontology,
                 wh: WhTable | None = None,
                 shots: Sequence[tuple[Document, EventFrame]] = (),
                 seed: int = 0,
                 config: PromptConfig | None = None) -> PromptBundle:
    """Exemplar blocks (if any), then the test document with all questions.

    Role order matches template_questions order; pass shots=[] for a
    zero-shot prompt.  seed only labels the bundle; shot sampling happens in
    sample_shots so prompt construction itself stays deterministic.
    """
    config = config or PromptConfig()
    instances = template_questions(doc, frame, ontology, wh)
    shot_blocks = tuple(
        _block(shot_doc,
               template_questions(shot_doc, shot_frame, ontology, wh),
               config, with_answers=True)
        for shot_doc, shot_frame in shots
    )
    test_block = _block(doc, instances, config, with_answers=False)
    prompt = config.block_separator.join(list(shot_blocks) + [test_block])
    return PromptBundle(
        doc_id=doc.doc_id,
        event_id=frame.event_id,
        prompt_text=prompt,
        expected_roles=tuple(inst.role for inst in instances),
        shots=shot_blocks,
    )


_ENUM_PREFIX = re.compile(r"^\s*\d+\s*[.)]\s*")


def _strip_edges(text: str) -> str:
    return text.strip(string.punctuation + string.whitespace)


def parse_generated_answers(doc_id: str, event_id: str, text: str,
                            expected_roles: Sequence[str]) -> GeneratedAnswers:
    """One answer per line in role order; missing lines count as no answer."""
    answers: list[str | None] = []
    lines = [line for line in text.splitlines() if line.strip()]
    for i in range(len(expected_roles)):
        if i >= len(lines):
            answers.append(None)
            continue
        answer = _ENUM_PREFIX.sub("", lines[i]).strip()
        if _strip_edges(answer).lower() == NO_ANSWER_TEXT.lower() or not answer:
            answers.append(None)
        else:
            answers.append(answer)
    return GeneratedAnswers(doc_id, event_id, tuple(answers))


def lenient_score_map(doc: Document, role: str | None, generated: str | None,
                      gold: Span | None) -> bool:
    """True iff some occurrence of the generated text equals the gold span.

    The generated answer is whitespace-tokenized after stripping edge
    punctuation; occurrences are found case-insensitively.  A generated "No
    answer" (None) matches exactly when the gold argument is absent.
    """
    if generated is None:
        return gold is None
    tokens = _strip_edges(generated).split()
    if not tokens:
        return gold is None
    if gold is None:
        return False
    target = [t.lower() for t in tokens]
    haystack = [t.lower() for t in doc.tokens]
    n = len(target)
    for start in range(len(haystack) - n + 1):
        if haystack[start:start + n] == target:
            if Span(start, start + n - 1) == gold:
                return True
    return False


@dataclass(frozen=True)
class LenientReport:
    precision: float
    recall: float
    f1: float
    n_matched: int
    n_predicted: int
    n_gold: int


def lenient_evaluate(corpus: Corpus, batches: Sequence[GeneratedAnswers],
                     ontology: Ontology,
                     wh: WhTable | None = None) -> LenientReport:
    """P/R/F1 over generated textual answers under the lenient mapping.

    Precision counts every non-"No answer" generation as a prediction;
    recall is over all gold arguments, so events with a repeated role can
    never reach full recall with one answer per role.
    """
    matched = predicted = 0
    n_gold = sum(len(frame.arguments) for _, frames in corpus for frame in frames)
    for batch in batches:
        doc = corpus.document(batch.doc_id)
        frame = corpus.frame(batch.doc_id, batch.event_id)
        roles = ontology.licensed_roles(frame.event_type)
        if len(batch.answers) != len(roles):
            raise PromptingError(
                f"event {batch.event_id!r}: got {len(batch.answers)} answers "
                f"for {len(roles)} roles")
        for role, answer in zip(roles, batch.answers):
            gold = frame.first_span(role)
            if answer is not None:
                predicted += 1
                if gold is not None and lenient_score_map(doc, role, answer, gold):
                    matched += 1
    precision = matched / predicted if predicted else 0.0
    recall = matched / n_gold if n_gold else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall else 0.0)
    return LenientReport(precision, recall, f1, matched, predicted, n_gold)
