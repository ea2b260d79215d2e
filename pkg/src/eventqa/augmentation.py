"""Six augmentation strategies that manufacture inter-sentential arguments.

Simple swapping physically moves (or verbosely restates) an intra-sentential
argument at a sentence boundary; coreference-based strategies re-point the
gold span at a mention in another sentence; the LLM strategies ingest
externally rewritten documents and remap the gold spans into them.  All
strategies are deterministic functions of their inputs and a seed.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import (
    Corpus,
    Document,
    EventFrame,
    Span,
    argument_distance,
)
from .util import read_jsonl, substream

logger = logging.getLogger(__name__)

STRATEGIES = (
    "ss_plain", "ss_verbose", "cr_random", "cr_meaningful",
    "llm_paraphrase", "llm_rewrite",
)


class AugmentationError(ValueError):
    pass


@dataclass(frozen=True)
class AugmentedInstance:
    source_doc_id: str
    strategy: str
    document: Document
    frame: EventFrame
    moved_role: str | None = None
    rng_seed: int = 0


@dataclass(frozen=True)
class Mention:
    span: Span
    is_named_entity: bool
    text: str | None = None


@dataclass
class MappingReport:
    """Tallies of how many events/arguments survived span remapping."""

    events_total: int = 0
    events_mapped: int = 0
    args_total: int = 0
    args_mapped: int = 0
    drops: list[tuple[str, str, str | None, str]] = field(default_factory=list)

    def event_rate(self) -> float:
        return self.events_mapped / self.events_total if self.events_total else 0.0

    def arg_rate(self) -> float:
        return self.args_mapped / self.args_total if self.args_total else 0.0

    def update(self, other: "MappingReport") -> None:
        self.events_total += other.events_total
        self.events_mapped += other.events_mapped
        self.args_total += other.args_total
        self.args_mapped += other.args_mapped
        self.drops.extend(other.drops)


# --- span shift primitives -------------------------------------------------
#
# Both operate on global token indices.  Spans that overlap a deletion or
# straddle an insertion point cannot be shifted consistently; callers must
# avoid those edits (the boundary sampler filters them out).

def shift_for_deletion(span: Span, cut: Span) -> Span:
    """New coordinates of span after removing the tokens in cut."""
    if span.end < cut.start:
        return span
    if span.start > cut.end:
        return Span(span.start - len(cut), span.end - len(cut))
    raise AugmentationError(f"span {tuple(span)} overlaps deleted run {tuple(cut)}")


def shift_for_insertion(span: Span, at: int, length: int) -> Span:
    """New coordinates of span after inserting length tokens at position at."""
    if span.start >= at:
        return Span(span.start + length, span.end + length)
    if span.end < at:
        return span
    raise AugmentationError(f"insertion at {at} would split span {tuple(span)}")


def _delete_from_doc(doc: Document, cut: Span) -> list[list[str]]:
    """Sentence lists with the cut tokens removed; the cut must sit inside
    one sentence and may not empty it."""
    i = doc.sentence_of(cut.start)
    if doc.sentence_of(cut.end) != i:
        raise AugmentationError(
            f"cannot move span {tuple(cut)}: it crosses a sentence boundary"
        )
    start = doc.sentence_starts[i]
    la, lb = cut.start - start, cut.end - start
    sent = list(doc.sentences[i])
    remaining = sent[:la] + sent[lb + 1:]
    if not remaining:
        raise AugmentationError(
            f"cannot move span {tuple(cut)}: it is the whole sentence"
        )
    sentences = [list(s) for s in doc.sentences]
    sentences[i] = remaining
    return sentences


def _check_move(doc: Document, frame: EventFrame, role_index: int) -> tuple[str, Span]:
    try:
        role, arg = frame.arguments[role_index]
    except IndexError:
        raise AugmentationError(f"no argument at index {role_index}") from None
    if argument_distance(doc, frame, arg) != 0:
        raise AugmentationError(
            f"argument {role!r} at {tuple(arg)} is not intra-sentential"
        )
    if frame.trigger.overlaps(arg):
        raise AugmentationError(
            f"trigger {tuple(frame.trigger)} overlaps argument {tuple(arg)}"
        )
    return role, arg


def _shift_frame(frame: EventFrame, role_index: int, moved_span: Span,
                 shift) -> EventFrame:
    """Rebuild the frame applying shift() to every span except the moved one."""
    args = []
    for idx, (role, span) in enumerate(frame.arguments):
        args.append((role, moved_span if idx == role_index else shift(span)))
    return EventFrame(frame.event_id, shift(frame.trigger), frame.event_type,
                      tuple(args))


def move_tokens(doc: Document, span: Span, boundary: int):
    """Remove a token run and re-insert it at a sentence boundary.

    Boundary k is the point between sentence k-1 and sentence k; the moved
    tokens are appended to the end of sentence k-1 (prepended to sentence 0
    for k = 0), so the sentence count is preserved.  Returns the new
    sentence lists, the run's new span, and a shift function for every
    other span.
    """
    if not 0 <= boundary <= len(doc.sentences):
        raise AugmentationError(f"boundary {boundary} out of range")
    moved = list(doc.span_tokens(span))
    sentences = _delete_from_doc(doc, span)
    at = sum(len(s) for s in sentences[:boundary])
    if boundary > 0:
        sentences[boundary - 1] = sentences[boundary - 1] + moved
    else:
        sentences[0] = moved + sentences[0]
    new_span = Span(at, at + len(moved) - 1)

    def shift(other: Span) -> Span:
        return shift_for_insertion(shift_for_deletion(other, span), at, len(moved))

    return sentences, new_span, shift


def ss_plain(doc: Document, frame: EventFrame, role_index: int, boundary: int,
             seed: int = 0) -> AugmentedInstance:
    """Move an intra-sentential argument to a sentence boundary, verbatim.

    The gold span follows the moved tokens and all other spans are shifted
    consistently; the resulting text is expected to be ungrammatical.
    """
    role, arg = _check_move(doc, frame, role_index)
    sentences, new_span, shift = move_tokens(doc, arg, boundary)
    new_doc = Document.from_lists(
        f"{doc.doc_id}~ss_plain~{frame.event_id}~{role_index}", sentences)
    return AugmentedInstance(doc.doc_id, "ss_plain", new_doc,
                             _shift_frame(frame, role_index, new_span, shift),
                             moved_role=role, rng_seed=seed)


def ss_verbose(doc: Document, frame: EventFrame, role_index: int, boundary: int,
               seed: int = 0, keep_original: bool = False) -> AugmentedInstance:
    """Restate an intra-sentential argument in a templated sentence.

    A new sentence "The [role] of the event [trigger] is [argument] ." is
    inserted as sentence number boundary, and the gold span is re-pointed at
    the argument tokens inside it.  The original occurrence is removed
    unless keep_original is set.
    """
    if not 0 <= boundary <= len(doc.sentences):
        raise AugmentationError(f"boundary {boundary} out of range")
    role, arg = _check_move(doc, frame, role_index)
    trigger_tokens = list(doc.span_tokens(frame.trigger))
    arg_tokens = list(doc.span_tokens(arg))
    new_sentence = (["The"] + role.split() + ["of", "the", "event"]
                    + trigger_tokens + ["is"] + arg_tokens + ["."])
    arg_offset = 5 + len(role.split()) + len(trigger_tokens)

    if keep_original:
        sentences = [list(s) for s in doc.sentences]
        after_delete = lambda span: span
    else:
        sentences = _delete_from_doc(doc, arg)
        after_delete = lambda span: shift_for_deletion(span, arg)

    at = sum(len(s) for s in sentences[:boundary])
    sentences = sentences[:boundary] + [new_sentence] + sentences[boundary:]
    new_span = Span(at + arg_offset, at + arg_offset + len(arg_tokens) - 1)

    def shift(span: Span) -> Span:
        return shift_for_insertion(after_delete(span), at, len(new_sentence))

    new_doc = Document.from_lists(
        f"{doc.doc_id}~ss_verbose~{frame.event_id}~{role_index}", sentences)
    return AugmentedInstance(doc.doc_id, "ss_verbose", new_doc,
                             _shift_frame(frame, role_index, new_span, shift),
                             moved_role=role, rng_seed=seed)


def candidate_boundaries(doc: Document, frame: EventFrame, role_index: int,
                         strategy: str, keep_original: bool = False) -> list[int]:
    """Boundaries where the move is possible, preferring inter-sentential ones.

    Placements that leave the argument in the trigger's sentence are
    excluded whenever at least one alternative exists; boundaries where the
    shift machinery cannot keep every other span intact are always excluded.
    """
    build = {"ss_plain": ss_plain, "ss_verbose": ss_verbose}[strategy]
    kwargs = {"keep_original": keep_original} if strategy == "ss_verbose" else {}
    valid, nonzero = [], []
    for k in range(len(doc.sentences) + 1):
        try:
            inst = build(doc, frame, role_index, k, **kwargs)
        except AugmentationError:
            continue
        valid.append(k)
        moved = inst.frame.arguments[role_index][1]
        if argument_distance(inst.document, inst.frame, moved) != 0:
            nonzero.append(k)
    return nonzero if nonzero else valid


def qualifying_mentions(doc: Document, arg: Span,
                        chains: Sequence[Sequence[Mention]]) -> list[Mention]:
    """Inter-sentential mentions of the first chain containing the argument."""
    arg_sentence = doc.sentence_of(arg.start)
    for chain in chains:
        if not any(m.span.contains(arg) for m in chain):
            continue
        away = [m for m in chain
                if doc.sentence_of(m.span.start) != arg_sentence]
        if away:
            return away
    return []


def cr_augment(doc: Document, frame: EventFrame, role_index: int,
               chains: Sequence[Sequence[Mention]], mode: str,
               seed: int = 0) -> AugmentedInstance:
    """Re-point an intra-sentential argument at a coreferent mention in
    another sentence.  The document text is untouched.

    mode "random" picks uniformly among qualifying mentions; "meaningful"
    maximizes token count, breaking ties by named-entity flag and then
    earliest document order.
    """
    if mode not in ("random", "meaningful"):
        raise AugmentationError(f"unknown mode {mode!r}")
    role, arg = _check_move(doc, frame, role_index)
    for mention in (m for chain in chains for m in chain):
        doc.check_span(mention.span)
    candidates = qualifying_mentions(doc, arg, chains)
    if not candidates:
        raise AugmentationError(
            f"argument {role!r} at {tuple(arg)} has no coreference chain "
            "with an inter-sentential mention"
        )
    if mode == "random":
        chosen = random.Random(seed).choice(candidates)
    else:
        chosen = sorted(
            candidates,
            key=lambda m: (-len(m.span), not m.is_named_entity, m.span.start),
        )[0]

    strategy = f"cr_{mode}"
    new_doc = Document(
        f"{doc.doc_id}~{strategy}~{frame.event_id}~{role_index}", doc.sentences)
    new_frame = _shift_frame(frame, role_index, chosen.span, lambda s: s)
    return AugmentedInstance(doc.doc_id, strategy, new_doc, new_frame,
                             moved_role=role, rng_seed=seed)


def _occurrences(haystack: Sequence[str], needle: Sequence[str]) -> list[int]:
    lowered = [t.lower() for t in haystack]
    target = [t.lower() for t in needle]
    n = len(target)
    return [i for i in range(len(lowered) - n + 1) if lowered[i:i + n] == target]


def _nearest_occurrence(starts: list[int], new_total: int, old_start: int,
                        old_total: int) -> int:
    old_rel = old_start / old_total
    return min(starts, key=lambda s: (abs(s / new_total - old_rel), s))


def remap_spans(doc: Document, frame: EventFrame,
                rewritten_sentences: Sequence[Sequence[str]],
                strategy: str = "llm_rewrite",
                seed: int = 0) -> tuple[AugmentedInstance | None, MappingReport]:
    """Map a frame's spans into an externally rewritten document.

    Each span's token sequence is searched case-insensitively in the
    rewritten token stream; among multiple occurrences the one whose
    relative position is nearest the original's wins (earliest on ties).
    An unmapped trigger drops the whole instance; an unmapped argument
    drops just that argument.  Drops are reported, never raised.
    """
    report = MappingReport(events_total=1, args_total=len(frame.arguments))
    new_doc = Document.from_lists(
        f"{doc.doc_id}~{strategy}~{frame.event_id}", rewritten_sentences)
    flat = new_doc.tokens
    old_total = doc.n_tokens

    def find(span: Span) -> Span | None:
        needle = doc.span_tokens(span)
        starts = _occurrences(flat, needle)
        if not starts:
            return None
        best = _nearest_occurrence(starts, new_doc.n_tokens, span.start, old_total)
        return Span(best, best + len(needle) - 1)

    new_trigger = find(frame.trigger)
    if new_trigger is None:
        report.drops.append((doc.doc_id, frame.event_id, None, "trigger_unmapped"))
        return None, report
    report.events_mapped = 1

    new_args = []
    for role, span in frame.arguments:
        new_span = find(span)
        if new_span is None:
            report.drops.append((doc.doc_id, frame.event_id, role, "argument_unmapped"))
            continue
        report.args_mapped += 1
        new_args.append((role, new_span))

    new_frame = EventFrame(frame.event_id, new_trigger, frame.event_type,
                           tuple(new_args))
    inst = AugmentedInstance(doc.doc_id, strategy, new_doc, new_frame,
                             rng_seed=seed)
    return inst, report


def build_rewrite_prompt(doc: Document, frame: EventFrame) -> str:
    """Prompt asking an LLM to rewrite the document while keeping the
    trigger word and every argument, preceded by the story text."""
    if not frame.arguments:
        raise AugmentationError("frame has no arguments to preserve")
    story = " ".join(" ".join(sent) for sent in doc.sentences)
    trigger = doc.span_text(frame.trigger)
    ordered = sorted(frame.arguments, key=lambda ra: (ra[1].start, ra[1].end))
    args = ", ".join(doc.span_text(span) for _, span in ordered)
    return (
        f"{story}\n\n"
        f"Rewrite the story like a newspaper article in {len(doc.sentences)} "
        f"sentences. Include the event triggering word {trigger} and event "
        f"arguments {args} in the generated article."
    )


def load_chains(path: str | Path,
                corpus: Corpus | None = None) -> dict[str, list[list[Mention]]]:
    """Read coreference chains: JSON-lines {doc_id, chains: [[{span, ne}]]}."""
    out: dict[str, list[list[Mention]]] = {}
    for lineno, record in read_jsonl(path):
        try:
            doc_id = record["doc_id"]
            raw_chains = record["chains"]
        except (KeyError, TypeError):
            raise AugmentationError(f"{path}:{lineno}: missing field") from None
        doc = corpus.document(doc_id) if corpus is not None else None
        chains = []
        for raw_chain in raw_chains:
            chain = []
            for m in raw_chain:
                span = Span(int(m["span"][0]), int(m["span"][1]))
                text = None
                if doc is not None:
                    doc.check_span(span)
                    text = doc.span_text(span)
                chain.append(Mention(span, bool(m.get("ne", False)), text))
            chains.append(chain)
        out[doc_id] = chains
    return out


def load_rewrites(path: str | Path) -> dict[tuple[str, str], tuple[tuple[str, ...], ...]]:
    """Read rewritten documents: JSON-lines {doc_id, event_id, sentences}."""
    out = {}
    for lineno, record in read_jsonl(path):
        try:
            key = (record["doc_id"], record["event_id"])
            sentences = tuple(tuple(s) for s in record["sentences"])
        except (KeyError, TypeError):
            raise AugmentationError(f"{path}:{lineno}: missing field") from None
        out[key] = sentences
    return out


@dataclass
class AugmentConfig:
    chains: dict[str, list[list[Mention]]] | None = None
    rewrites: dict[tuple[str, str], tuple[tuple[str, ...], ...]] | None = None
    verbose_keep_original: bool = False


def _intra_indices(doc: Document, frame: EventFrame) -> list[int]:
    return [i for i, (_, span) in enumerate(frame.arguments)
            if argument_distance(doc, frame, span) == 0]


def augment_corpus(corpus: Iterable[tuple[Document, list[EventFrame]]],
                   strategy: str, config: AugmentConfig | None = None,
                   seed: int = 0) -> tuple[list[AugmentedInstance], MappingReport]:
    """Run one strategy over a whole corpus.

    ss_* yield one instance per intra-sentential argument, cr_* one per
    argument with a qualifying cross-sentence chain, llm_* one per frame
    whose trigger survives remapping.  The mapping report is only populated
    by the llm_* strategies.
    """
    if strategy not in STRATEGIES:
        raise AugmentationError(
            f"unknown strategy {strategy!r}; expected one of {', '.join(STRATEGIES)}")
    config = config or AugmentConfig()
    instances: list[AugmentedInstance] = []
    report = MappingReport()

    if strategy in ("cr_random", "cr_meaningful") and config.chains is None:
        raise AugmentationError(f"{strategy} requires coreference chains")
    if strategy in ("llm_paraphrase", "llm_rewrite") and config.rewrites is None:
        raise AugmentationError(f"{strategy} requires rewritten documents")

    for doc, frames in corpus:
        for frame in frames:
            if strategy in ("ss_plain", "ss_verbose"):
                for idx in _intra_indices(doc, frame):
                    inst_seed = substream(seed, strategy, doc.doc_id,
                                          frame.event_id, idx)
                    kwargs = ({"keep_original": config.verbose_keep_original}
                              if strategy == "ss_verbose" else {})
                    boundaries = candidate_boundaries(
                        doc, frame, idx, strategy, **kwargs)
                    if not boundaries:
                        logger.warning("no usable boundary for %s arg %d of %s",
                                       strategy, idx, frame.event_id)
                        continue
                    boundary = random.Random(inst_seed).choice(boundaries)
                    build = ss_plain if strategy == "ss_plain" else ss_verbose
                    instances.append(build(doc, frame, idx, boundary,
                                           seed=inst_seed, **kwargs))
            elif strategy in ("cr_random", "cr_meaningful"):
                chains = config.chains.get(doc.doc_id, [])
                mode = strategy.removeprefix("cr_")
                for idx in _intra_indices(doc, frame):
                    _, arg = frame.arguments[idx]
                    if not qualifying_mentions(doc, arg, chains):
                        continue
                    inst_seed = substream(seed, strategy, doc.doc_id,
                                          frame.event_id, idx)
                    instances.append(cr_augment(doc, frame, idx, chains, mode,
                                                seed=inst_seed))
            else:
                rewrite = config.rewrites.get((doc.doc_id, frame.event_id))
                if rewrite is None:
                    continue
                inst, entry = remap_spans(doc, frame, rewrite, strategy,
                                          seed=substream(seed, strategy,
                                                         doc.doc_id,
                                                         frame.event_id))
                report.update(entry)
                if inst is not None:
                    instances.append(inst)
    return instances, report


def augmented_to_record(inst: AugmentedInstance) -> dict:
    """Serialize to the corpus JSON-lines schema plus provenance fields."""
    frame = inst.frame
    trig = [frame.trigger.start, frame.trigger.end,
            [[frame.event_type, 1.0]]]
    links = [[[frame.trigger.start, frame.trigger.end], [s.start, s.end], role]
             for role, s in frame.arguments]
    return {
        "doc_key": inst.document.doc_id,
        "sentences": [list(s) for s in inst.document.sentences],
        "evt_triggers": [trig],
        "gold_evt_links": links,
        "strategy": inst.strategy,
        "source_doc_id": inst.source_doc_id,
    }
