"""Seeded synthetic corpora for tests, demos, and model-free pipeline runs.

The generator builds RAMS-shaped documents over a small invented ontology
and keeps its own running tally of documents, events, and intra-/inter-
sentential arguments while it places spans.  That tally is independent
bookkeeping: tests can freeze it and check the corpus loader and statistics
code against it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

from .augmentation import Mention
from .corpus import Document, EventFrame, Ontology, Span
from .util import write_jsonl

MINI_ONTOLOGY: dict[str, tuple[str, ...]] = {
    "movement.transportartifact.receiveimport":
        ("transporter", "artifact", "vehicle", "origin", "destination"),
    "government.agreements.violateagreement":
        ("violator", "otherparticipant", "place"),
    "conflict.attack.airstrike":
        ("attacker", "target", "instrument", "place"),
    "transaction.transfermoney":
        ("giver", "recipient", "beneficiary", "money", "place"),
    "personnel.startposition.hiring":
        ("employee", "placeofemployment", "place"),
    "justice.arrestjaildetain.arrestjaildetain":
        ("jailer", "detainee", "crime", "place"),
    "contact.commitmentpromiseexpressintent":
        ("communicator", "recipient", "place"),
    "disaster.accidentcrash.accidentcrash":
        ("driverpassenger", "vehicle", "crashobject", "place"),
}

_FILLER = (
    "the a an of in on for with over under after before toward against "
    "officials ministry council region border town market port convoy press "
    "statement report deal plan week month winter crisis summit talks votes "
    "budget reform protest strike blaze survey audit ruling decree treaty "
    "shipment cargo escort patrol outpost depot refinery pipeline bridge "
    "said told warned denied praised urged began ended grew fell stalled "
    "quietly sharply barely openly again still soon later nearby abroad"
).split()

_ENTITIES = (
    "Navarro Okafor Lindqvist Marchetti Petrova Ono Castillo Brandt "
    "Osei Varga Kato Moreau Iversen Duarte Haddad Kovacs"
).split()

_PLACES = (
    "Valdoria Kestrel Bay Port Amsel Norvik Tessin Qaruna Meridia Oslograd"
).split()

_TRIGGERS = (
    "importing attacked hired jailed promised crashed transferred violated "
    "smuggled bombed appointed detained pledged collided paid breached"
).split()


@dataclass
class SynthCounts:
    """Tally kept while generating, independent of the corpus loader."""

    n_documents: int = 0
    n_events: int = 0
    n_arguments: int = 0
    n_intra: int = 0
    n_inter: int = 0


def ontology() -> Ontology:
    return Ontology({k: tuple(v) for k, v in MINI_ONTOLOGY.items()})


def _free_run(rng: random.Random, occupied: set[int], length: int,
              span_len: int) -> int | None:
    candidates = [
        i for i in range(length - span_len + 1)
        if all(j not in occupied for j in range(i, i + span_len))
    ]
    return rng.choice(candidates) if candidates else None


def make_corpus(n_docs: int, seed: int = 0, intra_bias: float = 0.7,
                chain_rate: float = 0.6, repeat_rate: float = 0.1):
    """Generate documents, frames, coreference chains, and the tally.

    Returns (pairs, chains, counts) where pairs feed Corpus(), chains is
    {doc_id: [[Mention, ...], ...]}, and counts is the SynthCounts
    bookkeeping.  repeat_rate=0 avoids repeated roles, which an extractive
    one-span-per-role system can never fully recall.
    """
    rng = random.Random(seed)
    counts = SynthCounts()
    pairs: list[tuple[Document, list[EventFrame]]] = []
    chains: dict[str, list[list[Mention]]] = {}
    types = sorted(MINI_ONTOLOGY)

    for d in range(n_docs):
        doc_id = f"synth-{seed}-{d:04d}"
        n_sents = rng.choice((3, 4, 5, 5, 5, 6))
        sentences = [[rng.choice(_FILLER) for _ in range(rng.randint(7, 13))]
                     for _ in range(n_sents)]
        occupied: list[set[int]] = [set() for _ in range(n_sents)]
        starts = [sum(len(s) for s in sentences[:i]) for i in range(n_sents)]

        frames: list[EventFrame] = []
        doc_chains: list[list[Mention]] = []
        for e in range(rng.randint(1, 3)):
            event_type = rng.choice(types)
            t_sent = rng.randrange(n_sents)
            t_pos = _free_run(rng, occupied[t_sent], len(sentences[t_sent]), 1)
            if t_pos is None:
                continue
            sentences[t_sent][t_pos] = rng.choice(_TRIGGERS)
            occupied[t_sent].add(t_pos)
            trigger = Span(starts[t_sent] + t_pos, starts[t_sent] + t_pos)

            counts.n_events += 1
            roles = list(MINI_ONTOLOGY[event_type])
            n_args = rng.randint(1, min(4, len(roles)))
            chosen = rng.sample(roles, n_args)
            if n_args >= 2 and rng.random() < repeat_rate:
                chosen.append(chosen[0])  # occasional repeated role
            args: list[tuple[str, Span]] = []
            for role in chosen:
                if rng.random() < intra_bias:
                    target = t_sent
                else:
                    target = min(max(t_sent + rng.choice((-2, -1, 1, 2)), 0),
                                 n_sents - 1)
                span_len = rng.randint(1, 2)
                pos = _free_run(rng, occupied[target], len(sentences[target]),
                                span_len)
                if pos is None:
                    continue
                pool = _PLACES if role.endswith("place") or role in (
                    "origin", "destination") else _ENTITIES
                for j in range(span_len):
                    sentences[target][pos + j] = rng.choice(pool)
                    occupied[target].add(pos + j)
                span = Span(starts[target] + pos, starts[target] + pos + span_len - 1)
                args.append((role, span))
                counts.n_arguments += 1
                if target == t_sent:
                    counts.n_intra += 1
                else:
                    counts.n_inter += 1

                if target == t_sent and rng.random() < chain_rate:
                    mention_sents = [i for i in range(n_sents) if i != t_sent]
                    if mention_sents:
                        m_sent = rng.choice(mention_sents)
                        m_pos = _free_run(rng, occupied[m_sent],
                                          len(sentences[m_sent]), 1)
                        if m_pos is not None:
                            occupied[m_sent].add(m_pos)
                            sentences[m_sent][m_pos] = rng.choice(pool)
                            mention = Mention(
                                Span(starts[m_sent] + m_pos, starts[m_sent] + m_pos),
                                rng.random() < 0.5)
                            doc_chains.append([Mention(span, True), mention])

            frames.append(EventFrame(f"{doc_id}#ev{e}", trigger, event_type,
                                     tuple(args)))

        doc = Document.from_lists(doc_id, sentences)
        pairs.append((doc, frames))
        chains[doc_id] = doc_chains
        counts.n_documents += 1

    return pairs, chains, counts


def corpus_to_records(pairs) -> list[dict]:
    records = []
    for doc, frames in pairs:
        records.append({
            "doc_key": doc.doc_id,
            "sentences": [list(s) for s in doc.sentences],
            "evt_triggers": [
                [f.trigger.start, f.trigger.end, [[f.event_type, 1.0]]]
                for f in frames
            ],
            "gold_evt_links": [
                [[f.trigger.start, f.trigger.end], [s.start, s.end], role]
                for f in frames for role, s in f.arguments
            ],
        })
    return records


def chains_to_records(chains) -> list[dict]:
    return [
        {"doc_id": doc_id,
         "chains": [[{"span": [m.span.start, m.span.end], "ne": m.is_named_entity}
                     for m in chain] for chain in doc_chains]}
        for doc_id, doc_chains in chains.items()
    ]


def write_fixture(outdir: str | Path, n_docs: int = 50, seed: int = 20240501) -> SynthCounts:
    """Write corpus.jsonl, chains.jsonl, and ontology.tsv; return the tally."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    pairs, chains, counts = make_corpus(n_docs, seed)
    write_jsonl(outdir / "corpus.jsonl", corpus_to_records(pairs))
    write_jsonl(outdir / "chains.jsonl", chains_to_records(chains))
    with open(outdir / "ontology.tsv", "w", encoding="utf-8") as f:
        for event_type in sorted(MINI_ONTOLOGY):
            f.write("\t".join([event_type, *MINI_ONTOLOGY[event_type]]) + "\n")
    return counts
