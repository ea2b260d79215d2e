"""Shared fixtures: the worked-example documents and the bundled corpus."""

from __future__ import annotations

from pathlib import Path

import pytest

from eventqa.augmentation import Mention
from eventqa.corpus import Corpus, Document, EventFrame, Ontology, Span
from eventqa.question_gen import WhTable
from eventqa.synth import MINI_ONTOLOGY

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "eventqa" / "data"
SYNTH_DIR = DATA_DIR / "synthetic"


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    print(f"\nACCEPTANCE {name}: {report.outcome.upper()}", flush=True)


@pytest.fixture(scope="session")
def ontology() -> Ontology:
    return Ontology({k: tuple(v) for k, v in MINI_ONTOLOGY.items()})


@pytest.fixture(scope="session")
def wh_table() -> WhTable:
    return WhTable.builtin()


# --- "importing" document: trigger in sentence 2, transporter and artifact
# intra-sentential, vehicle and origin one sentence before, destination
# absent.  "oil" and "trucks" each occur twice so the gold span is not the
# first occurrence.

FIG1_SENTENCES = [
    "Russian officials made new allegations on Tuesday .".split(),
    "They said trucks moved oil from territory ISIS held in Syria and Iraq .".split(),
    "Bilal Erdogan denied importing oil and called the claims baseless .".split(),
    "Russia said it destroyed 500 trucks with airstrikes .".split(),
    "Officials promised a full investigation .".split(),
]


@pytest.fixture(scope="session")
def fig1_doc() -> Document:
    return Document.from_lists("fig1", FIG1_SENTENCES)


@pytest.fixture(scope="session")
def fig1_frame() -> EventFrame:
    return EventFrame(
        "fig1#ev0",
        trigger=Span(25, 25),  # importing
        event_type="movement.transportartifact.receiveimport",
        arguments=(
            ("vehicle", Span(10, 10)),       # trucks (sentence 1)
            ("origin", Span(18, 20)),        # Syria and Iraq (sentence 1)
            ("transporter", Span(22, 23)),   # Bilal Erdogan (sentence 2)
            ("artifact", Span(26, 26)),      # oil (sentence 2)
        ),
    )


@pytest.fixture(scope="session")
def fig1_corpus(fig1_doc, fig1_frame) -> Corpus:
    return Corpus([(fig1_doc, [fig1_frame])])


# --- "agreements" document from the augmentation worked examples: trigger,
# violator (Clinton), and otherparticipant (Iran) all in sentence 2.

APPENDIX_SENTENCES = [s.split() for s in (
    "As Secretary of State , Hillary Clinton was a hawk on the Iranian "
    "nuclear issue .",
    "In 2009 - 2010 , when Iran first indicated a willingness to compromise "
    ", she led the opposition to any negotiated settlement and pushed for "
    "punishing sanctions .",
    "To clear the route for sanctions , Clinton helped sink agreements "
    "tentatively negotiated with Iran to ship most of its low - enriched "
    "uranium out of the country .",
    "In 2009 , Iran was refining uranium only to the level of about 3 - 4 "
    "percent , as needed for energy production .",
    "Its negotiators offered to swap much of that for nuclear isotopes for "
    "medical research .",
)]

# GPT-style rewrite of the same story, whitespace-tokenized exactly as a
# completion client would hand it back.
APPENDIX_REWRITE = [s.split() for s in (
    "Secretary of State Hillary Clinton has taken a hard line against "
    "Iran's nuclear ambitions, recently thwarting agreements tentatively "
    "negotiated between the two countries.",
    "Clinton has pushed for punishing sanctions, as she argued that any "
    "negotiated settlement was not enough to ensure Iran would not pursue "
    "nuclear weapons.",
    "Her opposition to the agreements was based on Iran's offer to swap its "
    "low-enriched uranium for nuclear isotopes, which she felt was not "
    "sufficient to prevent their potential proliferation.",
    "Iran initially sought to refine the uranium to the levels necessary "
    "for energy production, but Clinton insisted that the sanctions remain "
    "in place.",
    "As the situation between Iran and the United States continues to "
    "evolve, Clinton's hard-line stance on the Iranian nuclear issue "
    "remains.",
)]

# Sentence-level paraphrase of the same story (keeps every sentence count).
APPENDIX_PARAPHRASE = [s.split() for s in (
    "Hillary Clinton was a strong supporter of the Iranian nuclear issue "
    "as Secretary of State .",
    "She led the opposition to any negotiated settlement and pushed for "
    "punishing sanctions after Iran indicated a willingness to compromise .",
    "Clinton helped sink agreements that would have allowed Iran to ship "
    "most of its low - enriched uranium out of the country .",
    "Iran only refined about 3 - 4 percent of its nuclear material in 2009 "
    ", as needed for energy production .",
    "Much of that was offered to be used for medical research .",
)]


@pytest.fixture(scope="session")
def appendix_doc() -> Document:
    return Document.from_lists("appendixc", APPENDIX_SENTENCES)


@pytest.fixture(scope="session")
def appendix_frame() -> EventFrame:
    return EventFrame(
        "appendixc#ev0",
        trigger=Span(54, 54),  # agreements
        event_type="government.agreements.violateagreement",
        arguments=(
            ("violator", Span(51, 51)),          # Clinton (sentence 2)
            ("otherparticipant", Span(58, 58)),  # Iran (sentence 2)
        ),
    )


@pytest.fixture(scope="session")
def appendix_chains() -> list[list[Mention]]:
    # Clinton: Hillary Clinton (s0), she (s1), Clinton (s2)
    # Iran: Iran (s1), Iran (s2), its (s2), the country (s2), Iran (s3)
    return [
        [Mention(Span(5, 6), True), Mention(Span(30, 30), False),
         Mention(Span(51, 51), True)],
        [Mention(Span(22, 22), True), Mention(Span(58, 58), True),
         Mention(Span(63, 63), False), Mention(Span(70, 71), False),
         Mention(Span(76, 76), True)],
    ]


@pytest.fixture(scope="session")
def synth_corpus(ontology) -> Corpus:
    return Corpus.load(SYNTH_DIR / "corpus.jsonl", ontology)
