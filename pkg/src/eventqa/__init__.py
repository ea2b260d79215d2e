"""Event-argument extraction as extractive question answering.

Converts document-level event-argument annotations into QA datasets,
augments them toward inter-sentential arguments, assembles merged/blended
training sets, builds prompts, brokers answers from pluggable backends, and
scores predictions with exact-match evaluation and diagnostic breakdowns.
"""

__version__ = "0.1.0"

from .corpus import (  # noqa: F401
    Corpus,
    CorpusError,
    CorpusStats,
    Document,
    EventFrame,
    Ontology,
    Span,
    argument_distance,
    corpus_stats,
    load_corpus,
    sentence_of,
)
from .question_gen import (  # noqa: F401
    NO_ANSWER,
    QAInstance,
    WhTable,
    ingest_external_qa,
    ingest_transformer_questions,
    template_questions,
)
