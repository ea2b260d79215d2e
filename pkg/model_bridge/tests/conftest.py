"""Fixtures: a deterministic tiny extractive-QA checkpoint and test clients.

The checkpoint is a randomly initialized miniature BERT QA head with a
word-level tokenizer, built locally so the protocol and alignment tests run
without downloading anything.  Any real extractive QA checkpoint drops in
via --model / ServerConfig.model.
"""

from __future__ import annotations

import json
from pathlib import Path

import pytest
import torch
from fastapi.testclient import TestClient
from tokenizers import Tokenizer, models, pre_tokenizers, processors
from transformers import BertConfig, BertForQuestionAnswering, PreTrainedTokenizerFast

from model_bridge.engine import ServerConfig
from model_bridge.server import create_app

# recorded by the primary suite; the wire boundary under test
PRIMARY_FIXTURES = Path(__file__).resolve().parents[2] / "tests" / "fixtures"

_VOCAB_WORDS = (
    "the a an of in on for with is was said told denied made moved held "
    "importing oil trucks territory allegations officials russian russia "
    "bilal erdogan syria and iraq who what where how event transporter "
    "artifact vehicle origin destination investigation promised full "
    "tuesday new claims baseless called after they ."
).split()


def build_tiny_checkpoint(path: Path) -> None:
    vocab = {"[PAD]": 0, "[UNK]": 1, "[CLS]": 2, "[SEP]": 3}
    for word in _VOCAB_WORDS:
        vocab.setdefault(word, len(vocab))
    tok = Tokenizer(models.WordLevel(vocab, unk_token="[UNK]"))
    tok.pre_tokenizer = pre_tokenizers.WhitespaceSplit()
    tok.post_processor = processors.TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B:1 [SEP]:1",
        special_tokens=[("[CLS]", 2), ("[SEP]", 3)])
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tok, unk_token="[UNK]", pad_token="[PAD]",
        cls_token="[CLS]", sep_token="[SEP]")

    config = BertConfig(
        vocab_size=len(vocab), hidden_size=32, num_hidden_layers=2,
        num_attention_heads=2, intermediate_size=64,
        max_position_embeddings=512)
    torch.manual_seed(20240501)
    model = BertForQuestionAnswering(config)
    model.save_pretrained(path)
    fast.save_pretrained(path)


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory) -> str:
    path = tmp_path_factory.mktemp("tiny-qa-checkpoint")
    build_tiny_checkpoint(path)
    return str(path)


@pytest.fixture(scope="session")
def server_config(tiny_checkpoint) -> ServerConfig:
    return ServerConfig(model=tiny_checkpoint, max_batch_size=8, max_length=256)


@pytest.fixture(scope="session")
def client(server_config):
    app = create_app(server_config)
    with TestClient(app) as test_client:
        yield test_client


@pytest.fixture(scope="session")
def recorded_requests() -> dict:
    return json.loads(
        (PRIMARY_FIXTURES / "protocol_requests.json").read_text())


@pytest.fixture(scope="session")
def recorded_responses() -> dict:
    return json.loads(
        (PRIMARY_FIXTURES / "protocol_responses.json").read_text())
