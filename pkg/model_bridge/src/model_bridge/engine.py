"""Span prediction with a HuggingFace extractive QA model.

The wire protocol talks whitespace tokens; the model talks subwords.  The
context is rendered as a single space-joined string, the model predicts a
subword span via start/end logits, and the predicted character range is
mapped back to the smallest covering whitespace-token span.  A request
whose no-answer score dominates every span score yields null.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import torch
from transformers import AutoModelForQuestionAnswering, AutoTokenizer


@dataclass
class ServerConfig:
    model: str
    port: int = 8765
    max_batch_size: int = 16
    device: str = "cpu"
    max_length: int = 384
    max_answer_subwords: int = 30
    null_threshold: float = 0.0

    def __post_init__(self) -> None:
        if self.max_batch_size < 1:
            raise ValueError("max_batch_size must be >= 1")


def join_tokens(context: Sequence[Sequence[str]]) -> tuple[str, list[tuple[int, int]]]:
    """Space-join the context tokens; return the text and each token's
    [start, end) character range within it."""
    chunks: list[str] = []
    ranges: list[tuple[int, int]] = []
    offset = 0
    for sentence in context:
        for token in sentence:
            if chunks:
                offset += 1  # joining space
            chunks.append(token)
            ranges.append((offset, offset + len(token)))
            offset += len(token)
    return " ".join(chunks), ranges


def covering_token_span(char_start: int, char_end: int,
                        ranges: Sequence[tuple[int, int]]) -> tuple[int, int] | None:
    """Smallest run of whitespace tokens covering [char_start, char_end)."""
    hit = [i for i, (s, e) in enumerate(ranges)
           if s < char_end and e > char_start]
    if not hit:
        return None
    return hit[0], hit[-1]


class QAEngine:
    def __init__(self, config: ServerConfig):
        self.config = config
        self.tokenizer = AutoTokenizer.from_pretrained(config.model)
        self.model = AutoModelForQuestionAnswering.from_pretrained(config.model)
        self.model.to(config.device)
        self.model.eval()

    def answer_batch(self, requests: Sequence[dict]) -> list[dict]:
        out: list[dict] = []
        step = self.config.max_batch_size
        for i in range(0, len(requests), step):
            out.extend(self._answer_chunk(requests[i:i + step]))
        return out

    def _answer_chunk(self, chunk: Sequence[dict]) -> list[dict]:
        texts = []
        token_ranges = []
        for req in chunk:
            text, ranges = join_tokens(req["context"])
            texts.append(text)
            token_ranges.append(ranges)

        enc = self.tokenizer(
            [req["question"] for req in chunk],
            texts,
            truncation="only_second",
            max_length=self.config.max_length,
            padding=True,
            return_offsets_mapping=True,
            return_tensors="pt",
        )
        offsets = enc.pop("offset_mapping")
        model_inputs = {k: v.to(self.config.device) for k, v in enc.items()}
        with torch.no_grad():
            output = self.model(**model_inputs)

        responses = []
        for i, req in enumerate(chunk):
            span = self._best_span(
                sequence_ids=enc.sequence_ids(i),
                start_logits=output.start_logits[i],
                end_logits=output.end_logits[i],
                offsets=offsets[i],
                token_ranges=token_ranges[i],
            )
            responses.append({
                "instance_id": req["instance_id"],
                "answer": None if span is None
                else {"start": span[0], "end": span[1]},
            })
        return responses

    def _best_span(self, sequence_ids, start_logits, end_logits,
                   offsets, token_ranges):
        context_positions = [
            pos for pos, seq in enumerate(sequence_ids)
            if seq == 1 and offsets[pos][1] > offsets[pos][0]
        ]
        if not context_positions:
            return None
        # position 0 is [CLS] for BERT-family QA heads; its score is the
        # no-answer score
        null_score = (start_logits[0] + end_logits[0]).item()

        best_score = None
        best = None
        # rank a bounded number of start/end candidates, standard SQuAD-style
        k = min(20, len(context_positions))
        positions = torch.tensor(context_positions)
        start_top = positions[
            start_logits[positions].topk(k).indices].tolist()
        end_top = positions[
            end_logits[positions].topk(k).indices].tolist()
        for s in start_top:
            for e in end_top:
                if e < s or e - s + 1 > self.config.max_answer_subwords:
                    continue
                score = (start_logits[s] + end_logits[e]).item()
                if best_score is None or score > best_score:
                    best_score, best = score, (s, e)
        if best is None or null_score > best_score + self.config.null_threshold:
            return None
        char_start = int(offsets[best[0]][0])
        char_end = int(offsets[best[1]][1])
        return covering_token_span(char_start, char_end, token_ranges)
