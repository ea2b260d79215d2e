"""Exact-match scoring with distance, role, event, and confusion breakdowns.

A prediction is a true positive only when its (document, event, role, span)
tuple equals a gold tuple exactly.  Gold tuples for a repeated role are
consumed greedily in document order.  Diagnostics bucket results by the
sentence distance between argument and trigger, per role, per event type,
and tabulate role confusions over span-correct predictions, plus an
automated approximation of the common error categories.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .corpus import Corpus, Ontology, Span, argument_distance
from .util import read_jsonl, write_jsonl

DISTANCE_BUCKETS = ("-2", "-1", "0", "+1", "+2", "other")

# Categories from the qualitative analysis that need human judgment and are
# therefore not tagged automatically.
UNAUTOMATED_CATEGORIES = ("alternatives", "distractors", "annotation_errors")


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class Prediction:
    doc_id: str
    event_id: str
    role: str
    span: Span | None


class PredictionSet:
    """Predictions keyed by (doc_id, event_id, role); one span per role."""

    def __init__(self, entries: Iterable[Prediction]):
        self.entries = list(entries)
        self.by_key: dict[tuple[str, str, str], Prediction] = {}
        for p in self.entries:
            key = (p.doc_id, p.event_id, p.role)
            if key in self.by_key:
                raise EvaluationError(f"duplicate prediction for {key}")
            self.by_key[key] = p

    @classmethod
    def load(cls, path: str | Path) -> "PredictionSet":
        entries = []
        for lineno, record in read_jsonl(path):
            try:
                span = record["span"]
                entries.append(Prediction(
                    record["doc_id"], record["event_id"], record["role"],
                    None if span is None else Span(int(span[0]), int(span[1]))))
            except (KeyError, TypeError):
                raise EvaluationError(f"{path}:{lineno}: malformed prediction") from None
        return cls(entries)

    def save(self, path: str | Path, manifest: dict | None = None) -> None:
        write_jsonl(path, (
            {"doc_id": p.doc_id, "event_id": p.event_id, "role": p.role,
             "span": None if p.span is None else [p.span.start, p.span.end]}
            for p in self.entries), manifest)


def _f1(precision: float, recall: float) -> float:
    return (2 * precision * recall / (precision + recall)
            if precision + recall > 0 else 0.0)


def _prf(tp: int, n_pred: int, n_gold: int) -> tuple[float, float, float]:
    p = tp / n_pred if n_pred else 0.0
    r = tp / n_gold if n_gold else 0.0
    return p, r, _f1(p, r)


@dataclass(frozen=True)
class BucketScore:
    precision: float
    recall: float
    f1: float
    support: int
    tp: int = 0
    fp: int = 0

    def to_json(self) -> dict:
        return {"precision": self.precision, "recall": self.recall,
                "f1": self.f1, "support": self.support,
                "tp": self.tp, "fp": self.fp}


@dataclass
class EvalReport:
    precision: float
    recall: float
    f1: float
    n_gold: int
    n_predicted: int
    n_correct: int
    zero_predictions: bool
    by_distance: dict[str, BucketScore] = field(default_factory=dict)
    by_role: dict[str, BucketScore] = field(default_factory=dict)
    by_event: dict[str, float] = field(default_factory=dict)
    confusion: dict[str, dict[str, int]] = field(default_factory=dict)
    error_tags: dict[str, int] = field(default_factory=dict)
    unautomated_categories: tuple[str, ...] = UNAUTOMATED_CATEGORIES

    def to_json(self) -> dict:
        return {
            "precision": self.precision, "recall": self.recall, "f1": self.f1,
            "n_gold": self.n_gold, "n_predicted": self.n_predicted,
            "n_correct": self.n_correct,
            "zero_predictions": self.zero_predictions,
            "by_distance": {k: v.to_json() for k, v in self.by_distance.items()},
            "by_role": {k: v.to_json() for k, v in self.by_role.items()},
            "by_event": dict(self.by_event),
            "confusion": {g: dict(row) for g, row in self.confusion.items()},
            "error_tags": dict(self.error_tags),
            "unautomated_categories": list(self.unautomated_categories),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "EvalReport":
        def bucket(d: dict) -> BucketScore:
            return BucketScore(d["precision"], d["recall"], d["f1"],
                               d["support"], d.get("tp", 0), d.get("fp", 0))
        return cls(
            precision=obj["precision"], recall=obj["recall"], f1=obj["f1"],
            n_gold=obj["n_gold"], n_predicted=obj["n_predicted"],
            n_correct=obj["n_correct"],
            zero_predictions=obj["zero_predictions"],
            by_distance={k: bucket(v) for k, v in obj["by_distance"].items()},
            by_role={k: bucket(v) for k, v in obj["by_role"].items()},
            by_event=dict(obj["by_event"]),
            confusion={g: dict(row) for g, row in obj["confusion"].items()},
            error_tags=dict(obj["error_tags"]),
            unautomated_categories=tuple(obj.get("unautomated_categories", ())),
        )


def bucket_of(distance: int) -> str:
    if -2 <= distance <= 2:
        return "0" if distance == 0 else f"{distance:+d}"
    return "other"


@dataclass
class _GoldArg:
    doc_id: str
    event_id: str
    event_type: str
    role: str
    span: Span
    distance: int
    consumed: bool = False


@dataclass
class _Join:
    """Shared gold/prediction alignment used by every scoring operation."""

    gold: list[_GoldArg]
    by_key: dict[tuple[str, str, str], list[_GoldArg]]
    tp: list[tuple[Prediction, _GoldArg]]
    fp: list[Prediction]
    n_span_predictions: int


def _align(corpus: Corpus, predictions: PredictionSet,
           ontology: Ontology | None = None) -> _Join:
    gold: list[_GoldArg] = []
    by_key: dict[tuple[str, str, str], list[_GoldArg]] = {}
    for doc, frames in corpus:
        for frame in frames:
            for role, span in frame.arguments:
                arg = _GoldArg(doc.doc_id, frame.event_id, frame.event_type,
                               role, span, argument_distance(doc, frame, span))
                gold.append(arg)
                by_key.setdefault((doc.doc_id, frame.event_id, role), []).append(arg)
    for args in by_key.values():
        args.sort(key=lambda a: (a.span.start, a.span.end))

    tp: list[tuple[Prediction, _GoldArg]] = []
    fp: list[Prediction] = []
    n_span_predictions = 0
    for pred in predictions.entries:
        frame = corpus.frame(pred.doc_id, pred.event_id)  # raises on dangling refs
        if ontology is not None and pred.role not in ontology.licensed_roles(frame.event_type):
            raise EvaluationError(
                f"predicted role {pred.role!r} not licensed for {frame.event_type!r}")
        if pred.span is None:
            continue
        n_span_predictions += 1
        matched = None
        for arg in by_key.get((pred.doc_id, pred.event_id, pred.role), []):
            if not arg.consumed and arg.span == pred.span:
                matched = arg
                break
        if matched is not None:
            matched.consumed = True
            tp.append((pred, matched))
        else:
            fp.append(pred)
    return _Join(gold, by_key, tp, fp, n_span_predictions)


def distance_breakdown(corpus: Corpus, predictions: PredictionSet,
                       join: _Join | None = None) -> dict[str, BucketScore]:
    """Per-bucket P/R/F1 over the sentence distance from trigger to argument.

    A false positive whose role exists in gold is attributed to the bucket
    of its first gold counterpart; a prediction for a role absent in gold
    is attributed to the bucket of the predicted span's own distance.
    """
    join = join or _align(corpus, predictions)
    support: dict[str, int] = {b: 0 for b in DISTANCE_BUCKETS}
    tp: dict[str, int] = {b: 0 for b in DISTANCE_BUCKETS}
    fp: dict[str, int] = {b: 0 for b in DISTANCE_BUCKETS}
    for arg in join.gold:
        support[bucket_of(arg.distance)] += 1
    for _, arg in join.tp:
        tp[bucket_of(arg.distance)] += 1
    for pred in join.fp:
        counterparts = join.by_key.get((pred.doc_id, pred.event_id, pred.role))
        if counterparts:
            bucket = bucket_of(counterparts[0].distance)
        else:
            doc = corpus.document(pred.doc_id)
            frame = corpus.frame(pred.doc_id, pred.event_id)
            bucket = bucket_of(argument_distance(doc, frame, pred.span))
        fp[bucket] += 1
    out = {}
    for b in DISTANCE_BUCKETS:
        p, r, f1 = _prf(tp[b], tp[b] + fp[b], support[b])
        out[b] = BucketScore(p, r, f1, support[b], tp[b], fp[b])
    return out


def _role_scores(join: _Join) -> dict[str, BucketScore]:
    support: dict[str, int] = {}
    tp: dict[str, int] = {}
    n_pred: dict[str, int] = {}
    for arg in join.gold:
        support[arg.role] = support.get(arg.role, 0) + 1
    for pred, _ in join.tp:
        tp[pred.role] = tp.get(pred.role, 0) + 1
        n_pred[pred.role] = n_pred.get(pred.role, 0) + 1
    for pred in join.fp:
        n_pred[pred.role] = n_pred.get(pred.role, 0) + 1
    out = {}
    for role in sorted(set(support) | set(n_pred)):
        p, r, f1 = _prf(tp.get(role, 0), n_pred.get(role, 0), support.get(role, 0))
        out[role] = BucketScore(p, r, f1, support.get(role, 0),
                                tp.get(role, 0),
                                n_pred.get(role, 0) - tp.get(role, 0))
    return out


def _event_scores(corpus: Corpus, join: _Join) -> dict[str, float]:
    """Unweighted mean of per-role F1 among roles the event type has in gold."""
    support: dict[tuple[str, str], int] = {}
    tp: dict[tuple[str, str], int] = {}
    n_pred: dict[tuple[str, str], int] = {}
    for arg in join.gold:
        support[(arg.event_type, arg.role)] = support.get(
            (arg.event_type, arg.role), 0) + 1
    for pred, arg in join.tp:
        key = (arg.event_type, pred.role)
        tp[key] = tp.get(key, 0) + 1
        n_pred[key] = n_pred.get(key, 0) + 1
    for pred in join.fp:
        event_type = corpus.frame(pred.doc_id, pred.event_id).event_type
        key = (event_type, pred.role)
        n_pred[key] = n_pred.get(key, 0) + 1
    out: dict[str, float] = {}
    types = sorted({t for t, _ in support})
    for event_type in types:
        f1s = []
        for (t, role), count in support.items():
            if t != event_type:
                continue
            _, _, f1 = _prf(tp.get((t, role), 0), n_pred.get((t, role), 0), count)
            f1s.append(f1)
        out[event_type] = sum(f1s) / len(f1s) if f1s else 0.0
    return out


def confusion_matrix(corpus: Corpus, predictions: PredictionSet, top_k: int = 15,
                     join: _Join | None = None) -> dict[str, dict[str, int]]:
    """Gold-role x predicted-role counts over span-correct predictions.

    A prediction participates when its span exactly equals some gold span
    of the same (document, event), whatever that span's role is.  Rows and
    columns are restricted to the top_k most frequent gold roles.
    """
    join = join or _align(corpus, predictions)
    gold_by_event: dict[tuple[str, str], list[_GoldArg]] = {}
    gold_freq: dict[str, int] = {}
    for arg in join.gold:
        gold_by_event.setdefault((arg.doc_id, arg.event_id), []).append(arg)
        gold_freq[arg.role] = gold_freq.get(arg.role, 0) + 1
    for args in gold_by_event.values():
        args.sort(key=lambda a: (a.span.start, a.span.end))

    cells: dict[tuple[str, str], int] = {}
    for pred in predictions.entries:
        if pred.span is None:
            continue
        for arg in gold_by_event.get((pred.doc_id, pred.event_id), []):
            if arg.span == pred.span:
                cells[(arg.role, pred.role)] = cells.get((arg.role, pred.role), 0) + 1
                break

    top = sorted(gold_freq, key=lambda r: (-gold_freq[r], r))[:top_k]
    keep = set(top)
    matrix: dict[str, dict[str, int]] = {role: {} for role in top}
    for (gold_role, pred_role), count in sorted(cells.items()):
        if gold_role in keep and pred_role in keep:
            matrix[gold_role][pred_role] = count
    return matrix


def tag_errors(corpus: Corpus, predictions: PredictionSet,
               join: _Join | None = None) -> dict[str, int]:
    """Automated error categories over non-TP gold/prediction pairings.

    partial_span: same role, overlapping but unequal spans; wrong_span:
    same role, disjoint spans; no_prediction: gold argument with a null or
    missing prediction (including the leftover gold of a repeated role);
    spurious: span prediction for a role absent in gold.
    """
    join = join or _align(corpus, predictions)
    tags = {"partial_span": 0, "wrong_span": 0, "no_prediction": 0, "spurious": 0}
    consumed_fp: set[tuple[str, str, str]] = set()
    for arg in join.gold:
        if arg.consumed:
            continue
        pred = predictions.by_key.get((arg.doc_id, arg.event_id, arg.role))
        if pred is None or pred.span is None:
            tags["no_prediction"] += 1
        elif any(p is pred for p, _ in join.tp):
            # the single allowed prediction already matched another gold
            # tuple of this repeated role
            tags["no_prediction"] += 1
        elif pred.span.overlaps(arg.span):
            tags["partial_span"] += 1
            consumed_fp.add((pred.doc_id, pred.event_id, pred.role))
        else:
            tags["wrong_span"] += 1
            consumed_fp.add((pred.doc_id, pred.event_id, pred.role))
    for pred in join.fp:
        if not join.by_key.get((pred.doc_id, pred.event_id, pred.role)):
            tags["spurious"] += 1
    return tags


def score(corpus: Corpus, predictions: PredictionSet,
          ontology: Ontology | None = None, top_k: int = 15) -> EvalReport:
    """Full exact-match report with every diagnostic section filled in."""
    join = _align(corpus, predictions, ontology)
    n_gold = len(join.gold)
    n_correct = len(join.tp)
    precision, recall, f1 = _prf(n_correct, join.n_span_predictions, n_gold)
    return EvalReport(
        precision=precision,
        recall=recall,
        f1=f1,
        n_gold=n_gold,
        n_predicted=join.n_span_predictions,
        n_correct=n_correct,
        zero_predictions=join.n_span_predictions == 0,
        by_distance=distance_breakdown(corpus, predictions, join),
        by_role=_role_scores(join),
        by_event=_event_scores(corpus, join),
        confusion=confusion_matrix(corpus, predictions, top_k, join),
        error_tags=tag_errors(corpus, predictions, join),
    )


def delta_f1(new: EvalReport, base: EvalReport) -> dict[str, float]:
    """Relative F1 improvement (percent) per distance bucket and overall.

    Keys whose base F1 is zero are absent; render-side code flags them.
    """
    out: dict[str, float] = {}
    if base.f1 > 0:
        out["overall"] = 100.0 * (new.f1 - base.f1) / base.f1
    for key, base_bucket in base.by_distance.items():
        if key not in new.by_distance or base_bucket.f1 == 0:
            continue
        out[key] = 100.0 * (new.by_distance[key].f1 - base_bucket.f1) / base_bucket.f1
    return out


_BUCKET_LABELS = {
    "-2": "2 before", "-1": "1 before", "0": "same",
    "+1": "1 after", "+2": "2 after", "other": "other",
}


def render_distance_table(report: EvalReport,
                          baseline: EvalReport | None = None) -> str:
    """Plain-text table of per-distance results, with %dF1 vs a baseline."""
    deltas = delta_f1(report, baseline) if baseline is not None else {}
    header = f"{'distance':<10} {'P':>7} {'R':>7} {'F1':>7} {'support':>8}"
    if baseline is not None:
        header += f" {'%dF1':>8}"
    lines = [header]
    for key in DISTANCE_BUCKETS:
        b = report.by_distance.get(key)
        if b is None:
            continue
        row = (f"{_BUCKET_LABELS[key]:<10} {b.precision:>7.4f} {b.recall:>7.4f} "
               f"{b.f1:>7.4f} {b.support:>8}")
        if baseline is not None:
            row += f" {deltas[key]:>+8.1f}" if key in deltas else f" {'n/a':>8}"
        lines.append(row)
    lines.append(f"{'overall':<10} {report.precision:>7.4f} {report.recall:>7.4f} "
                 f"{report.f1:>7.4f} {report.n_gold:>8}"
                 + (f" {deltas['overall']:>+8.1f}" if "overall" in deltas
                    else (f" {'n/a':>8}" if baseline is not None else "")))
    return "\n".join(lines)


def per_role_csv(report: EvalReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["role", "precision", "recall", "f1", "support"])
    for role, b in sorted(report.by_role.items()):
        writer.writerow([role, f"{b.precision:.6f}", f"{b.recall:.6f}",
                         f"{b.f1:.6f}", b.support])
    return buf.getvalue()


def confusion_csv(report: EvalReport) -> str:
    roles = list(report.confusion.keys())
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["gold\\predicted"] + roles)
    for gold_role in roles:
        row = report.confusion.get(gold_role, {})
        writer.writerow([gold_role] + [row.get(r, 0) for r in roles])
    return buf.getvalue()
