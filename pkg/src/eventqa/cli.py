"""Command-line pipeline: convert, stats, augment, blend-plan, prompt,
answer, score, report.

Every output file starts with a manifest line recording the tool version,
the run seed, and digests of the input files; reruns with identical config
and inputs are byte-identical apart from the manifest timestamp.  Exit
codes: 0 success, 1 validation failure, 2 I/O or transport failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .augmentation import (
    STRATEGIES,
    AugmentConfig,
    augment_corpus,
    augmented_to_record,
    load_chains,
    load_rewrites,
)
from .backend import (
    MOCKS,
    AnswerRequest,
    ProtocolError,
    TransportError,
    answer_batch,
    make_mock,
)
from .blending import epoch_set, merge_with_count, plan
from .corpus import Corpus, Document, Ontology, Span, corpus_stats
from .evaluation import (
    EvalReport,
    PredictionSet,
    Prediction,
    confusion_csv,
    per_role_csv,
    render_distance_table,
    score as score_predictions,
)
from .prompting import GeneratedAnswers, build_prompt, lenient_evaluate, sample_shots
from .question_gen import (
    QAInstance,
    WhTable,
    ingest_external_qa,
    ingest_transformer_questions,
    template_questions,
)
from .util import file_digest, read_jsonl, substream, write_jsonl

ENDPOINT_ENV = "EVENTQA_ENDPOINT"


def _manifest(command: str, seed: int | None, inputs: dict[str, str | Path]) -> dict:
    return {
        "tool": "eventqa",
        "version": __version__,
        "command": command,
        "seed": seed,
        "inputs": {name: file_digest(path) for name, path in sorted(inputs.items())},
        "created": datetime.now(timezone.utc).isoformat(),
    }


def _load_corpus(args) -> Corpus:
    ontology = Ontology.load(args.ontology) if getattr(args, "ontology", None) else None
    return Corpus.load(args.corpus, ontology, getattr(args, "on_unknown", "raise"))


def _load_wh(args) -> WhTable:
    if getattr(args, "wh_table", None):
        return WhTable.load(args.wh_table)
    return WhTable.builtin()


def qa_record(inst: QAInstance, doc: Document, trigger: Span | None) -> dict:
    """Self-contained QA line: instance plus its context and event trigger."""
    return {
        "instance_id": inst.instance_id,
        "doc_id": inst.doc_id,
        "event_id": inst.event_id,
        "role": inst.role,
        "question": inst.question,
        "answer": None if inst.answer is None else [inst.answer.start, inst.answer.end],
        "source": inst.source,
        "wh": inst.wh_word,
        "trigger": None if trigger is None else [trigger.start, trigger.end],
        "context": [list(s) for s in doc.sentences],
    }


def read_qa_file(path: str | Path) -> list[dict]:
    return [record for _, record in read_jsonl(path)]


def qa_instance_from_record(record: dict) -> QAInstance:
    answer = record.get("answer")
    return QAInstance(
        instance_id=record["instance_id"],
        doc_id=record["doc_id"],
        event_id=record["event_id"],
        role=record.get("role"),
        question=record["question"],
        answer=None if answer is None else Span(int(answer[0]), int(answer[1])),
        source=record.get("source", "template"),
        wh_word=record.get("wh"),
    )


def request_from_record(record: dict) -> AnswerRequest:
    trigger = record.get("trigger") or [0, 0]
    return AnswerRequest(
        instance_id=record["instance_id"],
        context=tuple(tuple(s) for s in record["context"]),
        question=record["question"],
        trigger=Span(int(trigger[0]), int(trigger[1])),
    )


# --- commands ---------------------------------------------------------------

def cmd_convert(args) -> int:
    corpus = _load_corpus(args)
    wh = _load_wh(args)
    ontology = Ontology.load(args.ontology)
    sets = []
    template = []
    for doc, frames in corpus:
        for frame in frames:
            template.extend(template_questions(doc, frame, ontology, wh))
    sets.append(template)
    inputs = {"corpus": args.corpus, "ontology": args.ontology}
    if args.transformer_questions:
        sets.append(ingest_transformer_questions(args.transformer_questions, corpus))
        inputs["transformer_questions"] = args.transformer_questions
    if args.external:
        sets.append(ingest_external_qa(args.external))
        inputs["external"] = args.external
    merged, dropped = merge_with_count(sets)

    records = []
    for inst in merged:
        doc = inst.context or corpus.document(inst.doc_id)
        trigger = (corpus.frame(inst.doc_id, inst.event_id).trigger
                   if inst.source != "external" else None)
        records.append(qa_record(inst, doc, trigger))
    write_jsonl(args.out, records, _manifest("convert", None, inputs))
    print(f"wrote {len(merged)} instances to {args.out}"
          + (f" ({dropped} duplicates collapsed)" if dropped else ""))
    return 0


def cmd_stats(args) -> int:
    if args.rams_dir:
        base = Path(args.rams_dir)
        candidates = [base / f"{args.split}.jsonlines",
                      base / "data" / f"{args.split}.jsonlines"]
        path = next((p for p in candidates if p.exists()), None)
        if path is None:
            raise FileNotFoundError(
                f"no {args.split}.jsonlines under {base} (tried {candidates})")
        args.corpus = str(path)
    corpus = _load_corpus(args)
    stats = corpus_stats(corpus)
    print(f"documents            {stats.n_documents:,}")
    print(f"events               {stats.n_events:,}")
    print(f"arguments            {stats.n_arguments:,}")
    print(f"  intra-sentential   {stats.n_intra:,}")
    print(f"  inter-sentential   {stats.n_inter:,}")
    print(f"arguments per event  {float(stats.args_per_event):.2f}")
    return 0


def cmd_augment(args) -> int:
    corpus = _load_corpus(args)
    config = AugmentConfig(verbose_keep_original=args.verbose_keep_original)
    inputs = {"corpus": args.corpus}
    if args.chains:
        config.chains = load_chains(args.chains, corpus)
        inputs["chains"] = args.chains
    if args.rewrites:
        config.rewrites = load_rewrites(args.rewrites)
        inputs["rewrites"] = args.rewrites
    instances, report = augment_corpus(corpus, args.strategy, config, args.seed)
    write_jsonl(args.out, (augmented_to_record(inst) for inst in instances),
                _manifest("augment", args.seed, inputs))
    print(f"wrote {len(instances)} augmented instances to {args.out}")
    if args.strategy.startswith("llm_"):
        print(f"mapped events    {report.events_mapped}/{report.events_total} "
              f"({100 * report.event_rate():.1f}%)")
        print(f"mapped arguments {report.args_mapped}/{report.args_total} "
              f"({100 * report.arg_rate():.1f}%)")
    if args.report:
        with open(args.report, "w", encoding="utf-8") as f:
            json.dump({
                "events_total": report.events_total,
                "events_mapped": report.events_mapped,
                "args_total": report.args_total,
                "args_mapped": report.args_mapped,
                "drops": [list(d) for d in report.drops],
            }, f, indent=2, sort_keys=True)
    return 0


def cmd_blend_plan(args) -> int:
    extra_instances = None
    if args.extra_file:
        extra_instances = [qa_instance_from_record(r)
                           for r in read_qa_file(args.extra_file)]
        n_extra = len(extra_instances)
    elif args.extra is not None:
        n_extra = args.extra
    else:
        raise ValueError("either --extra or --extra-file is required")
    n_base = args.base
    schedule = plan(args.alpha, args.epochs, n_base, n_extra, args.decay)

    print(f"{'epoch':>5} {'retained':>9}")
    for e, kept in enumerate(schedule.per_epoch, start=1):
        print(f"{e:>5} {kept:>9}")
    print("per-epoch: " + ",".join(str(k) for k in schedule.per_epoch))

    if args.manifest_out:
        if extra_instances is None:
            raise ValueError("--manifest-out requires --extra-file")
        lines = []
        for e in range(1, schedule.n_epochs + 1):
            chosen = epoch_set([], extra_instances, schedule, e, args.seed)
            lines.append({"epoch": e, "retained": len(chosen),
                          "instance_ids": [inst.instance_id for inst in chosen]})
        write_jsonl(args.manifest_out, lines,
                    _manifest("blend-plan", args.seed,
                              {"extra": args.extra_file}))
        print(f"wrote per-epoch manifest to {args.manifest_out}")
    return 0


def cmd_prompt(args) -> int:
    corpus = _load_corpus(args)
    ontology = Ontology.load(args.ontology)
    wh = _load_wh(args)
    pool = []
    if args.shots > 0:
        shot_corpus = Corpus.load(args.shot_corpus or args.corpus, ontology,
                                  args.on_unknown)
        pool = [(doc, frame) for doc, frames in shot_corpus for frame in frames]
    records = []
    for doc, frames in corpus:
        for frame in frames:
            shots = sample_shots(pool, args.shots,
                                 substream(args.seed, "shots", doc.doc_id,
                                           frame.event_id)) if args.shots else []
            bundle = build_prompt(doc, frame, ontology, wh, shots)
            records.append({"doc_id": bundle.doc_id, "event_id": bundle.event_id,
                            "prompt": bundle.prompt_text,
                            "roles": list(bundle.expected_roles)})
    inputs = {"corpus": args.corpus, "ontology": args.ontology}
    if args.shot_corpus:
        inputs["shot_corpus"] = args.shot_corpus
    write_jsonl(args.out, records, _manifest("prompt", args.seed, inputs))
    print(f"wrote {len(records)} prompts to {args.out}")
    return 0


def cmd_answer(args) -> int:
    records = read_qa_file(args.qa)
    records = [r for r in records if r.get("role")]
    requests = [request_from_record(r) for r in records]
    endpoint = args.endpoint or os.environ.get(ENDPOINT_ENV)
    if endpoint:
        from .backend import HttpAnswerer
        client = HttpAnswerer(endpoint, batch_size=args.batch_size,
                              retries=args.retries)
    elif args.mock:
        instances = [qa_instance_from_record(r) for r in records]
        client = make_mock(args.mock, instances, p_drop=args.p_drop,
                           p_shift=args.p_shift, seed=args.seed)
    else:
        raise ValueError("either --endpoint or --mock is required")
    responses = answer_batch(client, requests)
    predictions = [
        {"doc_id": r["doc_id"], "event_id": r["event_id"], "role": r["role"],
         "span": None if resp.answer is None
         else [resp.answer.start, resp.answer.end]}
        for r, resp in zip(records, responses)
    ]
    write_jsonl(args.out, predictions,
                _manifest("answer", args.seed, {"qa": args.qa}))
    print(f"wrote {len(predictions)} predictions to {args.out}")
    return 0


def cmd_score(args) -> int:
    corpus = _load_corpus(args)
    ontology = Ontology.load(args.ontology) if args.ontology else None
    if args.answers:
        batches = []
        for _, record in read_jsonl(args.answers):
            batches.append(GeneratedAnswers(record["doc_id"], record["event_id"],
                                            tuple(record["answers"])))
        if ontology is None:
            raise ValueError("--answers scoring requires --ontology")
        report = lenient_evaluate(corpus, batches, ontology, _load_wh(args))
        print(f"lenient precision {report.precision:.4f}  "
              f"recall {report.recall:.4f}  f1 {report.f1:.4f}")
        payload = {
            "mode": "lenient",
            "precision": report.precision, "recall": report.recall,
            "f1": report.f1, "n_matched": report.n_matched,
            "n_predicted": report.n_predicted, "n_gold": report.n_gold,
        }
        inputs = {"corpus": args.corpus, "answers": args.answers}
    else:
        if not args.predictions:
            raise ValueError("either --predictions or --answers is required")
        predictions = PredictionSet.load(args.predictions)
        report = score_predictions(corpus, predictions, ontology, args.top_k)
        print(f"precision {report.precision:.4f}  recall {report.recall:.4f}  "
              f"f1 {report.f1:.4f}  ({report.n_correct}/{report.n_predicted} "
              f"correct, {report.n_gold} gold)")
        if report.zero_predictions:
            print("note: no span predictions; precision reported as 0")
        print(render_distance_table(report))
        payload = {"mode": "exact", **report.to_json()}
        inputs = {"corpus": args.corpus, "predictions": args.predictions}
    if args.out:
        payload["__manifest__"] = _manifest("score", None, inputs)
        with open(args.out, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, sort_keys=True)
        print(f"wrote report to {args.out}")
    return 0


def cmd_report(args) -> int:
    with open(args.report, encoding="utf-8") as f:
        payload = json.load(f)
    if payload.get("mode") == "lenient":
        print(f"lenient precision {payload['precision']:.4f}  "
              f"recall {payload['recall']:.4f}  f1 {payload['f1']:.4f}")
        return 0
    report = EvalReport.from_json(payload)
    baseline = None
    if args.baseline:
        with open(args.baseline, encoding="utf-8") as f:
            baseline = EvalReport.from_json(json.load(f))
    print(render_distance_table(report, baseline))
    if report.error_tags:
        print("\nerror tags (automated approximation):")
        for tag, count in sorted(report.error_tags.items()):
            print(f"  {tag:<14} {count}")
        print("  requiring human judgment (not tagged): "
              + ", ".join(report.unautomated_categories))
    if args.csv:
        outdir = Path(args.csv)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "per_role.csv").write_text(per_role_csv(report),
                                             encoding="utf-8")
        (outdir / "confusion.csv").write_text(confusion_csv(report),
                                              encoding="utf-8")
        print(f"wrote per_role.csv and confusion.csv to {outdir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eventqa",
        description="Event-argument extraction as extractive question answering: "
                    "dataset conversion, augmentation, blending, prompting, "
                    "answer brokering, and scoring.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_corpus_flags(p, ontology_required=False):
        p.add_argument("--corpus", required=False, help="corpus JSON-lines file")
        p.add_argument("--ontology", required=ontology_required,
                       help="event-type/role table (TSV)")
        p.add_argument("--on-unknown", choices=("raise", "skip"), default="raise",
                       help="reject or warn-and-skip unknown types/roles")

    p = sub.add_parser("convert", help="corpus to QA instances")
    add_corpus_flags(p, ontology_required=True)
    p.add_argument("--wh-table", help="role=wh-word table file")
    p.add_argument("--transformer-questions",
                   help="JSON-lines {doc_id, event_id, role, question}")
    p.add_argument("--external", help="generic QA pairs JSON-lines")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("stats", help="corpus statistics")
    add_corpus_flags(p)
    p.add_argument("--rams-dir", help="root of a RAMS-style release")
    p.add_argument("--split", choices=("train", "dev", "test"), default="test")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("augment", help="run one augmentation strategy")
    add_corpus_flags(p)
    p.add_argument("--strategy", required=True, choices=STRATEGIES)
    p.add_argument("--chains", help="coreference chains JSON-lines (cr_*)")
    p.add_argument("--rewrites", help="rewritten documents JSON-lines (llm_*)")
    p.add_argument("--verbose-keep-original", action="store_true",
                   help="ss_verbose: keep the original argument occurrence")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="write the mapping report as JSON")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("blend-plan", help="per-epoch blending schedule")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--epochs", type=int, required=True)
    p.add_argument("--extra", type=int, help="number of additional instances")
    p.add_argument("--extra-file", help="QA file holding the additional instances")
    p.add_argument("--base", type=int, default=0)
    p.add_argument("--decay", choices=("linear", "geometric"), default="linear")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--manifest-out",
                   help="write per-epoch instance_id manifest (JSON-lines)")
    p.set_defaults(func=cmd_blend_plan)

    p = sub.add_parser("prompt", help="build zero-/few-shot prompts")
    add_corpus_flags(p, ontology_required=True)
    p.add_argument("--wh-table")
    p.add_argument("--shots", type=int, default=0)
    p.add_argument("--shot-corpus", help="training corpus to draw shots from")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prompt)

    p = sub.add_parser("answer", help="broker answers from a backend or mock")
    p.add_argument("--qa", required=True, help="QA file from convert")
    p.add_argument("--endpoint",
                   help=f"answer server base URL (or ${ENDPOINT_ENV})")
    p.add_argument("--mock", choices=MOCKS)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--retries", type=int, default=3)
    p.add_argument("--p-drop", type=float, default=0.0)
    p.add_argument("--p-shift", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_answer)

    p = sub.add_parser("score", help="exact-match or lenient scoring")
    add_corpus_flags(p)
    p.add_argument("--predictions", help="predictions JSON-lines")
    p.add_argument("--answers", help="generated answers JSON-lines (lenient)")
    p.add_argument("--wh-table")
    p.add_argument("--top-k", type=int, default=15)
    p.add_argument("--out", help="write the report JSON here")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("report", help="render a saved report")
    p.add_argument("--report", required=True)
    p.add_argument("--baseline", help="baseline report for %%dF1")
    p.add_argument("--csv", help="directory for per-role and confusion CSVs")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors (unknown strategy/mock names,
        # missing flags); those are validation failures here
        return 1 if exc.code == 2 else (exc.code or 0)
    try:
        return args.func(args)
    except (TransportError, ProtocolError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
