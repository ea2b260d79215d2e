import random

import pytest

from eventqa.augmentation import (
    AugmentConfig,
    AugmentationError,
    Mention,
    augment_corpus,
    augmented_to_record,
    build_rewrite_prompt,
    candidate_boundaries,
    cr_augment,
    load_chains,
    load_rewrites,
    move_tokens,
    remap_spans,
    shift_for_deletion,
    shift_for_insertion,
    ss_plain,
    ss_verbose,
)
from eventqa.corpus import (
    Corpus,
    Document,
    EventFrame,
    Span,
    argument_distance,
    load_corpus,
)


def doc_of(sentences, doc_id="d"):
    return Document.from_lists(doc_id, sentences)


class TestShiftPrimitives:
    def test_deletion_before_span(self):
        assert shift_for_deletion(Span(5, 7), Span(1, 2)) == Span(3, 5)

    def test_deletion_after_span(self):
        assert shift_for_deletion(Span(0, 1), Span(4, 6)) == Span(0, 1)

    def test_deletion_overlap_rejected(self):
        with pytest.raises(AugmentationError):
            shift_for_deletion(Span(2, 5), Span(4, 6))

    def test_insertion_before_span(self):
        assert shift_for_insertion(Span(4, 6), 2, 3) == Span(7, 9)

    def test_insertion_at_span_start_shifts(self):
        assert shift_for_insertion(Span(4, 6), 4, 2) == Span(6, 8)

    def test_insertion_after_span(self):
        assert shift_for_insertion(Span(1, 3), 4, 5) == Span(1, 3)

    def test_insertion_inside_span_rejected(self):
        with pytest.raises(AugmentationError):
            shift_for_insertion(Span(2, 6), 4, 1)

    def test_random_edits_preserve_rendered_tokens(self):
        # smaller sibling of the acceptance soundness run
        rng = random.Random(11)
        for _ in range(300):
            tokens = [f"t{i}" for i in range(rng.randint(8, 30))]
            a = rng.randrange(len(tokens))
            b = min(len(tokens) - 1, a + rng.randint(0, 2))
            span = Span(a, b)
            if rng.random() < 0.5:
                # deletion of a run disjoint from the span
                c = rng.randrange(len(tokens))
                d = min(len(tokens) - 1, c + rng.randint(0, 2))
                if not (d < a or c > b):
                    continue
                edited = tokens[:c] + tokens[d + 1:]
                moved = shift_for_deletion(span, Span(c, d))
            else:
                at = rng.randint(0, len(tokens))
                extra = ["x"] * rng.randint(1, 3)
                edited = tokens[:at] + extra + tokens[at:]
                try:
                    moved = shift_for_insertion(span, at, len(extra))
                except AugmentationError:
                    continue
            assert edited[moved.start:moved.end + 1] == tokens[a:b + 1]


def toy_frame():
    # trigger "a" and argument "b" share sentence 0
    doc = doc_of([["a", "b"], ["c", "d"]])
    frame = EventFrame("d#ev0", Span(0, 0), "t", (("x", Span(1, 1)),))
    return doc, frame


class TestSsPlain:
    def test_toy_move_to_end(self):
        doc, frame = toy_frame()
        inst = ss_plain(doc, frame, 0, 2)
        assert [list(s) for s in inst.document.sentences] == [["a"], ["c", "d", "b"]]
        assert inst.frame.arguments[0][1] == Span(3, 3)
        assert inst.moved_role == "x"

    def test_move_back_restores_tokens(self):
        doc, frame = toy_frame()
        sentences, new_span, _ = move_tokens(doc, frame.arguments[0][1], 2)
        augmented = doc_of(sentences)
        restored, _, _ = move_tokens(augmented, new_span, 1)
        assert [list(s) for s in restored] == [list(s) for s in doc.sentences]

    def test_appendix_worked_example(self, appendix_doc, appendix_frame):
        inst = ss_plain(appendix_doc, appendix_frame, 0, 0)
        new_doc, new_frame = inst.document, inst.frame
        assert new_doc.sentences[0][0] == "Clinton"
        assert " ".join(new_doc.sentences[0][1:5]) == "As Secretary of State"
        # the source sentence lost its argument
        assert " ".join(new_doc.sentences[2][:9]) == (
            "To clear the route for sanctions , helped sink")
        moved = new_frame.arguments[0][1]
        assert moved == Span(0, 0)
        assert argument_distance(new_doc, new_frame, moved) == -2
        assert new_doc.span_text(new_frame.trigger) == "agreements"
        assert new_doc.span_text(new_frame.arguments[1][1]) == "Iran"

    def test_token_count_preserved(self, appendix_doc, appendix_frame):
        inst = ss_plain(appendix_doc, appendix_frame, 0, 4)
        assert inst.document.n_tokens == appendix_doc.n_tokens
        assert len(inst.document.sentences) == len(appendix_doc.sentences)

    def test_untouched_spans_keep_tokens(self, appendix_doc, appendix_frame):
        for boundary in range(len(appendix_doc.sentences) + 1):
            inst = ss_plain(appendix_doc, appendix_frame, 0, boundary)
            assert inst.document.span_text(inst.frame.trigger) == "agreements"
            assert inst.document.span_text(inst.frame.arguments[1][1]) == "Iran"

    def test_rejects_inter_sentential_argument(self, fig1_doc, fig1_frame):
        # vehicle sits one sentence before the trigger
        with pytest.raises(AugmentationError, match="not intra-sentential"):
            ss_plain(fig1_doc, fig1_frame, 0, 0)

    def test_rejects_trigger_overlap(self):
        doc = doc_of([["a", "b", "c"], ["d", "e"]])
        frame = EventFrame("e", Span(0, 1), "t", (("x", Span(1, 2)),))
        with pytest.raises(AugmentationError, match="overlaps"):
            ss_plain(doc, frame, 0, 2)

    def test_rejects_whole_sentence_argument(self):
        doc = doc_of([["b"], ["c", "d"]])
        frame = EventFrame("e", Span(0, 0), "t", (("x", Span(0, 0)),))
        with pytest.raises(AugmentationError):
            ss_plain(doc, frame, 0, 2)


class TestSsVerbose:
    def test_appendix_worked_example(self, appendix_doc, appendix_frame):
        inst = ss_verbose(appendix_doc, appendix_frame, 0, 0)
        new_doc, new_frame = inst.document, inst.frame
        assert " ".join(new_doc.sentences[0]) == (
            "The violator of the event agreements is Clinton .")
        assert len(new_doc.sentences) == 6
        moved = new_frame.arguments[0][1]
        assert new_doc.span_text(moved) == "Clinton"
        assert new_doc.sentence_of(moved.start) == 0
        # the original occurrence was removed
        assert "Clinton" not in new_doc.sentences[3]

    def test_inserted_sentence_token_count(self, appendix_doc, appendix_frame):
        # template: The | role | of the event | trigger | is | argument | .
        # fixed tokens = 6, counted on the rendered sentence
        inst = ss_verbose(appendix_doc, appendix_frame, 0, 2)
        role_tokens = 1
        trigger_tokens = len(appendix_doc.span_tokens(appendix_frame.trigger))
        arg_tokens = len(appendix_doc.span_tokens(appendix_frame.arguments[0][1]))
        assert len(inst.document.sentences[2]) == (
            6 + role_tokens + trigger_tokens + arg_tokens)
        assert inst.document.n_tokens == (
            appendix_doc.n_tokens - arg_tokens + len(inst.document.sentences[2]))

    def test_gold_tokens_verbatim(self, appendix_doc, appendix_frame):
        original = appendix_doc.span_tokens(appendix_frame.arguments[0][1])
        for boundary in range(len(appendix_doc.sentences) + 1):
            inst = ss_verbose(appendix_doc, appendix_frame, 0, boundary)
            assert inst.document.span_tokens(inst.frame.arguments[0][1]) == original

    def test_keep_original_switch(self, appendix_doc, appendix_frame):
        inst = ss_verbose(appendix_doc, appendix_frame, 0, 0, keep_original=True)
        # both the restated and the original occurrence are present
        flat = list(inst.document.tokens)
        assert flat.count("Clinton") == 1 + list(appendix_doc.tokens).count("Clinton")
        assert inst.document.n_tokens == (
            appendix_doc.n_tokens + len(inst.document.sentences[0]))

    def test_never_intra_sentential(self, appendix_doc, appendix_frame):
        for boundary in range(len(appendix_doc.sentences) + 1):
            inst = ss_verbose(appendix_doc, appendix_frame, 0, boundary)
            moved = inst.frame.arguments[0][1]
            assert argument_distance(inst.document, inst.frame, moved) != 0


class TestCandidateBoundaries:
    def test_plain_excludes_own_sentence(self, appendix_doc, appendix_frame):
        # trigger sentence is 2; boundary 3 would append to sentence 2
        boundaries = candidate_boundaries(appendix_doc, appendix_frame, 0, "ss_plain")
        assert 3 not in boundaries
        assert boundaries == [0, 1, 2, 4, 5]

    def test_zero_distance_allowed_as_last_resort(self):
        doc = doc_of([["a", "b", "c"]])
        frame = EventFrame("e", Span(0, 0), "t", (("x", Span(2, 2)),))
        assert candidate_boundaries(doc, frame, 0, "ss_plain") == [0, 1]

    def test_verbose_keeps_every_boundary(self, appendix_doc, appendix_frame):
        boundaries = candidate_boundaries(appendix_doc, appendix_frame, 0,
                                          "ss_verbose")
        assert boundaries == list(range(len(appendix_doc.sentences) + 1))


class TestCrAugment:
    def test_random_picks_she(self, appendix_doc, appendix_frame, appendix_chains):
        inst = cr_augment(appendix_doc, appendix_frame, 0, appendix_chains,
                          "random", seed=0)
        span = inst.frame.arguments[0][1]
        assert inst.document.span_text(span) == "she"
        assert inst.document.sentence_of(span.start) == 1

    def test_meaningful_picks_hillary_clinton(self, appendix_doc, appendix_frame,
                                              appendix_chains):
        inst = cr_augment(appendix_doc, appendix_frame, 0, appendix_chains,
                          "meaningful")
        assert inst.document.span_text(inst.frame.arguments[0][1]) == "Hillary Clinton"

    def test_meaningful_earliest_wins_full_tie(self, appendix_doc,
                                               appendix_frame, appendix_chains):
        # Iran's qualifying mentions ("the country" sits in the argument's
        # own sentence and does not qualify) are Iran@22 and Iran@76: both
        # one token, both named entities, so the earliest wins
        inst = cr_augment(appendix_doc, appendix_frame, 1, appendix_chains,
                          "meaningful")
        assert inst.frame.arguments[1][1] == Span(22, 22)

    def test_document_tokens_unchanged(self, appendix_doc, appendix_frame,
                                       appendix_chains):
        inst = cr_augment(appendix_doc, appendix_frame, 0, appendix_chains,
                          "random", seed=5)
        assert inst.document.sentences == appendix_doc.sentences

    def test_singleton_choice(self):
        doc = doc_of([["Ana", "left", "."], ["She", "waved", "."]])
        frame = EventFrame("e", Span(1, 1), "t", (("x", Span(0, 0)),))
        chains = [[Mention(Span(0, 0), True), Mention(Span(3, 3), False)]]
        for mode in ("random", "meaningful"):
            inst = cr_augment(doc, frame, 0, chains, mode, seed=9)
            assert inst.frame.arguments[0][1] == Span(3, 3)

    def test_no_covering_chain(self, appendix_doc, appendix_frame):
        with pytest.raises(AugmentationError, match="no coreference chain"):
            cr_augment(appendix_doc, appendix_frame, 0, [], "random")

    def test_no_inter_sentential_mention(self):
        doc = doc_of([["Ana", "met", "Bo", "."], ["Rain", "fell", "."]])
        frame = EventFrame("e", Span(1, 1), "t", (("x", Span(0, 0)),))
        chains = [[Mention(Span(0, 0), True), Mention(Span(2, 2), False)]]
        with pytest.raises(AugmentationError):
            cr_augment(doc, frame, 0, chains, "random")

    def test_deterministic_under_seed(self, appendix_doc, appendix_frame,
                                      appendix_chains):
        a = cr_augment(appendix_doc, appendix_frame, 0, appendix_chains,
                       "random", seed=13)
        b = cr_augment(appendix_doc, appendix_frame, 0, appendix_chains,
                       "random", seed=13)
        assert a.frame == b.frame


class TestRemapSpans:
    def test_identity_rewrite_maps_everything(self, appendix_doc, appendix_frame):
        inst, report = remap_spans(appendix_doc, appendix_frame,
                                   appendix_doc.sentences)
        assert inst is not None
        assert inst.frame.trigger == appendix_frame.trigger
        assert inst.frame.arguments == appendix_frame.arguments
        assert report.events_mapped == report.events_total == 1
        assert report.args_mapped == report.args_total == 2

    def test_appendix_gpt_rewrite(self, appendix_doc, appendix_frame):
        from tests.conftest import APPENDIX_REWRITE
        inst, report = remap_spans(appendix_doc, appendix_frame, APPENDIX_REWRITE)
        assert inst is not None and report.args_mapped == 2
        new_doc, new_frame = inst.document, inst.frame
        # nearest-relative-position occurrences, frozen from enumeration
        assert new_frame.trigger == Span(51, 51)
        assert new_doc.sentence_of(new_frame.trigger.start) == 2
        by_role = dict(new_frame.arguments)
        assert by_role["violator"] == Span(23, 23)
        assert by_role["otherparticipant"] == Span(76, 76)
        distances = [argument_distance(new_doc, new_frame, s)
                     for _, s in new_frame.arguments]
        assert distances == [-1, 1]  # both arguments became inter-sentential

    def test_paraphrase_rewrite(self, appendix_doc, appendix_frame):
        from tests.conftest import APPENDIX_PARAPHRASE
        inst, report = remap_spans(appendix_doc, appendix_frame,
                                   APPENDIX_PARAPHRASE, strategy="llm_paraphrase")
        assert inst is not None
        assert report.args_mapped == 2
        assert inst.strategy == "llm_paraphrase"

    def test_trigger_deleted_drops_instance(self, appendix_doc, appendix_frame):
        rewritten = [[t for t in s if t != "agreements"]
                     for s in appendix_doc.sentences]
        inst, report = remap_spans(appendix_doc, appendix_frame, rewritten)
        assert inst is None
        assert report.events_mapped == 0
        assert report.drops == [("appendixc", "appendixc#ev0", None,
                                 "trigger_unmapped")]

    def test_missing_argument_dropped_instance_kept(self, appendix_doc,
                                                    appendix_frame):
        rewritten = [[t for t in s if t != "Clinton"]
                     for s in appendix_doc.sentences]
        inst, report = remap_spans(appendix_doc, appendix_frame, rewritten)
        assert inst is not None
        assert [r for r, _ in inst.frame.arguments] == ["otherparticipant"]
        assert ("appendixc", "appendixc#ev0", "violator",
                "argument_unmapped") in report.drops

    def test_matching_is_case_insensitive(self):
        doc = doc_of([["CLINTON", "sank", "deals", "."]])
        frame = EventFrame("e", Span(1, 1), "t", (("x", Span(0, 0)),))
        inst, report = remap_spans(doc, frame, [["so", "clinton", "sank", "them"]])
        assert inst is not None
        assert inst.frame.arguments[0][1] == Span(1, 1)


class TestBuildRewritePrompt:
    def test_appendix_prompt(self, appendix_doc, appendix_frame):
        prompt = build_rewrite_prompt(appendix_doc, appendix_frame)
        assert prompt.startswith("As Secretary of State , Hillary Clinton")
        assert ("Rewrite the story like a newspaper article in 5 sentences. "
                "Include the event triggering word agreements and event "
                "arguments Clinton, Iran in the generated article.") in prompt

    def test_sentence_count_follows_document(self):
        doc = doc_of([["a", "b"], ["c", "d"], ["e", "f"]])
        frame = EventFrame("e", Span(0, 0), "t", (("x", Span(1, 1)),))
        assert "in 3 sentences." in build_rewrite_prompt(doc, frame)

    def test_single_argument_no_comma(self):
        doc = doc_of([["Ana", "paid", "rent", "."]])
        frame = EventFrame("e", Span(1, 1), "t", (("x", Span(0, 0)),))
        prompt = build_rewrite_prompt(doc, frame)
        assert "event arguments Ana in" in prompt
        assert "," not in prompt.split("event arguments")[1]

    def test_requires_an_argument(self):
        doc = doc_of([["a", "b"]])
        frame = EventFrame("e", Span(0, 0), "t", ())
        with pytest.raises(AugmentationError):
            build_rewrite_prompt(doc, frame)


def corpus_3intra_1inter():
    doc = doc_of([
        "Rebels gathered north of the river .".split(),
        "Images showed Orlov nearby that night .".split(),
        "Vetrov attacked the convoy with drones there .".split(),
        "Smoke rose for hours afterwards , residents said .".split(),
        "No group claimed the strike .".split(),
    ], doc_id="mix")
    frame = EventFrame(
        "mix#ev0", Span(15, 15), "conflict.attack.airstrike",
        (
            ("attacker", Span(14, 14)),    # Vetrov, sentence 2 (intra)
            ("target", Span(17, 17)),      # convoy, sentence 2 (intra)
            ("instrument", Span(19, 19)),  # drones, sentence 2 (intra)
            ("place", Span(9, 9)),         # Orlov, sentence 1 (inter)
        ),
    )
    return Corpus([(doc, [frame])])


class TestAugmentCorpus:
    def test_ss_plain_one_per_intra_argument(self):
        corpus = corpus_3intra_1inter()
        instances, _ = augment_corpus(corpus, "ss_plain", seed=1)
        assert len(instances) == 3
        assert sorted(i.moved_role for i in instances) == [
            "attacker", "instrument", "target"]

    def test_no_intra_arguments_no_instances(self):
        doc = doc_of([["a", "b"], ["c", "d"]])
        frame = EventFrame("e", Span(0, 0), "t", (("x", Span(2, 2)),))
        instances, _ = augment_corpus(Corpus([(doc, [frame])]), "ss_plain")
        assert instances == []

    def test_moved_arguments_are_inter_sentential(self):
        corpus = corpus_3intra_1inter()
        for strategy in ("ss_plain", "ss_verbose"):
            instances, _ = augment_corpus(corpus, strategy, seed=3)
            for inst in instances:
                idx = [r for r, _ in inst.frame.arguments].index(inst.moved_role)
                moved = inst.frame.arguments[idx][1]
                assert argument_distance(inst.document, inst.frame, moved) != 0

    def test_cr_counts_qualifying_arguments_only(self, appendix_doc,
                                                 appendix_frame, appendix_chains):
        # Clinton has a cross-sentence chain; Iran's chain is restricted to
        # the argument's own sentence here, so only one instance comes out.
        chains = [appendix_chains[0],
                  [Mention(Span(58, 58), True), Mention(Span(63, 63), False)]]
        corpus = Corpus([(appendix_doc, [appendix_frame])])
        instances, _ = augment_corpus(
            corpus, "cr_random", AugmentConfig(chains={"appendixc": chains}),
            seed=2)
        assert len(instances) == 1
        assert instances[0].moved_role == "violator"

    def test_llm_strategy_counts_remapped_frames(self, appendix_doc,
                                                 appendix_frame):
        from tests.conftest import APPENDIX_REWRITE
        corpus = Corpus([(appendix_doc, [appendix_frame])])
        rewrites = {("appendixc", "appendixc#ev0"):
                    tuple(tuple(s) for s in APPENDIX_REWRITE)}
        instances, report = augment_corpus(
            corpus, "llm_rewrite", AugmentConfig(rewrites=rewrites))
        assert len(instances) == 1
        assert report.events_mapped == 1 and report.args_mapped == 2

    def test_missing_resources(self, fig1_corpus):
        with pytest.raises(AugmentationError, match="requires"):
            augment_corpus(fig1_corpus, "cr_random")
        with pytest.raises(AugmentationError, match="requires"):
            augment_corpus(fig1_corpus, "llm_rewrite")

    def test_unknown_strategy(self, fig1_corpus):
        with pytest.raises(AugmentationError, match="unknown strategy"):
            augment_corpus(fig1_corpus, "ss_bold")

    def test_deterministic_under_seed(self, synth_corpus):
        first, _ = augment_corpus(synth_corpus, "ss_plain", seed=5)
        second, _ = augment_corpus(synth_corpus, "ss_plain", seed=5)
        assert first == second
        third, _ = augment_corpus(synth_corpus, "ss_plain", seed=6)
        assert first != third

    def test_all_outputs_validate(self, synth_corpus):
        for strategy in ("ss_plain", "ss_verbose"):
            instances, _ = augment_corpus(synth_corpus, strategy, seed=8)
            for inst in instances:
                inst.document.check_span(inst.frame.trigger)
                for _, span in inst.frame.arguments:
                    inst.document.check_span(span)

    def test_round_trip_through_corpus_schema(self, tmp_path, synth_corpus):
        instances, _ = augment_corpus(synth_corpus, "ss_plain", seed=4)
        path = tmp_path / "aug.jsonl"
        import json
        path.write_text("".join(json.dumps(augmented_to_record(i)) + "\n"
                                for i in instances), encoding="utf-8")
        pairs = load_corpus(path)
        assert len(pairs) == len(instances)
        for (doc, frames), inst in zip(pairs, instances):
            assert doc.sentences == inst.document.sentences
            assert frames[0].trigger == inst.frame.trigger
            assert frames[0].arguments == inst.frame.arguments


class TestResourceLoaders:
    def test_load_chains(self, tmp_path, appendix_doc, appendix_frame):
        import json
        record = {"doc_id": "appendixc",
                  "chains": [[{"span": [5, 6], "ne": True},
                              {"span": [30, 30], "ne": False}]]}
        path = tmp_path / "chains.jsonl"
        path.write_text(json.dumps(record) + "\n", encoding="utf-8")
        corpus = Corpus([(appendix_doc, [appendix_frame])])
        chains = load_chains(path, corpus)
        mention = chains["appendixc"][0][0]
        assert mention.span == Span(5, 6)
        assert mention.text == "Hillary Clinton"

    def test_load_rewrites(self, tmp_path):
        import json
        record = {"doc_id": "d", "event_id": "d#ev0",
                  "sentences": [["a", "b"], ["c"]]}
        path = tmp_path / "rw.jsonl"
        path.write_text(json.dumps(record) + "\n", encoding="utf-8")
        rewrites = load_rewrites(path)
        assert rewrites[("d", "d#ev0")] == (("a", "b"), ("c",))
