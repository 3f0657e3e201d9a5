"""Sentence splitting, entity resolution, triple merging, and linking."""

import io

import pytest
from hypothesis import given
from hypothesis import strategies as st

from relxforge.corpus import (
    CyclicMergeMap,
    Document,
    LinkSpan,
    SitelinkTable,
    TripleStore,
    link_sentences,
    merge_relations,
    normalize_title,
    resolve_entities,
    split_sentences,
)
from relxforge.corpus.sitelinks import ResolutionStats


def doc(text, links=(), lang="en"):
    return Document(doc_id="d", lang=lang, text=text, links=tuple(links))


class TestSplit:
    def test_terminal_punctuation(self):
        sents = split_sentences(doc("A. B? C!"))
        assert [s.text for s in sents] == ["A.", "B?", "C!"]

    def test_abbreviation_suppressed(self):
        sents = split_sentences(doc("Dr. Smith arrived. He left."))
        assert [s.text for s in sents] == ["Dr. Smith arrived.", "He left."]

    def test_no_terminator_single_sentence(self):
        sents = split_sentences(doc("one sentence without end"))
        assert [s.text for s in sents] == ["one sentence without end"]

    def test_boundary_inside_link_suppressed(self):
        text = "He read St. Mark. Then left."
        # span covers "St. Mark" including the internal boundary candidate
        link = LinkSpan(8, 16, "St. Mark", "St. Mark")
        sents = split_sentences(doc(text, [link]))
        assert [s.text for s in sents] == ["He read St. Mark.", "Then left."]
        assert sents[0].links[0].surface == "St. Mark"

    def test_links_remapped_to_sentence_offsets(self):
        text = "Alpha is big. Beta is small."
        links = [LinkSpan(0, 5, "Alpha", "Alpha"), LinkSpan(14, 18, "Beta", "Beta")]
        sents = split_sentences(doc(text, links))
        assert len(sents) == 2
        (l2,) = sents[1].links
        assert sents[1].text[l2.start : l2.end] == "Beta"

    def test_newline_is_hard_boundary(self):
        sents = split_sentences(doc("first line\nsecond line"))
        assert [s.text for s in sents] == ["first line", "second line"]

    def test_lowercase_continuation_not_split(self):
        sents = split_sentences(doc("approx. 3 units. next sentence"))
        assert len(sents) == 1

    def test_concatenation_reconstructs_text(self):
        text = "One two. Three four! Five?  Six."
        sents = split_sentences(doc(text))
        rebuilt = " ".join(s.text for s in sents)
        assert " ".join(rebuilt.split()) == " ".join(text.split())


class TestNormalizeTitle:
    def test_rules(self):
        assert normalize_title("cD_Laredo") == "CD Laredo"
        assert normalize_title("  guyana  ") == "Guyana"
        assert normalize_title("big   gap") == "Big gap"

    @given(st.text(max_size=40))
    def test_idempotent(self, s):
        assert normalize_title(normalize_title(s)) == normalize_title(s)


class TestResolve:
    def make_precursors(self, table_entries, text="A Guyana fact.", link=LinkSpan(2, 8, "Guyana", "Guyana")):
        table = SitelinkTable(table_entries)
        d = doc(text, [link])
        return split_sentences(d), table

    def test_lookup_hit(self):
        pre, table = self.make_precursors([("en", "Guyana", "Q734")])
        records = resolve_entities(pre, table)
        assert records[0].entities[0].qid == "Q734"
        assert records[0].entities[0].surface == "Guyana"

    def test_unresolved_dropped_and_counted(self):
        pre, table = self.make_precursors([("en", "Other", "Q1")])
        stats = ResolutionStats()
        records = resolve_entities(pre, table, stats)
        assert records[0].entities == ()
        assert stats.unresolved == 1 and stats.resolved == 0

    def test_empty_table_keeps_records(self):
        pre, table = self.make_precursors([])
        records = resolve_entities(pre, table)
        assert len(records) == 1
        assert records[0].entities == ()

    def test_tsv_round_trip(self):
        table = SitelinkTable.from_tsv(io.StringIO("en\tGuyana\tQ734\nes\tguyana\tQ734\n"))
        assert table.lookup("en", "guyana") == "Q734"
        assert table.lookup("es", "Guyana") == "Q734"
        assert table.lookup("tr", "Guyana") is None


class TestTriples:
    def test_merge_rewrites_pid(self):
        store = TripleStore([("Q64", "P1376", "Q183")])
        merged = merge_relations(store, {"P1376": "P36"})
        assert ("Q64", "P36", "Q183") in merged
        assert ("Q64", "P1376", "Q183") not in merged

    def test_empty_map_identity(self):
        store = TripleStore([("Q1", "P2", "Q3"), ("Q4", "P5", "Q6")])
        merged = merge_relations(store, {})
        assert sorted(merged) == sorted(store)

    def test_dedup_after_merge(self):
        store = TripleStore([("Q1", "P10", "Q2"), ("Q1", "P11", "Q2")])
        merged = merge_relations(store, {"P11": "P10"})
        assert len(merged) == 1

    def test_cyclic_map_rejected(self):
        store = TripleStore()
        with pytest.raises(CyclicMergeMap):
            merge_relations(store, {"P1": "P2", "P2": "P3"})
        with pytest.raises(CyclicMergeMap):
            merge_relations(store, {"P1": "P1"})

    def test_tsv_parse(self):
        store = TripleStore.from_tsv(io.StringIO("Q839739\tP50\tQ170472\n"))
        assert store.relations("Q839739", "Q170472") == frozenset({"P50"})


def record_with(qids, lang="en", sent_id="s0"):
    from relxforge.corpus import Entity, SentenceRecord

    text = " ".join(f"E{i}" for i in range(len(qids)))
    entities = []
    pos = 0
    for i, qid in enumerate(qids):
        surface = f"E{i}"
        entities.append(Entity(pos, pos + len(surface), qid, surface))
        pos += len(surface) + 1
    return SentenceRecord(sent_id=sent_id, lang=lang, text=text, entities=tuple(entities))


class TestLinking:
    def test_single_triple_match(self):
        rec = record_with(["Q839739", "Q170472"])
        store = TripleStore([("Q839739", "P50", "Q170472")])
        out = list(link_sentences([rec], store, {"P50"}))
        assert len(out) == 1
        inst = out[0]
        assert (inst.qid1, inst.pid, inst.qid2) == ("Q839739", "P50", "Q170472")

    def test_one_entity_no_instances(self):
        rec = record_with(["Q1"])
        store = TripleStore([("Q1", "P50", "Q2")])
        assert list(link_sentences([rec], store, {"P50"})) == []

    def test_unallowed_pid_filtered(self):
        rec = record_with(["Q1", "Q2"])
        store = TripleStore([("Q1", "P99", "Q2")])
        assert list(link_sentences([rec], store, {"P50"})) == []

    def test_ordered_pairs_both_directions(self):
        rec = record_with(["Q1", "Q2"])
        store = TripleStore([("Q1", "P10", "Q2"), ("Q2", "P11", "Q1")])
        out = list(link_sentences([rec], store, {"P10", "P11"}))
        assert {(i.qid1, i.pid, i.qid2) for i in out} == {("Q1", "P10", "Q2"), ("Q2", "P11", "Q1")}

    def test_brute_force_equivalence(self):
        # independent double loop over all records/pairs/pids
        import itertools

        rng_qids = [f"Q{i}" for i in range(1, 7)]
        records = [record_with(list(pair), sent_id=f"s{k}") for k, pair in enumerate(itertools.permutations(rng_qids, 3))]
        triples = [(a, f"P{(i % 4) + 1}", b) for i, (a, b) in enumerate(itertools.permutations(rng_qids, 2))]
        store = TripleStore(triples)
        allowed = {"P1", "P2", "P3"}

        emitted = {
            (inst.record.sent_id, inst.e1_index, inst.e2_index, inst.pid)
            for inst in link_sentences(records, store, allowed)
        }
        expected = set()
        for rec in records:
            for i, ei in enumerate(rec.entities):
                for j, ej in enumerate(rec.entities):
                    if i == j:
                        continue
                    for s, p, o in triples:
                        if s == ei.qid and o == ej.qid and p in allowed:
                            expected.add((rec.sent_id, i, j, p))
        assert emitted == expected
