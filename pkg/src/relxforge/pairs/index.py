"""Immutable lookup structure over relation instances for pair sampling.

Two projections of the same instance set: ordered entity pair -> language
-> sentences, and single entity -> relation -> language -> sentences.
All lists are sorted so sampling is reproducible no matter how the
instances were ordered on input.
"""

from __future__ import annotations

from typing import Iterable

from ..corpus.types import RelationInstance
from .types import MarkedSentence

_SORT_KEY = lambda m: (m.sent_id, m.e1, m.e2, m.pid)  # noqa: E731


def _marked(inst: RelationInstance) -> MarkedSentence:
    rec = inst.record
    ent1 = rec.entities[inst.e1_index]
    ent2 = rec.entities[inst.e2_index]
    return MarkedSentence(
        sent_id=rec.sent_id,
        lang=rec.lang,
        text=rec.text,
        e1=(ent1.start, ent1.end),
        e2=(ent2.start, ent2.end),
        qid1=ent1.qid,
        qid2=ent2.qid,
        pid=inst.pid,
    )


class PairIndex:
    def __init__(self, instances: Iterable[RelationInstance | MarkedSentence]):
        by_pair: dict = {}
        by_entity: dict = {}
        langs: set = set()
        for item in instances:
            m = item if isinstance(item, MarkedSentence) else _marked(item)
            langs.add(m.lang)
            by_pair.setdefault((m.qid1, m.qid2), {}).setdefault(m.lang, []).append(m)
            for qid in {m.qid1, m.qid2}:
                by_entity.setdefault(qid, {}).setdefault(m.pid, {}).setdefault(m.lang, []).append(m)
        for group in by_pair.values():
            for lst in group.values():
                lst.sort(key=_SORT_KEY)
        for pids in by_entity.values():
            for group in pids.values():
                for lst in group.values():
                    lst.sort(key=_SORT_KEY)
        self._by_pair = by_pair
        self._by_entity = by_entity
        self._langs = frozenset(langs)
        self._positive_cache: dict = {}
        self._negative_cache: dict = {}
        self._entity_pool_cache: dict = {}

    def __len__(self):
        return sum(len(lst) for group in self._by_pair.values() for lst in group.values())

    def languages(self) -> frozenset:
        return self._langs

    def pair_group(self, qid1: str, qid2: str) -> dict:
        return self._by_pair.get((qid1, qid2), {})

    def entity_pids(self, qid: str) -> frozenset:
        return frozenset(self._by_entity.get(qid, ()))

    def entity_pool(self, qid: str, lang: str) -> list:
        """All instances in `lang` that mention `qid`, sorted by relation then id."""
        try:
            return self._entity_pool_cache[(qid, lang)]
        except KeyError:
            pool = []
            for pid in sorted(self._by_entity.get(qid, ())):
                pool.extend(self._by_entity[qid][pid].get(lang, ()))
            self._entity_pool_cache[(qid, lang)] = pool
            return pool

    # eligibility caches; keys are (anchor, lang) with lang possibly None

    def positive_keys(self, anchor: str, lang: str | None) -> list:
        """Entity pairs that can yield a positive (anchor-side, lang-side) pair."""
        try:
            return self._positive_cache[(anchor, lang)]
        except KeyError:
            pass

        def eligible(group):
            a_side = group.get(anchor, ())
            if not a_side:
                return False
            if lang is None:
                other = any(code != anchor and group[code] for code in group)
                return other
            if lang == anchor:
                return len(a_side) >= 2
            return bool(group.get(lang))

        keys = sorted(k for k, group in self._by_pair.items() if eligible(group))
        self._positive_cache[(anchor, lang)] = keys
        return keys

    def negative_qids(self, anchor: str, lang: str | None) -> list:
        """Entities around which a strong negative might exist.

        Necessary condition only (two relations across the two sides);
        the exactly-one-shared-entity check happens at draw time.
        """
        try:
            return self._negative_cache[(anchor, lang)]
        except KeyError:
            pass

        def eligible(qid):
            pids_a = {p for p, g in self._by_entity[qid].items() if g.get(anchor)}
            if not pids_a:
                return False
            if lang is None:
                pids_b = {
                    p
                    for p, g in self._by_entity[qid].items()
                    if any(code != anchor for code in g)
                }
            else:
                pids_b = {p for p, g in self._by_entity[qid].items() if g.get(lang)}
            return bool(pids_b) and len(pids_a | pids_b) >= 2

        qids = sorted(q for q in self._by_entity if eligible(q))
        self._negative_cache[(anchor, lang)] = qids
        return qids


def build_index(instances) -> PairIndex:
    return PairIndex(instances)
