"""Join sentences against the triple store to produce relation instances."""

from __future__ import annotations

from typing import Iterable, Iterator

from .triples import TripleStore
from .types import RelationInstance, SentenceRecord


def link_sentences(
    records: Iterable[SentenceRecord],
    store: TripleStore,
    allowed_pids: frozenset[str] | set[str],
) -> Iterator[RelationInstance]:
    """Emit one instance per ordered entity pair per allowed relation.

    A sentence with several related pairs yields several instances;
    pairs without an allowed triple yield none.
    """
    allowed = frozenset(allowed_pids)
    for record in records:
        n = len(record.entities)
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                pids = store.relations(record.entities[i].qid, record.entities[j].qid)
                for pid in sorted(pids & allowed):
                    yield RelationInstance(record=record, e1_index=i, e2_index=j, pid=pid)
