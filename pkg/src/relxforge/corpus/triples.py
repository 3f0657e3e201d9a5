"""Knowledge-base triples: storage, indexing, relation merging."""

from __future__ import annotations

from typing import Iterable, TextIO

from .types import PID_RE, QID_RE


class CyclicMergeMap(ValueError):
    """A merge target is itself mapped; merging would chain or loop."""


class TripleStore:
    """A set of (subject, property, object) triples indexed by entity pair."""

    def __init__(self, triples: Iterable[tuple[str, str, str]] = ()):
        self._triples: set[tuple[str, str, str]] = set()
        self._by_pair: dict[tuple[str, str], set[str]] = {}
        for s, p, o in triples:
            self.add(s, p, o)

    def add(self, subject: str, pid: str, obj: str) -> None:
        if not QID_RE.match(subject) or not QID_RE.match(obj):
            raise ValueError(f"bad entity id in triple ({subject}, {pid}, {obj})")
        if not PID_RE.match(pid):
            raise ValueError(f"bad property id {pid!r}")
        triple = (subject, pid, obj)
        if triple in self._triples:
            return
        self._triples.add(triple)
        self._by_pair.setdefault((subject, obj), set()).add(pid)

    def relations(self, subject: str, obj: str) -> frozenset[str]:
        return frozenset(self._by_pair.get((subject, obj), ()))

    def __contains__(self, triple: tuple[str, str, str]) -> bool:
        return triple in self._triples

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self):
        return iter(sorted(self._triples))

    def pids(self) -> set[str]:
        return {p for _, p, _ in self._triples}

    @classmethod
    def from_tsv(cls, fh: TextIO) -> "TripleStore":
        """Parse `subject_qid<TAB>pid<TAB>object_qid` lines."""
        store = cls()
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"triples line {line_no}: expected 3 tab-separated fields")
            store.add(*parts)
        return store


def merge_relations(store: TripleStore, merge_map: dict[str, str]) -> TripleStore:
    """Rewrite property IDs through merge_map; duplicates collapse.

    Raises CyclicMergeMap if any merge target is itself a merge source.
    """
    chained = set(merge_map) & set(merge_map.values())
    if chained:
        raise CyclicMergeMap(f"merge targets also mapped: {sorted(chained)}")
    merged = TripleStore()
    for s, p, o in store:
        merged.add(s, merge_map.get(p, p), o)
    return merged
