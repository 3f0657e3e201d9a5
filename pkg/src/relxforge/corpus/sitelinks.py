"""Sitelink table and entity resolution.

The sitelink table maps (language, normalized page title) to a KB
entity ID. Resolution converts each sentence precursor's links to
entities, dropping and counting titles absent from the table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, TextIO

from .sentences import SentencePrecursor
from .types import Entity, SentenceRecord


def normalize_title(title: str) -> str:
    """Wiki title normalization: underscores to spaces, collapsed
    whitespace, first character uppercased. Idempotent."""
    title = " ".join(title.replace("_", " ").split())
    if not title:
        return title
    return title[0].upper() + title[1:]


class SitelinkTable:
    """Lookup from (lang, title) to qid, with titles normalized on both sides."""

    def __init__(self, entries: Iterable[tuple[str, str, str]] = ()):
        self._map: dict[tuple[str, str], str] = {}
        for lang, title, qid in entries:
            self.add(lang, title, qid)

    def add(self, lang: str, title: str, qid: str) -> None:
        self._map[(lang, normalize_title(title))] = qid

    def lookup(self, lang: str, title: str) -> str | None:
        return self._map.get((lang, normalize_title(title)))

    def __len__(self) -> int:
        return len(self._map)

    @classmethod
    def from_tsv(cls, fh: TextIO) -> "SitelinkTable":
        """Parse `lang<TAB>title<TAB>qid` lines."""
        table = cls()
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"sitelinks line {line_no}: expected 3 tab-separated fields")
            table.add(*parts)
        return table


@dataclass
class ResolutionStats:
    resolved: int = 0
    unresolved: int = 0
    unresolved_titles: dict[str, int] = field(default_factory=dict)

    @property
    def rate(self) -> float:
        total = self.resolved + self.unresolved
        return self.resolved / total if total else 0.0


def resolve_entities(
    precursors: Iterable[SentencePrecursor],
    table: SitelinkTable,
    stats: ResolutionStats | None = None,
) -> list[SentenceRecord]:
    """Convert link spans to entities via the sitelink table.

    Unresolved links are dropped and counted; records are returned even
    when no link resolves.
    """
    stats = stats if stats is not None else ResolutionStats()
    records = []
    for pre in precursors:
        entities = []
        for link in pre.links:
            qid = table.lookup(pre.lang, link.target_title)
            if qid is None:
                stats.unresolved += 1
                key = normalize_title(link.target_title)
                stats.unresolved_titles[key] = stats.unresolved_titles.get(key, 0) + 1
                continue
            stats.resolved += 1
            entities.append(Entity(start=link.start, end=link.end, qid=qid, surface=link.surface))
        record = SentenceRecord(
            sent_id=f"{pre.doc_id}:{pre.index}",
            lang=pre.lang,
            text=pre.text,
            entities=tuple(entities),
        )
        record.validate()
        records.append(record)
    return records
