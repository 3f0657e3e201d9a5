"""Core record types for the corpus pipeline.

All offsets are Unicode code points into the owning text, never bytes.
Instances are immutable after construction and safe to share between
threads or processes.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, TextIO

QID_RE = re.compile(r"^Q\d+$")
PID_RE = re.compile(r"^P\d+$")


@dataclass(frozen=True)
class LinkSpan:
    """An internal hyperlink in parsed article text."""

    start: int
    end: int
    target_title: str
    surface: str

    def validate(self, text: str) -> None:
        if not (0 <= self.start < self.end <= len(text)):
            raise ValueError(f"span [{self.start},{self.end}) out of bounds for text of length {len(text)}")
        if text[self.start : self.end] != self.surface:
            raise ValueError(
                f"surface mismatch: text slice {text[self.start:self.end]!r} != stored {self.surface!r}"
            )


@dataclass(frozen=True)
class Document:
    """Plain text of one wiki page plus its hyperlink spans, sorted and non-overlapping."""

    doc_id: str
    lang: str
    text: str
    links: tuple[LinkSpan, ...]

    def validate(self) -> None:
        prev_end = 0
        for link in self.links:
            link.validate(self.text)
            if link.start < prev_end:
                raise ValueError(f"overlapping or unsorted link at {link.start}")
            prev_end = link.end


@dataclass(frozen=True)
class Entity:
    """An entity mention resolved to a knowledge-base ID."""

    start: int
    end: int
    qid: str
    surface: str


@dataclass(frozen=True)
class SentenceRecord:
    """One sentence in one language with resolved entity mentions."""

    sent_id: str
    lang: str
    text: str
    entities: tuple[Entity, ...]

    def validate(self) -> None:
        prev_end = 0
        for ent in self.entities:
            if not (0 <= ent.start < ent.end <= len(self.text)):
                raise ValueError(f"entity span [{ent.start},{ent.end}) out of bounds in {self.sent_id}")
            if ent.start < prev_end:
                raise ValueError(f"overlapping or unsorted entity at {ent.start} in {self.sent_id}")
            if self.text[ent.start : ent.end] != ent.surface:
                raise ValueError(f"entity surface mismatch in {self.sent_id}")
            if not QID_RE.match(ent.qid):
                raise ValueError(f"bad qid {ent.qid!r} in {self.sent_id}")
            prev_end = ent.end

    def to_json_dict(self) -> dict:
        return {
            "sent_id": self.sent_id,
            "lang": self.lang,
            "text": self.text,
            "entities": [
                {"start": e.start, "end": e.end, "qid": e.qid, "surface": e.surface} for e in self.entities
            ],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SentenceRecord":
        return cls(
            sent_id=d["sent_id"],
            lang=d["lang"],
            text=d["text"],
            entities=tuple(Entity(e["start"], e["end"], e["qid"], e["surface"]) for e in d["entities"]),
        )


@dataclass(frozen=True)
class RelationInstance:
    """A sentence with an ordered entity pair carrying a distant relation label."""

    record: SentenceRecord
    e1_index: int
    e2_index: int
    pid: str

    def __post_init__(self):
        if self.e1_index == self.e2_index:
            raise ValueError("e1_index and e2_index must differ")
        if not PID_RE.match(self.pid):
            raise ValueError(f"bad pid {self.pid!r}")

    @property
    def qid1(self) -> str:
        return self.record.entities[self.e1_index].qid

    @property
    def qid2(self) -> str:
        return self.record.entities[self.e2_index].qid

    def to_json_dict(self) -> dict:
        d = self.record.to_json_dict()
        d["e1"] = self.e1_index
        d["e2"] = self.e2_index
        d["pid"] = self.pid
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "RelationInstance":
        return cls(
            record=SentenceRecord.from_json_dict(d),
            e1_index=d["e1"],
            e2_index=d["e2"],
            pid=d["pid"],
        )


def write_jsonl(items: Iterable[SentenceRecord | RelationInstance], fh: TextIO) -> int:
    n = 0
    for item in items:
        fh.write(json.dumps(item.to_json_dict(), ensure_ascii=False) + "\n")
        n += 1
    return n


def read_records_jsonl(fh: TextIO) -> Iterator[SentenceRecord]:
    for line in fh:
        line = line.strip()
        if line:
            yield SentenceRecord.from_json_dict(json.loads(line))


def read_instances_jsonl(fh: TextIO) -> Iterator[RelationInstance]:
    for line in fh:
        line = line.strip()
        if line:
            yield RelationInstance.from_json_dict(json.loads(line))
