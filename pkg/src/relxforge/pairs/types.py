"""Sentence-pair domain types for matching pretraining."""

from __future__ import annotations

from dataclasses import dataclass, replace

POSITIVE = 1
NEGATIVE = 0


class Exhausted(RuntimeError):
    """No eligible pair can be drawn for the requested bucket."""


@dataclass(frozen=True)
class MarkedSentence:
    """A sentence with its two argument mentions located.

    qid1/qid2/pid carry the distant label the instance came from; the
    wire format drops them.
    """

    sent_id: str
    lang: str
    text: str
    e1: tuple[int, int]
    e2: tuple[int, int]
    qid1: str
    qid2: str
    pid: str

    def __post_init__(self):
        for name, (start, end) in (("e1", self.e1), ("e2", self.e2)):
            if not (0 <= start <= end <= len(self.text)):
                raise ValueError(f"{name} span {start}:{end} outside text of length {len(self.text)}")
        lo, hi = sorted((self.e1, self.e2))
        if hi[0] < lo[1]:
            raise ValueError(f"overlapping spans {self.e1} and {self.e2}")

    @property
    def qids(self) -> frozenset:
        return frozenset((self.qid1, self.qid2))

    def to_wire(self) -> dict:
        return {
            "text": self.text,
            "lang": self.lang,
            "e1": list(self.e1),
            "e2": list(self.e2),
        }


@dataclass(frozen=True)
class SentencePair:
    a: MarkedSentence
    b: MarkedSentence
    label: int
    blanked_a: tuple[bool, bool] = (False, False)
    blanked_b: tuple[bool, bool] = (False, False)

    def __post_init__(self):
        if self.label not in (POSITIVE, NEGATIVE):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")
        if self.label == POSITIVE:
            if (self.a.qid1, self.a.qid2) != (self.b.qid1, self.b.qid2):
                raise ValueError("positive pair must share the ordered entity pair")
        else:
            shared = self.a.qids & self.b.qids
            if len(shared) != 1:
                raise ValueError(f"negative pair must share exactly one entity, shares {sorted(shared)}")
            if self.a.pid == self.b.pid:
                raise ValueError("negative pair must have different relations")

    @property
    def key(self) -> tuple:
        return (self.a.sent_id, self.b.sent_id, self.label)

    def to_wire(self) -> dict:
        return {"a": self.a.to_wire(), "b": self.b.to_wire(), "label": self.label}

    def with_sides(self, a: MarkedSentence, b: MarkedSentence, blanked_a, blanked_b) -> "SentencePair":
        return replace(self, a=a, b=b, blanked_a=tuple(blanked_a), blanked_b=tuple(blanked_b))


@dataclass(frozen=True)
class BlankPolicy:
    probability: float = 0.7
    blank_token: str = "[BLANK]"

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"probability must be in [0,1], got {self.probability}")
