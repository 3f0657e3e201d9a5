"""Labeled relation classification datasets.

Examples carry their sentence with inline ``<e1>…</e1>`` and
``<e2>…</e2>`` markers, in the two-line record layout used by the
public relation classification sets:

    <id><TAB>"<sentence with markers>"
    <directional label>
    <blank line>
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .schema import RelationSchema

_MARKERS = ("<e1>", "</e1>", "<e2>", "</e2>")
_MARKER_RE = re.compile("(" + "|".join(re.escape(m) for m in _MARKERS) + ")")


class MalformedRecord(ValueError):
    """A record that does not follow the two-line layout."""

    def __init__(self, line_number: int, reason: str):
        super().__init__(f"line {line_number}: {reason}")
        self.line_number = line_number


@dataclass(frozen=True)
class RelationExample:
    uid: str
    text: str
    label: int
    lang: str = "en"

    def __post_init__(self):
        counts = [self.text.count(m) for m in _MARKERS]
        if counts != [1, 1, 1, 1]:
            raise ValueError(f"example {self.uid}: expected one of each entity marker, got {counts}")
        if self.label < 0:
            raise ValueError(f"example {self.uid}: negative class id")


def parse_marked_text(text: str) -> tuple:
    """Strip the four entity markers.

    Returns (clean text, e1 span, e2 span) with character spans into the
    clean text. Marker pairs may appear in either order but must not
    interleave.
    """
    spans = {}
    clean = []
    length = 0
    open_tag = None
    start = 0
    for part in _MARKER_RE.split(text):
        if part in ("<e1>", "<e2>"):
            if open_tag is not None:
                raise ValueError("interleaved entity markers")
            open_tag, start = part, length
        elif part in ("</e1>", "</e2>"):
            if open_tag != part.replace("/", ""):
                raise ValueError(f"unmatched closing marker {part}")
            spans[open_tag] = (start, length)
            open_tag = None
        else:
            clean.append(part)
            length += len(part)
    if open_tag is not None or set(spans) != {"<e1>", "<e2>"}:
        raise ValueError("expected exactly one <e1>…</e1> and one <e2>…</e2> pair")
    return "".join(clean), spans["<e1>"], spans["<e2>"]


@dataclass(frozen=True)
class LabeledDataset:
    examples: tuple
    schema: RelationSchema
    split: str = "train"
    _by_class: dict = field(init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        examples = tuple(self.examples)
        object.__setattr__(self, "examples", examples)
        if self.split not in ("train", "dev", "test"):
            raise ValueError(f"unknown split tag {self.split!r}")
        seen = set()
        by_class = {}
        for ex in examples:
            if ex.uid in seen:
                raise ValueError(f"duplicate example id {ex.uid!r}")
            seen.add(ex.uid)
            if ex.label >= self.schema.num_classes:
                raise ValueError(f"example {ex.uid}: class id {ex.label} outside the schema")
            by_class.setdefault(ex.label, []).append(ex)
        object.__setattr__(self, "_by_class", {k: tuple(v) for k, v in by_class.items()})

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self):
        return iter(self.examples)

    def __getitem__(self, i: int) -> RelationExample:
        return self.examples[i]

    def class_counts(self) -> dict:
        return {label: len(group) for label, group in self._by_class.items()}

    def by_class(self, label: int) -> tuple:
        return self._by_class.get(label, ())

    def labels(self) -> list:
        return [ex.label for ex in self.examples]

    def replaced(self, examples, split: str | None = None) -> "LabeledDataset":
        return LabeledDataset(tuple(examples), self.schema, split or self.split)


def load_kbp37(
    path, schema: RelationSchema, *, split: str = "train", lang: str = "en"
) -> LabeledDataset:
    """Read a two-line-format file into a dataset.

    Raises MalformedRecord with the 1-based line number of the first
    offending line.
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    examples = []
    i = 0
    while i < len(lines):
        if not lines[i].strip():
            i += 1
            continue
        lineno = i + 1
        head = lines[i].rstrip("\r")
        if "\t" not in head:
            raise MalformedRecord(lineno, "expected <id><TAB><quoted sentence>")
        uid, _, quoted = head.partition("\t")
        quoted = quoted.strip()
        if len(quoted) < 2 or not (quoted.startswith('"') and quoted.endswith('"')):
            raise MalformedRecord(lineno, "sentence must be wrapped in double quotes")
        text = quoted[1:-1].strip()
        if i + 1 >= len(lines) or not lines[i + 1].strip():
            raise MalformedRecord(lineno + 1, "missing relation line")
        label_line = lines[i + 1].strip()
        try:
            label = schema.class_id(label_line)
        except KeyError:
            raise MalformedRecord(lineno + 1, f"unknown relation label {label_line!r}") from None
        try:
            example = RelationExample(uid=uid.strip(), text=text, label=label, lang=lang)
        except ValueError as exc:
            raise MalformedRecord(lineno, str(exc)) from None
        examples.append(example)
        i += 2
    return LabeledDataset(tuple(examples), schema, split)


def save_kbp37(dataset: LabeledDataset, path) -> None:
    """Write a dataset back out in the two-line format load_kbp37 reads."""
    lines = []
    for example in dataset:
        lines.append(f'{example.uid}\t"{example.text}"')
        lines.append(dataset.schema.label(example.label))
        lines.append("")
    Path(path).write_text("\n".join(lines), encoding="utf-8")
