"""Rule-based sentence splitting with span remapping.

A boundary is a terminator (. ! ?), optionally followed by closing
quotes/brackets, then whitespace, then an uppercase letter, an opening
quote, or a newline/end of text. Boundaries inside a link span are
suppressed, as are periods that close a known abbreviation for the
language. Newlines are always hard boundaries.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass
from functools import lru_cache

from .types import Document, LinkSpan

_TERMINATORS = ".!?"
_CLOSERS = "\"'”’»)]"
_OPENERS = "\"'“‘«¿¡(["

MIN_SENTENCE_CODEPOINTS = 5


@dataclass(frozen=True)
class SentencePrecursor:
    """A sentence cut out of a document, links remapped to sentence offsets."""

    doc_id: str
    lang: str
    index: int
    text: str
    links: tuple[LinkSpan, ...]


@lru_cache(maxsize=None)
def abbreviations(lang: str) -> frozenset[str]:
    """Abbreviation list shipped for the language; empty if none is shipped."""
    try:
        data = importlib.resources.files("relxforge.corpus.data.abbrev").joinpath(f"{lang}.txt").read_text("utf-8")
    except (FileNotFoundError, ModuleNotFoundError):
        return frozenset()
    return frozenset(line.strip() for line in data.splitlines() if line.strip())


def _word_ending_at(text: str, dot_pos: int) -> str:
    start = dot_pos
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    return text[start : dot_pos + 1]


def _boundaries(text: str, links: tuple[LinkSpan, ...], abbrevs: frozenset[str]) -> list[int]:
    """End-exclusive cut positions, not counting the final end of text."""
    in_span = [False] * (len(text) + 1)
    for link in links:
        for i in range(link.start + 1, link.end):
            in_span[i] = True

    cuts = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            if not in_span[i]:
                cuts.append(i)
            i += 1
            continue
        if ch in _TERMINATORS:
            j = i + 1
            while j < n and text[j] in _CLOSERS:
                j += 1
            if j >= n:
                break
            if text[j].isspace() and text[j] != "\n":
                k = j
                while k < n and text[k].isspace() and text[k] != "\n":
                    k += 1
                follows = k < n and (text[k].isupper() or text[k] in _OPENERS)
                is_abbrev = ch == "." and _word_ending_at(text, i) in abbrevs
                if follows and not is_abbrev and not in_span[j]:
                    cuts.append(j)
                i = j
                continue
        i += 1
    return cuts


def split_sentences(doc: Document, lang: str | None = None) -> list[SentencePrecursor]:
    """Split a document into sentence precursors with remapped link spans.

    Degenerate inputs yield zero or one sentence; never raises.
    """
    lang = lang or doc.lang
    abbrevs = abbreviations(lang)
    cuts = _boundaries(doc.text, doc.links, abbrevs)
    pieces = []
    prev = 0
    for cut in cuts:
        pieces.append((prev, cut))
        prev = cut
    pieces.append((prev, len(doc.text)))

    out: list[SentencePrecursor] = []
    for start, end in pieces:
        raw = doc.text[start:end]
        lead = len(raw) - len(raw.lstrip())
        sent_text = raw.strip()
        if not sent_text:
            continue
        base = start + lead
        sent_links = []
        for link in doc.links:
            if link.start >= base and link.end <= base + len(sent_text):
                sent_links.append(
                    LinkSpan(link.start - base, link.end - base, link.target_title, link.surface)
                )
        out.append(
            SentencePrecursor(
                doc_id=doc.doc_id,
                lang=lang,
                index=len(out),
                text=sent_text,
                links=tuple(sent_links),
            )
        )
    return out
