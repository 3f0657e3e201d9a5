"""Wiki markup to plain text with hyperlink spans.

Handles the markup subset that matters for link-labeled corpora:
comments, <ref> elements, (nested) {{templates}}, headings, bold/italic
quote runs, and internal [[links]]. Anything else passes through as
plain text. Link offsets refer to the final cleaned text.
"""

from __future__ import annotations

import re

from .types import Document, LinkSpan


class UnbalancedMarkup(ValueError):
    """Unclosed template or ref; the caller should skip the document."""


_COMMENT_RE = re.compile(r"<!--.*?-->", re.DOTALL)
_REF_SELFCLOSE_RE = re.compile(r"<ref\b[^<>]*/>", re.IGNORECASE)
_REF_RE = re.compile(r"<ref\b[^<>]*>.*?</ref\s*>", re.IGNORECASE | re.DOTALL)
_REF_OPEN_RE = re.compile(r"<ref\b", re.IGNORECASE)
_TEMPLATE_INNER_RE = re.compile(r"\{\{[^{}]*\}\}", re.DOTALL)
_HEADING_RE = re.compile(r"^\s*(={2,6})[^=\n].*?\1\s*$|^\s*==+\s*$", re.MULTILINE)
_QUOTES_RE = re.compile(r"'{2,5}")
_LINK_RE = re.compile(r"\[\[([^\[\]|]*)(?:\|([^\[\]]*))?\]\]")


def _strip_templates(text: str) -> str:
    if text.count("{{") != text.count("}}"):
        raise UnbalancedMarkup("unclosed template")
    while True:
        text, n = _TEMPLATE_INNER_RE.subn("", text)
        if n == 0:
            break
    if "{{" in text or "}}" in text:
        raise UnbalancedMarkup("unclosed template")
    return text


def _strip_refs(text: str) -> str:
    text = _REF_SELFCLOSE_RE.sub("", text)
    text = _REF_RE.sub("", text)
    if _REF_OPEN_RE.search(text):
        raise UnbalancedMarkup("unclosed ref")
    return text


def _normalize_whitespace(text: str) -> str:
    lines = []
    for line in text.split("\n"):
        line = re.sub(r"[ \t]+", " ", line).strip()
        if line:
            lines.append(line)
    return "\n".join(lines)


def parse_wikitext(raw: str, doc_id: str, lang: str) -> Document:
    """Convert one page body to a Document with link spans.

    Raises UnbalancedMarkup for unclosed templates or refs.
    """
    text = _COMMENT_RE.sub("", raw)
    text = _strip_refs(text)
    text = _strip_templates(text)
    text = _HEADING_RE.sub("", text)
    text = _QUOTES_RE.sub("", text)
    text = _normalize_whitespace(text)

    out: list[str] = []
    links: list[LinkSpan] = []
    pos = 0
    length = 0
    for m in _LINK_RE.finditer(text):
        out.append(text[pos : m.start()])
        length += m.start() - pos
        target = m.group(1).strip()
        anchor = m.group(2)
        surface = anchor.strip() if anchor is not None and anchor.strip() else target
        if target and surface:
            links.append(LinkSpan(start=length, end=length + len(surface), target_title=target, surface=surface))
            out.append(surface)
            length += len(surface)
        pos = m.end()
    out.append(text[pos:])

    doc = Document(doc_id=doc_id, lang=lang, text="".join(out), links=tuple(links))
    doc.validate()
    return doc
