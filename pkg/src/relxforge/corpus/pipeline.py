"""End-to-end corpus extraction: dump pages -> sentence records.

Documents are independent work units. With workers > 1 the pages are
parsed in a process pool but results are merged in input order, so the
output is byte-identical for any worker count.
"""

from __future__ import annotations

import importlib.resources
import json
import multiprocessing
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .sentences import MIN_SENTENCE_CODEPOINTS, split_sentences
from .sitelinks import ResolutionStats, SitelinkTable, resolve_entities
from .types import SentenceRecord
from .wikitext import UnbalancedMarkup, parse_wikitext

_PAGE_RE = re.compile(
    r"<page>.*?<title>(?P<title>.*?)</title>.*?<text[^>]*>(?P<text>.*?)</text>.*?</page>",
    re.DOTALL,
)
_XML_UNESCAPE = {"&lt;": "<", "&gt;": ">", "&amp;": "&", "&quot;": '"', "&#39;": "'"}


@dataclass
class ExtractStats:
    pages: int = 0
    skipped_markup: int = 0
    sentences: int = 0
    dropped_short: int = 0
    dropped_no_entity: int = 0
    resolution: ResolutionStats = field(default_factory=ResolutionStats)

    def to_json_dict(self) -> dict:
        return {
            "pages": self.pages,
            "skipped_markup": self.skipped_markup,
            "sentences": self.sentences,
            "dropped_short": self.dropped_short,
            "dropped_no_entity": self.dropped_no_entity,
            "links_resolved": self.resolution.resolved,
            "links_unresolved": self.resolution.unresolved,
            "resolution_rate": round(self.resolution.rate, 6),
        }


def _unescape(text: str) -> str:
    for k, v in _XML_UNESCAPE.items():
        text = text.replace(k, v)
    return text


def iter_dump_pages(path: Path) -> Iterator[tuple[str, str]]:
    """Yield (title, wikitext) pairs from a page-per-record XML file or a
    directory of one-wikitext-file-per-document."""
    path = Path(path)
    if path.is_dir():
        for child in sorted(path.iterdir()):
            if child.is_file():
                yield child.stem, child.read_text("utf-8")
        return
    content = path.read_text("utf-8")
    for m in _PAGE_RE.finditer(content):
        yield _unescape(m.group("title").strip()), _unescape(m.group("text"))


def _parse_one(args: tuple[str, str, str]) -> tuple[str, object]:
    title, raw, lang = args
    try:
        return "ok", parse_wikitext(raw, doc_id=title, lang=lang)
    except UnbalancedMarkup as exc:
        return "skip", f"{title}: {exc}"


def extract_records(
    pages: Iterable[tuple[str, str]],
    lang: str,
    table: SitelinkTable,
    stats: ExtractStats | None = None,
    workers: int = 1,
    min_len: int = MIN_SENTENCE_CODEPOINTS,
) -> Iterator[SentenceRecord]:
    """Parse, split, and resolve pages into filtered sentence records.

    Sentences shorter than min_len code points or without any resolved
    entity are dropped (counted). Unparseable pages are skipped
    (counted), never fatal.
    """
    stats = stats if stats is not None else ExtractStats()
    tasks = ((title, raw, lang) for title, raw in pages)
    if workers > 1:
        pool = multiprocessing.Pool(workers)
        results = pool.imap(_parse_one, tasks, chunksize=16)
    else:
        pool = None
        results = map(_parse_one, tasks)
    try:
        for status, payload in results:
            stats.pages += 1
            if status == "skip":
                stats.skipped_markup += 1
                continue
            precursors = split_sentences(payload)
            for record in resolve_entities(precursors, table, stats.resolution):
                if len(record.text) < min_len:
                    stats.dropped_short += 1
                    continue
                if not record.entities:
                    stats.dropped_no_entity += 1
                    continue
                stats.sentences += 1
                yield record
    finally:
        if pool is not None:
            pool.close()
            pool.join()


def load_relation_config(path: Path | None = None) -> tuple[dict[str, str], dict[str, str]]:
    """Load {relation name -> pid} and the pid merge map.

    Without a path the editable default shipped with the package is used.
    """
    if path is None:
        raw = importlib.resources.files("relxforge.corpus.data").joinpath("relations.json").read_text("utf-8")
    else:
        raw = Path(path).read_text("utf-8")
    cfg = json.loads(raw)
    return dict(cfg["relations"]), dict(cfg.get("merge", {}))
