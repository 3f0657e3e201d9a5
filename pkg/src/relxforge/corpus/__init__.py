"""Distant-supervision corpus pipeline: wiki dumps to relation instances."""

from .linking import link_sentences
from .pipeline import ExtractStats, extract_records, iter_dump_pages, load_relation_config
from .sentences import SentencePrecursor, split_sentences
from .sitelinks import ResolutionStats, SitelinkTable, normalize_title, resolve_entities
from .triples import CyclicMergeMap, TripleStore, merge_relations
from .types import (
    Document,
    Entity,
    LinkSpan,
    RelationInstance,
    SentenceRecord,
    read_instances_jsonl,
    read_records_jsonl,
    write_jsonl,
)
from .wikitext import UnbalancedMarkup, parse_wikitext

__all__ = [
    "Document",
    "Entity",
    "LinkSpan",
    "RelationInstance",
    "SentenceRecord",
    "SentencePrecursor",
    "SitelinkTable",
    "TripleStore",
    "ResolutionStats",
    "ExtractStats",
    "CyclicMergeMap",
    "UnbalancedMarkup",
    "parse_wikitext",
    "split_sentences",
    "resolve_entities",
    "normalize_title",
    "merge_relations",
    "link_sentences",
    "extract_records",
    "iter_dump_pages",
    "load_relation_config",
    "read_records_jsonl",
    "read_instances_jsonl",
    "write_jsonl",
]
