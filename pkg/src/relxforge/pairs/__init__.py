"""Balanced cross-lingual sentence-pair construction with entity blanking."""

from .blanking import apply_blanks
from .generate import (
    MANIFEST_NAME,
    bucket_name,
    generate_pairs,
    load_pair_manifest,
    pair_shard_paths,
    read_pairs,
)
from .index import PairIndex, build_index
from .sampling import sample_positive, sample_strong_negative
from .types import (
    NEGATIVE,
    POSITIVE,
    BlankPolicy,
    Exhausted,
    MarkedSentence,
    SentencePair,
)

__all__ = [
    "MANIFEST_NAME",
    "NEGATIVE",
    "POSITIVE",
    "BlankPolicy",
    "Exhausted",
    "MarkedSentence",
    "PairIndex",
    "SentencePair",
    "apply_blanks",
    "bucket_name",
    "build_index",
    "generate_pairs",
    "load_pair_manifest",
    "pair_shard_paths",
    "read_pairs",
    "sample_positive",
    "sample_strong_negative",
]
