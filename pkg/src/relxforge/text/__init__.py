"""Subword vocabulary, encoding, entity markers, and MLM masking."""

from .markers import SpansTooWide, mark_entities
from .masking import MLM_IGNORE_INDEX, mask_for_mlm
from .tokenizer import TokenSequence, decode, encode, pad_batch, piece_ids, word_pieces
from .vocab import (
    BLANK_ID,
    CLS_ID,
    CONTINUATION,
    CorpusTooSmall,
    E1_CLOSE_ID,
    E1_OPEN_ID,
    E2_CLOSE_ID,
    E2_OPEN_ID,
    MASK_ID,
    MIN_TARGET_SIZE,
    PAD_ID,
    SEP_ID,
    SPECIALS,
    UNK_ID,
    Vocab,
    train_vocab,
)

__all__ = [
    "BLANK_ID",
    "CLS_ID",
    "CONTINUATION",
    "CorpusTooSmall",
    "E1_CLOSE_ID",
    "E1_OPEN_ID",
    "E2_CLOSE_ID",
    "E2_OPEN_ID",
    "MASK_ID",
    "MIN_TARGET_SIZE",
    "MLM_IGNORE_INDEX",
    "PAD_ID",
    "SEP_ID",
    "SPECIALS",
    "SpansTooWide",
    "TokenSequence",
    "UNK_ID",
    "Vocab",
    "decode",
    "encode",
    "mark_entities",
    "mask_for_mlm",
    "pad_batch",
    "piece_ids",
    "train_vocab",
    "word_pieces",
]
