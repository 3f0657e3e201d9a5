"""Greedy longest-match encoding and its inverse."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .vocab import CONTINUATION, PAD_ID, SPECIALS, UNK_ID, Vocab

_SPECIAL_RE = re.compile("|".join(re.escape(tok) for tok in SPECIALS))


@dataclass(frozen=True)
class TokenSequence:
    """Unpadded id sequence; padding happens at batch assembly."""

    ids: tuple
    max_len: int
    truncated: bool = False

    def __post_init__(self):
        if len(self.ids) > self.max_len:
            raise ValueError(f"{len(self.ids)} ids exceed max_len {self.max_len}")

    def __len__(self):
        return len(self.ids)

    @property
    def attention_mask(self) -> tuple:
        return (1,) * len(self.ids)


def word_pieces(word: str, vocab: Vocab) -> list:
    """Greedy longest-match split of one whitespace token.

    Any unmatchable position collapses the whole word to [UNK].
    """
    pieces = []
    start = 0
    while start < len(word):
        end = len(word)
        piece_id = None
        while end > start:
            candidate = word[start:end] if start == 0 else CONTINUATION + word[start:end]
            piece_id = vocab.id_of(candidate)
            if piece_id is not None:
                break
            end -= 1
        if piece_id is None:
            return [UNK_ID]
        pieces.append(piece_id)
        start = end
    return pieces


def piece_ids(text: str, vocab: Vocab) -> list:
    """Encode raw text to ids without framing tokens.

    Special-token literals embedded in the text (the blank token in
    particular) map to their reserved ids instead of being split.
    """
    ids = []
    cursor = 0
    for m in _SPECIAL_RE.finditer(text):
        for word in text[cursor : m.start()].split():
            ids.extend(word_pieces(word, vocab))
        ids.append(vocab.id_of(m.group()))
        cursor = m.end()
    for word in text[cursor:].split():
        ids.extend(word_pieces(word, vocab))
    return ids


def encode(text: str, vocab: Vocab, max_len: int) -> TokenSequence:
    ids = piece_ids(text, vocab)
    truncated = len(ids) > max_len
    if truncated:
        ids = ids[:max_len]
    return TokenSequence(ids=tuple(ids), max_len=max_len, truncated=truncated)


def decode(ids, vocab: Vocab) -> str:
    """Rebuild text from ids; inverse of encode up to whitespace collapsing."""
    words = []
    for idx in ids:
        token = vocab.token_of(int(idx))
        if token.startswith(CONTINUATION) and words:
            words[-1] += token[len(CONTINUATION):]
        else:
            words.append(token)
    return " ".join(words)


def pad_batch(seqs, length: int | None = None) -> tuple:
    """Stack sequences into (ids, mask) int64 arrays padded with [PAD]."""
    if length is None:
        length = max((len(s) for s in seqs), default=0)
    ids = np.full((len(seqs), length), PAD_ID, dtype=np.int64)
    mask = np.zeros((len(seqs), length), dtype=np.int64)
    for row, seq in enumerate(seqs):
        n = len(seq)
        if n > length:
            raise ValueError(f"sequence of length {n} does not fit padded length {length}")
        ids[row, :n] = seq.ids
        mask[row, :n] = 1
    return ids, mask
