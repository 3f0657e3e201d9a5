"""Subword vocabulary: fixed specials, frequency-merge trainer, file format.

The file format is one token per line, line number = id, UTF-8. The ten
special tokens always occupy ids 0..9 in the order below. Continuation
pieces carry the `##` prefix.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

SPECIALS = (
    "[PAD]",
    "[UNK]",
    "[CLS]",
    "[SEP]",
    "[MASK]",
    "[BLANK]",
    "<e1>",
    "</e1>",
    "<e2>",
    "</e2>",
)
(
    PAD_ID,
    UNK_ID,
    CLS_ID,
    SEP_ID,
    MASK_ID,
    BLANK_ID,
    E1_OPEN_ID,
    E1_CLOSE_ID,
    E2_OPEN_ID,
    E2_CLOSE_ID,
) = range(10)
CONTINUATION = "##"
MIN_TARGET_SIZE = 300


class CorpusTooSmall(ValueError):
    """The corpus or the size budget cannot support a usable vocabulary."""


class Vocab:
    def __init__(self, tokens: Iterable[str]):
        tokens = list(tokens)
        if tuple(tokens[: len(SPECIALS)]) != SPECIALS:
            raise ValueError("vocabulary must start with the ten special tokens in canonical order")
        self._id_to_token = tokens
        self._token_to_id = {tok: i for i, tok in enumerate(tokens)}
        if len(self._token_to_id) != len(tokens):
            raise ValueError("duplicate token in vocabulary")

    def __len__(self):
        return len(self._id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self._token_to_id

    def id_of(self, token: str) -> int | None:
        return self._token_to_id.get(token)

    def token_of(self, idx: int) -> str:
        return self._id_to_token[idx]

    @property
    def special_ids(self) -> frozenset:
        return frozenset(range(len(SPECIALS)))

    def save(self, path) -> None:
        Path(path).write_text("\n".join(self._id_to_token) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Vocab":
        lines = Path(path).read_text("utf-8").splitlines()
        return cls([line for line in lines if line != ""])


def _word_symbols(word: str) -> tuple:
    return (word[0],) + tuple(CONTINUATION + ch for ch in word[1:])


def _merge_pair(symbols: tuple, pair: tuple, merged: str) -> tuple:
    out = []
    i = 0
    while i < len(symbols):
        if i + 1 < len(symbols) and symbols[i] == pair[0] and symbols[i + 1] == pair[1]:
            out.append(merged)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return tuple(out)


def train_vocab(corpus, target_size: int, min_frequency: int = 1) -> Vocab:
    """Learn a subword vocabulary by iterative pair merging.

    Highest pair frequency merges first; frequency ties resolve to the
    lexicographically smallest pair, so retraining reproduces the same
    vocabulary byte for byte. Merging stops at target_size or when no
    pair reaches min_frequency.
    """
    if isinstance(corpus, str):
        corpus = [corpus]
    counts: dict = {}
    for chunk in corpus:
        for word in chunk.split():
            if word in SPECIALS:
                continue
            counts[word] = counts.get(word, 0) + 1
    if not counts:
        raise CorpusTooSmall("no words in training corpus")

    chars = sorted({ch for word in counts for ch in word})
    alphabet = chars + [CONTINUATION + ch for ch in chars]
    floor = max(MIN_TARGET_SIZE, len(SPECIALS) + len(alphabet))
    if target_size < floor:
        raise CorpusTooSmall(
            f"target_size {target_size} below minimum {floor} (specials + alphabet, floor {MIN_TARGET_SIZE})"
        )

    tokens = list(SPECIALS) + alphabet
    seen = set(tokens)
    words = {word: _word_symbols(word) for word in counts}
    while len(tokens) < target_size:
        pair_freq: dict = {}
        for word, symbols in words.items():
            freq = counts[word]
            for left, right in zip(symbols, symbols[1:]):
                pair_freq[(left, right)] = pair_freq.get((left, right), 0) + freq
        if not pair_freq:
            break
        best = min(pair_freq, key=lambda p: (-pair_freq[p], p))
        if pair_freq[best] < min_frequency:
            break
        merged = best[0] + best[1][len(CONTINUATION):]
        words = {
            word: _merge_pair(symbols, best, merged) if best[0] in symbols else symbols
            for word, symbols in words.items()
        }
        if merged not in seen:
            tokens.append(merged)
            seen.add(merged)
    return Vocab(tokens)
