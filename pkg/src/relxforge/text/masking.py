"""Masked-token corruption for the language-model objective."""

from __future__ import annotations

import numpy as np

from .tokenizer import TokenSequence
from .vocab import MASK_ID, SPECIALS, Vocab

MLM_IGNORE_INDEX = -100
SELECT_RATE = 0.15
MASK_SHARE = 0.8
RANDOM_SHARE = 0.1  # remainder stays unchanged


def mask_for_mlm(seq: TokenSequence, vocab: Vocab, rng: np.random.Generator) -> tuple:
    """Corrupt 15% of non-special positions, 80/10/10 mask/random/keep.

    Returns (corrupted TokenSequence, labels). Labels hold the original
    id on selected positions and the ignore sentinel elsewhere. A
    sequence with no non-special positions comes back untouched.
    """
    ids = np.asarray(seq.ids, dtype=np.int64)
    labels = np.full(len(ids), MLM_IGNORE_INDEX, dtype=np.int64)
    candidates = np.flatnonzero(ids >= len(SPECIALS))
    if candidates.size == 0:
        return seq, labels

    selected = candidates[rng.random(candidates.size) < SELECT_RATE]
    if selected.size == 0:
        return seq, labels
    labels[selected] = ids[selected]

    action = rng.random(selected.size)
    randoms = rng.integers(len(SPECIALS), len(vocab), size=selected.size)
    out = ids.copy()
    out[selected[action < MASK_SHARE]] = MASK_ID
    random_rows = (action >= MASK_SHARE) & (action < MASK_SHARE + RANDOM_SHARE)
    out[selected[random_rows]] = randoms[random_rows]
    corrupted = TokenSequence(ids=tuple(int(x) for x in out), max_len=seq.max_len, truncated=seq.truncated)
    return corrupted, labels
