"""Entity-mention blanking on raw text."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .types import BlankPolicy, MarkedSentence, SentencePair


def _blank_side(side: MarkedSentence, flips: tuple[bool, bool], token: str) -> MarkedSentence:
    if not any(flips):
        return side
    # rebuild the text left to right; spans are non-overlapping by type invariant
    parts = sorted(zip(("e1", "e2"), (side.e1, side.e2), flips), key=lambda t: t[1])
    out = []
    length = 0
    cursor = 0
    new_spans = {}
    for name, (start, end), flip in parts:
        out.append(side.text[cursor:start])
        length += start - cursor
        mention = token if flip else side.text[start:end]
        new_spans[name] = (length, length + len(mention))
        out.append(mention)
        length += len(mention)
        cursor = end
    out.append(side.text[cursor:])
    return replace(side, text="".join(out), e1=new_spans["e1"], e2=new_spans["e2"])


def apply_blanks(pair: SentencePair, policy: BlankPolicy, rng: np.random.Generator) -> SentencePair:
    """Independently replace each of the four mentions with the blank token.

    Flip order is fixed (a.e1, a.e2, b.e1, b.e2) so a given RNG state
    always yields the same result.
    """
    flips = rng.random(4) < policy.probability
    a = _blank_side(pair.a, (flips[0], flips[1]), policy.blank_token)
    b = _blank_side(pair.b, (flips[2], flips[3]), policy.blank_token)
    return pair.with_sides(a, b, (bool(flips[0]), bool(flips[1])), (bool(flips[2]), bool(flips[3])))
