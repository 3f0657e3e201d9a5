"""Entity-marker insertion with marker-preserving truncation."""

from __future__ import annotations

from .tokenizer import TokenSequence, piece_ids
from .vocab import (
    CLS_ID,
    E1_CLOSE_ID,
    E1_OPEN_ID,
    E2_CLOSE_ID,
    E2_OPEN_ID,
    SEP_ID,
    Vocab,
)


class SpansTooWide(ValueError):
    """Both marked entities cannot fit inside max_len together."""


def mark_entities(text: str, e1: tuple, e2: tuple, vocab: Vocab, max_len: int) -> TokenSequence:
    """Encode a sentence as [CLS] .. <e1> .. </e1> .. <e2> .. </e2> .. [SEP].

    Marker ids follow the argument (e1 span gets the e1 markers) while
    marker positions follow text order. When the framed sequence exceeds
    max_len the context outside the two entities is trimmed from both
    ends, keeping the window centered on the entities; the entity window
    itself is never cut.
    """
    spans = [(e1, E1_OPEN_ID, E1_CLOSE_ID), (e2, E2_OPEN_ID, E2_CLOSE_ID)]
    spans.sort(key=lambda item: item[0])
    (first, open1, close1), (second, open2, close2) = spans
    if first[1] > second[0]:
        raise ValueError(f"entity spans overlap: {e1} and {e2}")

    pre = piece_ids(text[: first[0]], vocab)
    core = (
        [open1]
        + piece_ids(text[first[0] : first[1]], vocab)
        + [close1]
        + piece_ids(text[first[1] : second[0]], vocab)
        + [open2]
        + piece_ids(text[second[0] : second[1]], vocab)
        + [close2]
    )
    post = piece_ids(text[second[1] :], vocab)

    budget = max_len - 2 - len(core)
    if budget < 0:
        raise SpansTooWide(
            f"entity window of {len(core)} tokens plus framing exceeds max_len {max_len}"
        )
    left = min(len(pre), (budget + 1) // 2)
    right = min(len(post), budget - left)
    left = min(len(pre), budget - right)  # hand unused right-side budget back
    truncated = left < len(pre) or right < len(post)
    ids = [CLS_ID] + (pre[len(pre) - left :] if left else []) + core + post[:right] + [SEP_ID]
    return TokenSequence(ids=tuple(ids), max_len=max_len, truncated=truncated)
