"""Positive and strong-negative pair samplers.

Both samplers draw the anchor-language side first. A positive pair shares
the ordered entity pair; a strong negative shares exactly one entity and
carries two different relations. The negative sampler is rejection-based
because the one-shared-entity condition depends on the concrete draw.
"""

from __future__ import annotations

import numpy as np

from .index import PairIndex
from .types import NEGATIVE, POSITIVE, Exhausted, MarkedSentence, SentencePair

NEGATIVE_RETRY_BUDGET = 64


def _choice(rng: np.random.Generator, items: list):
    return items[int(rng.integers(len(items)))]


def _non_anchor_pool(group: dict, anchor: str, lang: str | None) -> list:
    if lang is not None:
        return list(group.get(lang, ()))
    pool = []
    for code in sorted(group):
        if code != anchor:
            pool.extend(group[code])
    return pool


def sample_positive(
    index: PairIndex,
    rng: np.random.Generator,
    *,
    anchor_lang: str = "en",
    lang: str | None = None,
) -> SentencePair:
    """Draw a pair sharing the same ordered entities across languages.

    `lang` pins the non-anchor side to one language; None allows any
    language other than the anchor. Raises Exhausted when no entity-pair
    group has both sides.
    """
    keys = index.positive_keys(anchor_lang, lang)
    if not keys:
        raise Exhausted(f"no positive group for anchor={anchor_lang!r} lang={lang!r}")
    group = index.pair_group(*_choice(rng, keys))
    a = _choice(rng, group[anchor_lang])
    if lang == anchor_lang:
        pool = [m for m in group[anchor_lang] if m is not a]
    else:
        pool = _non_anchor_pool(group, anchor_lang, lang)
    b = _choice(rng, pool)
    return SentencePair(a=a, b=b, label=POSITIVE)


def _exactly_one_shared(a: MarkedSentence, b: MarkedSentence) -> bool:
    return len(a.qids & b.qids) == 1


def sample_strong_negative(
    index: PairIndex,
    rng: np.random.Generator,
    *,
    anchor_lang: str = "en",
    lang: str | None = None,
    retry_budget: int = NEGATIVE_RETRY_BUDGET,
) -> SentencePair:
    """Draw a pair sharing one entity but differing in relation.

    Raises Exhausted when no entity qualifies or the retry budget runs
    out before a structurally valid draw appears.
    """
    qids = index.negative_qids(anchor_lang, lang)
    if not qids:
        raise Exhausted(f"no negative candidate for anchor={anchor_lang!r} lang={lang!r}")
    for _ in range(retry_budget):
        qid = _choice(rng, qids)
        a_pool = index.entity_pool(qid, anchor_lang)
        if not a_pool:
            continue
        a = _choice(rng, a_pool)
        if lang is None:
            b_pool = []
            for code in sorted(index.languages()):
                if code != anchor_lang:
                    b_pool.extend(index.entity_pool(qid, code))
        else:
            b_pool = index.entity_pool(qid, lang)
        b_pool = [m for m in b_pool if m.pid != a.pid and m is not a]
        if not b_pool:
            continue
        b = _choice(rng, b_pool)
        if not _exactly_one_shared(a, b):
            continue
        return SentencePair(a=a, b=b, label=NEGATIVE)
    raise Exhausted(f"retry budget spent for anchor={anchor_lang!r} lang={lang!r}")
