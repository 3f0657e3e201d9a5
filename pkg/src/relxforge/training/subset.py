"""Length-balanced stratified subset selection.

Many candidate subsets are drawn with class proportions matching the
full set (largest-remainder rounding), and the one whose average
character and word lengths sit closest to the full set's is kept:

    score = |avgChars(sub)/avgChars(full) - 1| + |avgWords(sub)/avgWords(full) - 1|

Trials are scored in bulk: for every class, each trial picks its
members as the smallest-key entries of a random key matrix, which is a
uniform without-replacement draw.
"""

from __future__ import annotations

import numpy as np

from ..seeding import default_seed, make_rng
from .dataset import LabeledDataset


class SizeTooLarge(ValueError):
    pass


def stratified_targets(class_counts: dict, size: int) -> dict:
    """Per-class sample counts proportional to class_counts, summing to size."""
    total = sum(class_counts.values())
    if size > total:
        raise SizeTooLarge(f"requested {size} from {total} examples")
    if size < 0:
        raise ValueError("size must be non-negative")
    labels = sorted(class_counts)
    quotas = {c: class_counts[c] * size / total for c in labels}
    targets = {c: int(quotas[c]) for c in labels}
    leftover = size - sum(targets.values())
    for c in sorted(labels, key=lambda c: (targets[c] - quotas[c], c))[:leftover]:
        targets[c] += 1
    return targets


def length_score(full: LabeledDataset, subset) -> float:
    """Distance between the subset's average lengths and the full set's."""
    texts_full = [ex.text for ex in full]
    texts_sub = [ex.text for ex in subset]
    if not texts_sub:
        raise ValueError("empty subset")
    chars = lambda ts: sum(len(t) for t in ts) / len(ts)
    words = lambda ts: sum(len(t.split()) for t in ts) / len(ts)
    return abs(chars(texts_sub) / chars(texts_full) - 1) + abs(
        words(texts_sub) / words(texts_full) - 1
    )


def stratified_sample(dataset: LabeledDataset, size: int, rng: np.random.Generator) -> LabeledDataset:
    """One random subset honoring the stratified targets, original order."""
    targets = stratified_targets(dataset.class_counts(), size)
    keep = []
    for label in sorted(targets):
        group = dataset.by_class(label)
        picked = rng.choice(len(group), size=targets[label], replace=False)
        keep.extend(group[int(i)] for i in picked)
    order = {id(ex): i for i, ex in enumerate(dataset)}
    keep.sort(key=lambda ex: order[id(ex)])
    return dataset.replaced(keep)


def select_subset(
    dataset: LabeledDataset, size: int = 502, trials: int = 10000, seed: int | None = None
) -> LabeledDataset:
    """Best-scoring subset over the given number of stratified trials."""
    if trials < 1:
        raise ValueError("trials must be positive")
    if size < 1:
        raise ValueError("size must be positive")
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    targets = stratified_targets(dataset.class_counts(), size)
    rng = make_rng(seed if seed is not None else default_seed(), 601)

    texts = [ex.text for ex in dataset]
    n = len(texts)
    char_total = sum(len(t) for t in texts)
    word_total = sum(len(t.split()) for t in texts)
    avg_chars = char_total / n
    avg_words = word_total / n

    char_sum = np.zeros(trials)
    word_sum = np.zeros(trials)
    picks = {}
    for label in sorted(targets):
        t = targets[label]
        if t == 0:
            continue
        group = dataset.by_class(label)
        g_chars = np.array([len(ex.text) for ex in group], dtype=np.float64)
        g_words = np.array([len(ex.text.split()) for ex in group], dtype=np.float64)
        if t == len(group):
            idx = np.tile(np.arange(len(group)), (trials, 1))
        else:
            keys = rng.random((trials, len(group)))
            idx = np.argpartition(keys, t - 1, axis=1)[:, :t]
        char_sum += g_chars[idx].sum(axis=1)
        word_sum += g_words[idx].sum(axis=1)
        picks[label] = idx

    scores = np.abs(char_sum / size / avg_chars - 1) + np.abs(word_sum / size / avg_words - 1)
    best = int(scores.argmin())

    keep = []
    for label, idx in picks.items():
        group = dataset.by_class(label)
        keep.extend(group[int(i)] for i in idx[best])
    order = {id(ex): i for i, ex in enumerate(dataset)}
    keep.sort(key=lambda ex: order[id(ex)])
    return dataset.replaced(keep)
