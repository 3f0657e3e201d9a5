"""Sharded, deterministic pair-stream generation.

The driver turns a requested pair count into a per-(label, language)
schedule, slices the schedule into contiguous shards, and lets each
shard draw independently with its own generator seeded from
(master seed, shard index). Output bytes therefore depend only on the
inputs, the seed, and the shard plan, never on the worker pool size.
"""

from __future__ import annotations

import json
import math
import multiprocessing
from pathlib import Path
from typing import Iterable, Iterator

from ..seeding import default_seed, make_rng
from .blanking import apply_blanks
from .index import PairIndex, build_index
from .sampling import sample_positive, sample_strong_negative
from .types import NEGATIVE, POSITIVE, BlankPolicy, Exhausted

DEDUP_RETRY_BUDGET = 16
MANIFEST_NAME = "pairs_manifest.json"


def bucket_name(label: int, lang: str) -> str:
    return f"{'positive' if label == POSITIVE else 'negative'}:{lang}"


def _allocate(count: int, buckets: list, weights: dict) -> dict:
    """Largest-remainder split of `count` over buckets, deterministic ties."""
    total = sum(weights[b] for b in buckets)
    raw = {b: count * weights[b] / total for b in buckets}
    alloc = {b: math.floor(raw[b]) for b in buckets}
    short = count - sum(alloc.values())
    order = sorted(buckets, key=lambda b: (-(raw[b] - alloc[b]), buckets.index(b)))
    for b in order[:short]:
        alloc[b] += 1
    return alloc


def _interleave(buckets: list, alloc: dict) -> list:
    """Evenly spread bucket occurrences so every prefix stays balanced."""
    slots = []
    for j, b in enumerate(buckets):
        n = alloc[b]
        slots.extend(((i + 0.5) / n, j, b) for i in range(n))
    slots.sort(key=lambda t: (t[0], t[1]))
    return [b for _, _, b in slots]


def _shard_sizes(count: int, shards: int) -> list:
    base, extra = divmod(count, shards)
    return [base + (1 if i < extra else 0) for i in range(shards)]


def _emit_shard(job):
    (index, schedule, path, seed, shard_idx, policy, anchor, retry_budget) = job
    rng = make_rng(seed, shard_idx)
    seen = set()
    keys = []
    emitted = {}
    skipped = {}
    forced_duplicates = 0
    blanked = 0
    lines = []
    for label, lang in schedule:
        pair = None
        for attempt in range(DEDUP_RETRY_BUDGET + 1):
            try:
                if label == POSITIVE:
                    candidate = sample_positive(index, rng, anchor_lang=anchor, lang=lang)
                else:
                    candidate = sample_strong_negative(
                        index, rng, anchor_lang=anchor, lang=lang, retry_budget=retry_budget
                    )
            except Exhausted:
                candidate = None
                break
            if candidate.key not in seen:
                pair = candidate
                break
            pair = candidate  # may be forced through if retries run out
        name = bucket_name(label, lang)
        if pair is None:
            skipped[name] = skipped.get(name, 0) + 1
            continue
        if pair.key in seen:
            forced_duplicates += 1
        seen.add(pair.key)
        keys.append(pair.key)
        pair = apply_blanks(pair, policy, rng)
        assert pair.a.lang == anchor and (pair.b.lang != anchor or lang == anchor)
        blanked += sum(pair.blanked_a) + sum(pair.blanked_b)
        emitted[name] = emitted.get(name, 0) + 1
        lines.append(json.dumps(pair.to_wire(), ensure_ascii=False, separators=(",", ":")))
    text = "\n".join(lines)
    if lines:
        text += "\n"
    Path(path).write_text(text, encoding="utf-8")
    return {
        "shard": shard_idx,
        "emitted": emitted,
        "skipped": skipped,
        "forced_duplicates": forced_duplicates,
        "blanked_mentions": blanked,
        "keys": keys,
    }


def generate_pairs(
    instances,
    count: int,
    out_dir,
    *,
    seed: int | None = None,
    policy: BlankPolicy | None = None,
    language_weights: dict | None = None,
    anchor_lang: str = "en",
    shards: int = 1,
    workers: int = 1,
    allow_anchor_pairs: bool = False,
    negative_retry_budget: int = 64,
) -> dict:
    """Write `count` pairs as sharded JSON-lines plus a manifest.

    Returns the manifest dict. Classes and languages are scheduled
    stratified (exact at small counts), so the positive fraction is 0.5
    whenever count divides evenly over the buckets.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if shards < 1:
        raise ValueError("shards must be >= 1")
    seed = default_seed() if seed is None else seed
    policy = BlankPolicy() if policy is None else policy
    index = instances if isinstance(instances, PairIndex) else build_index(instances)

    langs = sorted(code for code in index.languages() if code != anchor_lang)
    if allow_anchor_pairs and anchor_lang in index.languages():
        langs.append(anchor_lang)
    if language_weights is not None:
        unknown = set(language_weights) - set(langs)
        if unknown:
            raise ValueError(f"language weights for unavailable languages: {sorted(unknown)}")
        langs = [code for code in langs if code in language_weights]
    if not langs:
        raise Exhausted("no usable non-anchor language in the instance set")

    buckets = [(label, lang) for label in (POSITIVE, NEGATIVE) for lang in langs]
    weights = {
        (label, lang): 0.5 * (language_weights[lang] if language_weights else 1.0)
        for label, lang in buckets
    }
    alloc = _allocate(count, buckets, weights)
    schedule = _interleave(buckets, alloc)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sizes = _shard_sizes(count, shards)
    jobs = []
    offset = 0
    shard_files = []
    for shard_idx, size in enumerate(sizes):
        path = out_dir / f"pairs-{shard_idx:05d}-of-{shards:05d}.jsonl"
        shard_files.append(path.name)
        jobs.append(
            (
                index,
                schedule[offset : offset + size],
                str(path),
                seed,
                shard_idx,
                policy,
                anchor_lang,
                negative_retry_budget,
            )
        )
        offset += size

    if workers > 1 and len(jobs) > 1:
        with multiprocessing.Pool(min(workers, len(jobs))) as pool:
            results = pool.map(_emit_shard, jobs)
    else:
        results = [_emit_shard(job) for job in jobs]
    results.sort(key=lambda r: r["shard"])

    emitted: dict = {}
    skipped: dict = {}
    forced = 0
    blanked = 0
    all_keys = []
    for res in results:
        for k, v in res["emitted"].items():
            emitted[k] = emitted.get(k, 0) + v
        for k, v in res["skipped"].items():
            skipped[k] = skipped.get(k, 0) + v
        forced += res["forced_duplicates"]
        blanked += res["blanked_mentions"]
        all_keys.extend(res["keys"])

    total = sum(emitted.values())
    cross_shard_duplicates = len(all_keys) - len(set(all_keys)) - forced
    positives = sum(v for k, v in emitted.items() if k.startswith("positive:"))
    lang_hist: dict = {}
    for (label, lang), _ in alloc.items():
        name = bucket_name(label, lang)
        lang_hist[lang] = lang_hist.get(lang, 0) + emitted.get(name, 0)

    manifest = {
        "count_requested": count,
        "pairs_emitted": total,
        "positive_fraction": round(positives / total, 6) if total else 0.0,
        "seed": seed,
        "anchor_lang": anchor_lang,
        "allow_anchor_pairs": allow_anchor_pairs,
        "blank_probability": policy.probability,
        "blank_token": policy.blank_token,
        "shards": shard_files,
        "schedule": {bucket_name(*b): n for b, n in alloc.items()},
        "emitted": emitted,
        "skipped": skipped,
        "duplicates": {"forced_in_shard": forced, "cross_shard": cross_shard_duplicates},
        "blank": {
            "mentions": 4 * total,
            "blanked": blanked,
            "rate": round(blanked / (4 * total), 6) if total else 0.0,
        },
        "label_histogram": {"positive": positives, "negative": total - positives},
        "language_histogram": lang_hist,
    }
    (out_dir / MANIFEST_NAME).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return manifest


def pair_shard_paths(out_dir) -> list:
    return sorted(Path(out_dir).glob("pairs-*-of-*.jsonl"))


def read_pairs(source) -> Iterator[dict]:
    """Yield wire dicts from a shard file, a directory of shards, or paths."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        paths = pair_shard_paths(path) if path.is_dir() else [path]
    else:
        paths = [Path(p) for p in source]
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    yield json.loads(line)


def load_pair_manifest(out_dir) -> dict:
    return json.loads((Path(out_dir) / MANIFEST_NAME).read_text("utf-8"))
