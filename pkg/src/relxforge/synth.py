"""Synthetic bilingual relation world for desk-scale experiments.

Builds a small knowledge base of typed entities and facts over eight
template relations, then renders sentences in two pseudo-languages.
Language l1 is plain templated English. Language l2 applies a
deterministic word-substitution cipher to every non-entity word and
reverses the word order, so the two languages share no surface
vocabulary except entity names, yet every l1 sentence has a faithful
l2 rendering. That gives cross-lingual pair pretraining something real
to learn (aligning two disjoint vocabularies) while staying fully
reproducible.

The relations come in pairs over the same type signature, so strong
negatives (shared entity, different relation) always exist:

    person x city:     born_in, resides_in
    city x country:    capital_of, largest_city_of
    person x org:      works_for, founded
    person x book:     wrote, translated
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .pairs import MarkedSentence
from .seeding import default_seed, make_rng
from .training import LabeledDataset, RelationExample, RelationSchema

L1 = "l1"
L2 = "l2"

SYNTH_RELATIONS = (
    "born_in",
    "resides_in",
    "capital_of",
    "largest_city_of",
    "works_for",
    "founded",
    "wrote",
    "translated",
)

# subject type, object type per relation
_SIGNATURES = {
    "born_in": ("person", "city"),
    "resides_in": ("person", "city"),
    "capital_of": ("city", "country"),
    "largest_city_of": ("city", "country"),
    "works_for": ("person", "org"),
    "founded": ("person", "org"),
    "wrote": ("person", "book"),
    "translated": ("person", "book"),
}

_TEMPLATES = {
    "born_in": (
        "{s} was born in the town of {o} {f}",
        "the records show {s} came into the world at {o}",
        "{o} is remembered as the birthplace of {s}",
        "{f} the birth of {s} took place in {o}",
    ),
    "resides_in": (
        "{s} currently lives near the center of {o}",
        "{f} {s} keeps a small home in {o}",
        "the house of {s} stands in {o} {f}",
        "{o} is where {s} settled down",
    ),
    "capital_of": (
        "{s} serves as the seat of government for {o}",
        "the capital of {o} is {s} {f}",
        "{f} lawmakers in {o} gather at {s}",
        "{s} became the administrative capital of {o}",
    ),
    "largest_city_of": (
        "{s} is by far the biggest city in {o}",
        "no city in {o} has more people than {s}",
        "{f} the population of {o} concentrates in {s}",
        "{s} dwarfs every other settlement of {o}",
    ),
    "works_for": (
        "{s} holds a senior position at {o}",
        "{f} {s} joined the staff of {o}",
        "the payroll of {o} lists {s} {f}",
        "{s} spends long days working for {o}",
    ),
    "founded": (
        "{s} established {o} with modest savings",
        "{o} was started from nothing by {s}",
        "{f} {s} created the firm known as {o}",
        "the founding of {o} is credited to {s}",
    ),
    "wrote": (
        "{s} wrote the celebrated volume {o}",
        "{o} flowed from the pen of {s} {f}",
        "{f} {s} finished the manuscript of {o}",
        "every page of {o} was composed by {s}",
    ),
    "translated": (
        "{s} translated {o} into several tongues",
        "the foreign edition of {o} was prepared by {s}",
        "{f} {s} rendered {o} for new readers",
        "{s} spent two winters translating {o}",
    ),
}

_NO_RELATION_TEMPLATES = (
    "{s} once gave a short speech about {o}",
    "{f} {s} has never even seen {o}",
    "a photograph of {s} hangs beside one of {o}",
    "{s} and {o} appeared in the same news story",
    "critics compared {s} to {o} at length",
)

_FILLERS = (
    "reportedly",
    "famously",
    "apparently",
    "decades ago",
    "according to neighbors",
    "as everyone knows",
    "per the archives",
    "quietly",
)

_CONSONANTS = "bdfgklmnprstvz"
_VOWELS = "aeiou"
_CIPHER_SALT = b"relxforge-l2"


def cipher_word(word: str) -> str:
    """Deterministic pseudo-word for one lowercase l1 word."""
    digest = hashlib.sha256(_CIPHER_SALT + word.encode("utf-8")).digest()
    syllables = 2 + digest[0] % 2
    out = []
    for i in range(syllables):
        out.append(_CONSONANTS[digest[2 * i + 1] % len(_CONSONANTS)])
        out.append(_VOWELS[digest[2 * i + 2] % len(_VOWELS)])
    return "".join(out)


@dataclass(frozen=True)
class Fact:
    pid: str
    qid1: str
    qid2: str


@dataclass
class SynthWorld:
    seed: int
    names: dict = field(default_factory=dict)  # qid -> surface
    types: dict = field(default_factory=dict)  # qid -> type name
    facts: list = field(default_factory=list)
    schema: RelationSchema = field(default_factory=lambda: RelationSchema(SYNTH_RELATIONS))

    def qids_of_type(self, type_name: str) -> list:
        return [q for q, t in self.types.items() if t == type_name]

    def facts_of(self, pid: str) -> list:
        return [f for f in self.facts if f.pid == pid]


def _fresh_name(rng, taken: set, prefix: str) -> str:
    while True:
        n_syll = 2 + int(rng.integers(0, 2))
        parts = [prefix]
        for _ in range(n_syll):
            parts.append(_CONSONANTS[int(rng.integers(len(_CONSONANTS)))])
            parts.append(_VOWELS[int(rng.integers(len(_VOWELS)))])
        name = "".join(parts)
        if name not in taken:
            taken.add(name)
            return name


def build_world(
    seed: int | None = None,
    *,
    persons: int = 60,
    cities: int = 30,
    countries: int = 12,
    orgs: int = 25,
    books: int = 30,
) -> SynthWorld:
    """Entity pools plus one fact per (subject, relation) slot.

    Every person gets a distinct birth city, residence city, employer,
    founded org, written book, and translated book (the last two over
    different books); every country gets a capital and a different
    largest city. Entities therefore recur across relations, so entity
    identity alone cannot reveal the label.
    """
    seed = seed if seed is not None else default_seed()
    rng = make_rng(seed, 701)
    world = SynthWorld(seed=seed)
    taken: set = set()
    pools = {"person": persons, "city": cities, "country": countries, "org": orgs, "book": books}
    prefixes = {"person": "P", "city": "C", "country": "K", "org": "O", "book": "B"}
    counter = 0
    for type_name, count in pools.items():
        if count < 2:
            raise ValueError(f"need at least 2 entities of type {type_name}")
        for _ in range(count):
            qid = f"Q{counter + 1000}"
            counter += 1
            world.types[qid] = type_name
            world.names[qid] = _fresh_name(rng, taken, prefixes[type_name])

    def pick(pool, avoid=None):
        choice = pool[int(rng.integers(len(pool)))]
        while avoid is not None and choice == avoid:
            choice = pool[int(rng.integers(len(pool)))]
        return choice

    city_pool = world.qids_of_type("city")
    country_pool = world.qids_of_type("country")
    org_pool = world.qids_of_type("org")
    book_pool = world.qids_of_type("book")
    for person in world.qids_of_type("person"):
        birth = pick(city_pool)
        world.facts.append(Fact("born_in", person, birth))
        world.facts.append(Fact("resides_in", person, pick(city_pool, avoid=birth)))
        employer = pick(org_pool)
        world.facts.append(Fact("works_for", person, employer))
        world.facts.append(Fact("founded", person, pick(org_pool, avoid=employer)))
        wrote = pick(book_pool)
        world.facts.append(Fact("wrote", person, wrote))
        world.facts.append(Fact("translated", person, pick(book_pool, avoid=wrote)))
    for country in country_pool:
        capital = pick(city_pool)
        world.facts.append(Fact("capital_of", capital, country))
        world.facts.append(Fact("largest_city_of", pick(city_pool, avoid=capital), country))
    return world


def _render(world: SynthWorld, template: str, qid_s: str, qid_o: str, filler: str, lang: str):
    """Realize a template; returns (text, s span, o span)."""
    tokens = []
    for slot in template.split():
        if slot == "{s}":
            tokens.append(("s", world.names[qid_s]))
        elif slot == "{o}":
            tokens.append(("o", world.names[qid_o]))
        elif slot == "{f}":
            tokens.extend(("w", w) for w in filler.split())
        else:
            tokens.append(("w", slot))
    if lang == L2:
        tokens = [(kind, cipher_word(w) if kind == "w" else w) for kind, w in reversed(tokens)]
    elif lang != L1:
        raise ValueError(f"unknown language {lang!r}")
    text_parts = []
    spans = {}
    offset = 0
    for kind, word in tokens:
        if text_parts:
            offset += 1
        if kind in ("s", "o"):
            spans[kind] = (offset, offset + len(word))
        text_parts.append(word)
        offset += len(word)
    return " ".join(text_parts), spans["s"], spans["o"]


def pretraining_sentences(
    world: SynthWorld, count_per_lang: int, seed: int | None = None
) -> dict:
    """Fact-grounded sentence pools keyed by language.

    Each draw picks a fact, a template, and a filler independently per
    language, so the pools cover the same facts without being aligned
    sentence-for-sentence.
    """
    seed = seed if seed is not None else world.seed
    pools = {}
    for stream, lang in ((702, L1), (703, L2)):
        rng = make_rng(seed, stream)
        sentences = []
        for i in range(count_per_lang):
            fact = world.facts[int(rng.integers(len(world.facts)))]
            templates = _TEMPLATES[fact.pid]
            template = templates[int(rng.integers(len(templates)))]
            filler = _FILLERS[int(rng.integers(len(_FILLERS)))]
            text, span_s, span_o = _render(world, template, fact.qid1, fact.qid2, filler, lang)
            sentences.append(
                MarkedSentence(
                    sent_id=f"{lang}-{i:06d}",
                    lang=lang,
                    text=text,
                    e1=span_s,
                    e2=span_o,
                    qid1=fact.qid1,
                    qid2=fact.qid2,
                    pid=fact.pid,
                )
            )
        pools[lang] = sentences
    return pools


def labeled_examples(
    world: SynthWorld,
    n: int,
    seed: int | None = None,
    *,
    lang: str = L1,
    split: str = "train",
    no_relation_rate: float = 0.12,
    uid_prefix: str = "",
) -> LabeledDataset:
    """Directional classification examples with inline entity markers.

    The marker assignment is random: <e1> wraps the subject for the
    (e1,e2) direction and the object for (e2,e1). A no_relation slice
    pairs entities that co-occur without a fact between them.
    """
    seed = seed if seed is not None else world.seed
    rng = make_rng(seed, 704 if lang == L1 else 705)
    schema = world.schema
    fact_set = {(f.pid, f.qid1, f.qid2) for f in world.facts}
    examples = []
    for i in range(n):
        uid = f"{uid_prefix}{lang}-{split}-{i:05d}"
        if rng.random() < no_relation_rate:
            template = _NO_RELATION_TEMPLATES[int(rng.integers(len(_NO_RELATION_TEMPLATES)))]
            qids = list(world.names)
            while True:
                qid_s = qids[int(rng.integers(len(qids)))]
                qid_o = qids[int(rng.integers(len(qids)))]
                if qid_s == qid_o:
                    continue
                related = any(
                    (pid, a, b) in fact_set
                    for pid in SYNTH_RELATIONS
                    for a, b in ((qid_s, qid_o), (qid_o, qid_s))
                )
                if not related:
                    break
            label = schema.no_relation_id
        else:
            fact = world.facts[int(rng.integers(len(world.facts)))]
            templates = _TEMPLATES[fact.pid]
            template = templates[int(rng.integers(len(templates)))]
            qid_s, qid_o = fact.qid1, fact.qid2
            direction = int(rng.integers(2))
            label = 2 * schema.relations.index(fact.pid) + direction
        filler = _FILLERS[int(rng.integers(len(_FILLERS)))]
        text, span_s, span_o = _render(world, template, qid_s, qid_o, filler, lang)
        if label != schema.no_relation_id and label % 2 == 1:
            e1_span, e2_span = span_o, span_s  # subject carries the <e2> markers
        else:
            e1_span, e2_span = span_s, span_o
        marked = _insert_markers(text, e1_span, e2_span)
        examples.append(RelationExample(uid=uid, text=marked, label=label, lang=lang))
    return LabeledDataset(tuple(examples), schema, split)


def _insert_markers(text: str, span_e1: tuple, span_e2: tuple) -> str:
    """Wrap the two spans with their marker pairs, later span first."""
    pieces = [(span_e1, "<e1>", "</e1>"), (span_e2, "<e2>", "</e2>")]
    pieces.sort(key=lambda item: item[0], reverse=True)
    out = text
    for (start, end), open_tag, close_tag in pieces:
        out = out[:start] + f"{open_tag} {out[start:end]} {close_tag}" + out[end:]
    return out
