"""Shared fixtures: randomized term generators, oracles, the gold catalog."""

import random
import string
from datetime import datetime, timezone
from pathlib import Path

import pytest

from heritage_catalog.catalog import Catalog
from heritage_catalog.mapping import load_table
from heritage_catalog.rdf import BlankNode, Iri, Literal, Quad
from heritage_catalog.store import ANY, Delta, QuadPattern, Variable

DATA_DIR = Path(__file__).parent / "data"

# Lexical pool exercising every escape class plus unicode.
NASTY_LEXICALS = [
    "plain",
    'quote " inside',
    "back\\slash",
    "new\nline",
    "carriage\rreturn",
    "tab\there",
    'all "of\\the\nabove\r\t',
    "unicode caffè ☕",
    "",
    "trailing space ",
]


def rand_iri(rng: random.Random, prefix: str = "http://example.org/") -> Iri:
    return Iri(prefix + "".join(rng.choices(string.ascii_lowercase + string.digits, k=8)))


def rand_literal(rng: random.Random) -> Literal:
    roll = rng.random()
    lexical = rng.choice(NASTY_LEXICALS)
    if roll < 0.5:
        return Literal(lexical)
    if roll < 0.75:
        return Literal(lexical, language=rng.choice(["en", "it", "de-CH"]))
    return Literal(lexical, datatype=rand_iri(rng, "http://example.org/dt/"))


def rand_term(rng: random.Random):
    roll = rng.random()
    if roll < 0.45:
        return rand_iri(rng)
    if roll < 0.55:
        return BlankNode("b" + "".join(rng.choices(string.ascii_lowercase + string.digits, k=5)))
    return rand_literal(rng)


def rand_quad(rng: random.Random, graphs=None) -> Quad:
    subject = rand_iri(rng) if rng.random() < 0.85 else BlankNode("s" + str(rng.randrange(1000)))
    graph = None
    if graphs is None:
        if rng.random() < 0.4:
            graph = rand_iri(rng, "http://example.org/g/")
    else:
        graph = rng.choice(graphs)
    return Quad(subject, rand_iri(rng, "http://example.org/p/"), rand_term(rng), graph)


def rand_dataset(rng: random.Random, size: int, graphs=None) -> set:
    quads = set()
    while len(quads) < size:
        quads.add(rand_quad(rng, graphs))
    return quads


def rand_strict_delta(rng: random.Random, store_quads: set) -> Delta:
    """A delta strictly applicable to the given quad set."""
    present = list(store_quads)
    deletes = set(rng.sample(present, k=rng.randrange(0, min(len(present), 5) + 1))) if present else set()
    inserts = set()
    while len(inserts) < rng.randrange(0, 5):
        q = rand_quad(rng)
        if q not in store_quads:
            inserts.add(q)
    return Delta(deletes=deletes, inserts=inserts - deletes)


def rand_pattern(rng: random.Random, quads: list) -> QuadPattern:
    """A pattern biased towards matching something in the store."""
    template = rng.choice(quads) if quads and rng.random() < 0.8 else rand_quad(rng)
    positions = []
    for index, value in enumerate((template.subject, template.predicate, template.object, template.graph)):
        roll = rng.random()
        if roll < 0.35:
            positions.append(ANY)
        elif roll < 0.65:
            positions.append(Variable(rng.choice("xyzvw")))
        else:
            positions.append(value if value is not None else ANY)
    return QuadPattern(*positions)


def brute_force_match(quads, pattern: QuadPattern):
    """Independent oracle: filter every quad, no indexes involved."""
    out = []
    for q in quads:
        binding = {}
        ok = True
        for pat, val in ((pattern.subject, q.subject), (pattern.predicate, q.predicate), (pattern.object, q.object), (pattern.graph, q.graph)):
            if pat is ANY:
                continue
            if isinstance(pat, Variable):
                if val is None or (pat.name in binding and binding[pat.name] != val):
                    ok = False
                    break
                binding[pat.name] = val
            elif pat != val:
                ok = False
                break
        if ok:
            out.append(binding)
    return out


def brute_force_bgp(quads, patterns):
    """Nested-loop join oracle over the raw quad list."""
    solutions = [{}]
    for pattern in patterns:
        grown = []
        for sol in solutions:
            for q in quads:
                binding = dict(sol)
                ok = True
                for pat, val in ((pattern.subject, q.subject), (pattern.predicate, q.predicate), (pattern.object, q.object), (pattern.graph, q.graph)):
                    if pat is ANY:
                        continue
                    if isinstance(pat, Variable):
                        if val is None or (pat.name in binding and binding[pat.name] != val):
                            ok = False
                            break
                        binding[pat.name] = val
                    elif pat != val:
                        ok = False
                        break
                if ok:
                    grown.append(binding)
        solutions = grown
    return solutions


def forward_replay(deltas) -> set:
    """Set-algebra oracle: fold deltas over the empty state."""
    state = set()
    for delta in deltas:
        state = (state - set(delta.deletes)) | set(delta.inserts)
    return state


def ts(seconds: int) -> datetime:
    return datetime.fromtimestamp(1_700_000_000 + seconds, tz=timezone.utc)


def build_gold_catalog(root: Path) -> Catalog:
    """The fully FAIR-compliant fixture catalog, built through ingest."""
    catalog = Catalog.create(root)
    bib = load_table(DATA_DIR / "gold_bibliographic.csv")
    proc = load_table(DATA_DIR / "gold_process.csv")
    catalog.ingest_bibliographic(bib, Iri("file:///gold_bibliographic.csv"))
    catalog.ingest_process(proc, Iri("file:///gold_process.csv"))
    catalog.save()
    return catalog


@pytest.fixture
def gold_catalog(tmp_path) -> Catalog:
    return build_gold_catalog(tmp_path / "gold")
