"""Named-graph quad store: indexed pattern queries and reversible updates.

The store is the substrate for metadata records and provenance.  Mutations
are expected from a single writer; queries work on the quad sets as they
stand and never mutate.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass

from .rdf import (
    BlankNode,
    Iri,
    Literal,
    ParseError,
    Quad,
    Term,
    TermScanner,
    parse_nquads,
    quad_sort_key,
    serialize_nquads,
    serialize_quad,
    serialize_term,
)


class _AnyToken:
    """Wildcard pattern position; matches every term and the default graph."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ANY"


ANY = _AnyToken()


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class QuadPattern:
    subject: object = ANY
    predicate: object = ANY
    object: object = ANY
    graph: object = ANY


class OverlapError(ValueError):
    """A quad appears in both the delete and the insert set."""


class PreconditionViolation(ValueError):
    """Strict delta application found missing deletes or already-present inserts."""

    def __init__(self, missing_deletes=(), present_inserts=()):
        self.missing_deletes = frozenset(missing_deletes)
        self.present_inserts = frozenset(present_inserts)
        bits = []
        if self.missing_deletes:
            bits.append(f"{len(self.missing_deletes)} delete(s) not present")
        if self.present_inserts:
            bits.append(f"{len(self.present_inserts)} insert(s) already present")
        super().__init__("; ".join(bits) or "precondition violation")


@dataclass(frozen=True)
class Delta:
    """Paired delete/insert quad sets; inverting swaps the sides."""

    deletes: frozenset = frozenset()
    inserts: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "deletes", frozenset(self.deletes))
        object.__setattr__(self, "inserts", frozenset(self.inserts))
        overlap = self.deletes & self.inserts
        if overlap:
            raise OverlapError(f"{len(overlap)} quad(s) in both delete and insert sets")

    def invert(self) -> "Delta":
        return Delta(deletes=self.inserts, inserts=self.deletes)

    def is_empty(self) -> bool:
        return not self.deletes and not self.inserts


def invert_delta(delta: Delta) -> Delta:
    return delta.invert()


class Store:
    """In-memory quad store with graph, subject and subject-predicate indexes."""

    def __init__(self, quads=()):
        self._quads: set[Quad] = set()
        self._by_graph: dict[Iri | None, set[Quad]] = {}
        self._by_subject: dict[Iri | BlankNode, set[Quad]] = {}
        self._by_sp: dict[tuple, set[Quad]] = {}
        if quads:
            self.insert_quads(quads)

    def __len__(self):
        return len(self._quads)

    def __contains__(self, quad: Quad):
        return quad in self._quads

    def __iter__(self):
        return iter(list(self._quads))

    def quads(self) -> set[Quad]:
        return set(self._quads)

    def _index_add(self, q: Quad):
        self._by_graph.setdefault(q.graph, set()).add(q)
        self._by_subject.setdefault(q.subject, set()).add(q)
        self._by_sp.setdefault((q.subject, q.predicate), set()).add(q)

    def _index_remove(self, q: Quad):
        for index, key in (
            (self._by_graph, q.graph),
            (self._by_subject, q.subject),
            (self._by_sp, (q.subject, q.predicate)),
        ):
            bucket = index[key]
            bucket.discard(q)
            if not bucket:
                del index[key]

    def insert_quads(self, quads) -> int:
        """Insert quads, returning how many were not already present."""
        added = 0
        for q in quads:
            if q not in self._quads:
                self._quads.add(q)
                self._index_add(q)
                added += 1
        return added

    def delete_quads(self, quads) -> int:
        """Delete quads, returning how many were actually present."""
        removed = 0
        for q in set(quads):
            if q in self._quads:
                self._quads.remove(q)
                self._index_remove(q)
                removed += 1
        return removed

    def named_graphs(self) -> list[Iri]:
        return sorted((g for g in self._by_graph if g is not None), key=lambda g: g.value)

    def subject_quads(self, subject) -> set[Quad]:
        return set(self._by_subject.get(subject, ()))

    def graph_quads(self, graph: Iri | None) -> set[Quad]:
        return set(self._by_graph.get(graph, ()))

    def _candidates(self, pattern: QuadPattern):
        if isinstance(pattern.subject, (Iri, BlankNode)) and isinstance(pattern.predicate, Iri):
            return self._by_sp.get((pattern.subject, pattern.predicate), ())
        if isinstance(pattern.subject, (Iri, BlankNode)):
            return self._by_subject.get(pattern.subject, ())
        if isinstance(pattern.graph, Iri) or pattern.graph is None:
            return self._by_graph.get(pattern.graph, ())
        return self._quads

    @staticmethod
    def _unify(pattern: QuadPattern, quad: Quad) -> dict | None:
        binding: dict[str, Term] = {}
        for pat, val in (
            (pattern.subject, quad.subject),
            (pattern.predicate, quad.predicate),
            (pattern.object, quad.object),
            (pattern.graph, quad.graph),
        ):
            if pat is ANY:
                continue
            if isinstance(pat, Variable):
                if val is None:
                    return None  # the default graph has no term to bind
                if pat.name in binding:
                    if binding[pat.name] != val:
                        return None
                else:
                    binding[pat.name] = val
            elif pat != val:
                return None
        return binding

    def match(self, pattern: QuadPattern) -> list[dict]:
        """All bindings unifying the pattern, one per matching quad.

        Deterministic: sorted by the canonical serialization of the bound
        terms, then of the matched quad.
        """
        hits = []
        for q in self._candidates(pattern):
            b = self._unify(pattern, q)
            if b is not None:
                hits.append((b, q))
        hits.sort(key=lambda bq: (tuple(serialize_term(bq[0][k]) for k in sorted(bq[0])), serialize_quad(bq[1])))
        return [b for b, _ in hits]

    @staticmethod
    def _substitute(pattern: QuadPattern, solution: dict) -> QuadPattern:
        def sub(pos):
            if isinstance(pos, Variable) and pos.name in solution:
                return solution[pos.name]
            return pos

        return QuadPattern(sub(pattern.subject), sub(pattern.predicate), sub(pattern.object), sub(pattern.graph))

    def bgp_query(self, patterns) -> list[dict]:
        """Natural join of the patterns on shared variable names.

        Nested-loop evaluation with index lookups; solution multiplicity
        follows the matching quad combinations.
        """
        patterns = list(patterns)
        if not patterns:
            raise ValueError("at least one pattern is required")
        solutions: list[dict] = [{}]
        for pattern in patterns:
            grown = []
            for sol in solutions:
                for b in self.match(self._substitute(pattern, sol)):
                    grown.append({**sol, **b})
            solutions = grown
        solutions.sort(key=lambda s: tuple(serialize_term(s[k]) for k in sorted(s)))
        return solutions

    def apply_delta(self, delta: Delta, strict: bool = True):
        """Replace deletes with inserts.

        Strict mode demands deletes all present and inserts all absent,
        which is what makes deltas reversible; lax mode degrades to plain
        set difference and union.
        """
        if strict:
            missing = delta.deletes - self._quads
            present = delta.inserts & self._quads
            if missing or present:
                raise PreconditionViolation(missing, present)
        self.delete_quads(delta.deletes)
        self.insert_quads(delta.inserts)

    def save(self, path):
        """Write the canonical N-Quads file via a temp file plus rename."""
        path = os.fspath(path)
        directory = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".store-", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
                handle.write(serialize_nquads(self._quads))
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    @classmethod
    def load(cls, path) -> "Store":
        with open(path, encoding="utf-8") as handle:
            return cls(parse_nquads(handle.read()))


def parse_update(text: str) -> Delta:
    """Parse the INSERT DATA / DELETE DATA subset into a delta.

    Ground quads only; an optional single GRAPH wrapper per block sets the
    quad graph.  Statements are separated by ``;``.  A quad occurring in
    both sets raises :class:`OverlapError`.
    """
    sc = TermScanner(text)
    deletes: set[Quad] = set()
    inserts: set[Quad] = set()
    sc.skip_ws()
    if sc.eof():
        return Delta()
    while True:
        kw_line, kw_col = sc.line, sc.column
        op = sc.read_keyword().upper()
        if op not in ("INSERT", "DELETE"):
            sc.error(f"expected INSERT or DELETE, found {op!r}", kw_line, kw_col)
        sc.skip_ws()
        if sc.read_keyword().upper() != "DATA":
            sc.error("expected DATA", kw_line, kw_col)
        sc.skip_ws()
        sc.expect("{")
        sc.skip_ws()
        graph = None
        wrapped = False
        if sc.peek().isalpha():
            word = sc.read_keyword()
            if word.upper() == "GRAPH":
                wrapped = True
                sc.skip_ws()
                graph = sc.read_term()
                if not isinstance(graph, Iri):
                    sc.error("graph label must be an IRI", sc.term_line, sc.term_column)
                sc.skip_ws()
                sc.expect("{")
                sc.skip_ws()
            else:
                sc.error(f"unexpected token {word!r} in data block")
        target = deletes if op == "DELETE" else inserts
        while sc.peek() != "}":
            if sc.eof():
                sc.error("unterminated data block")
            s = sc.read_term()
            if isinstance(s, Literal):
                sc.error("literal not allowed in subject position", sc.term_line, sc.term_column)
            sc.skip_ws()
            p = sc.read_term()
            if not isinstance(p, Iri):
                sc.error("predicate must be an IRI", sc.term_line, sc.term_column)
            sc.skip_ws()
            o = sc.read_term()
            sc.skip_ws()
            sc.expect(".")
            sc.skip_ws()
            target.add(Quad(s, p, o, graph))
        sc.expect("}")
        sc.skip_ws()
        if wrapped:
            sc.expect("}")
            sc.skip_ws()
        if sc.eof():
            break
        sc.expect(";")
        sc.skip_ws()
        if sc.eof():
            sc.error("expected a statement after ';'")
    overlap = deletes & inserts
    if overlap:
        raise OverlapError(f"{len(overlap)} quad(s) in both delete and insert sets")
    return Delta(deletes=deletes, inserts=inserts)


def _update_block(op: str, graph: Iri | None, quads) -> str:
    lines = "".join(
        f"  {serialize_term(q.subject)} {serialize_term(q.predicate)} {serialize_term(q.object)} .\n"
        for q in sorted(quads, key=quad_sort_key)
    )
    if graph is None:
        return f"{op} DATA {{\n{lines}}}"
    return f"{op} DATA {{ GRAPH {serialize_term(graph)} {{\n{lines}}} }}"


def serialize_update(delta: Delta) -> str:
    """Canonical update text: DELETE DATA blocks, then INSERT DATA blocks.

    One block per graph on each side (the grammar allows a single GRAPH
    wrapper per block), default graph first, quads sorted canonically.
    Empty delta serializes to the empty string; ``parse_update`` is its
    inverse.
    """
    blocks = []
    for op, quads in (("DELETE", delta.deletes), ("INSERT", delta.inserts)):
        if not quads:
            continue
        groups: dict[Iri | None, set] = {}
        for q in quads:
            groups.setdefault(q.graph, set()).add(q)
        order = sorted(groups, key=lambda g: "" if g is None else g.value)
        for graph in order:
            blocks.append(_update_block(op, graph, groups[graph]))
    if not blocks:
        return ""
    return "\n;\n".join(blocks) + "\n"
