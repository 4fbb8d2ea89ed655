import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import (
    brute_force_bgp,
    brute_force_match,
    forward_replay,
    rand_dataset,
    rand_pattern,
    rand_quad,
    rand_strict_delta,
)
from heritage_catalog.rdf import Iri, Literal, ParseError, Quad
from heritage_catalog.store import (
    ANY,
    Delta,
    OverlapError,
    PreconditionViolation,
    QuadPattern,
    Store,
    Variable,
    invert_delta,
    parse_update,
    serialize_update,
)


def q(s, p, o, g=None):
    obj = Literal(o) if isinstance(o, str) and not o.startswith("http") else Iri(o) if isinstance(o, str) else o
    return Quad(Iri(s), Iri(p), obj, Iri(g) if g else None)


class TestInsertDelete:
    def test_duplicate_insert_returns_zero(self):
        store = Store()
        quad = q("http://ex.org/s", "http://ex.org/p", "v")
        assert store.insert_quads({quad}) == 1
        assert store.insert_quads({quad}) == 0
        assert len(store) == 1

    def test_empty_insert(self):
        store = Store()
        assert store.insert_quads(set()) == 0
        assert len(store) == 0

    def test_three_fresh(self):
        store = Store()
        quads = {q("http://ex.org/s", "http://ex.org/p", str(i)) for i in range(3)}
        assert store.insert_quads(quads) == 3

    def test_delete_absent_returns_zero(self):
        store = Store()
        assert store.delete_quads({q("http://ex.org/s", "http://ex.org/p", "v")}) == 0

    def test_delete_then_reinsert(self):
        store = Store()
        quad = q("http://ex.org/s", "http://ex.org/p", "v")
        store.insert_quads({quad})
        assert store.delete_quads({quad}) == 1
        store.insert_quads({quad})
        assert quad in store

    def test_named_graph_vanishes_when_emptied(self):
        store = Store()
        quad = q("http://ex.org/s", "http://ex.org/p", "v", "http://ex.org/g")
        store.insert_quads({quad})
        assert store.named_graphs() == [Iri("http://ex.org/g")]
        store.delete_quads({quad})
        assert store.named_graphs() == []

    def test_indexes_match_full_rebuild_after_random_ops(self):
        rng = random.Random(7)
        store = Store()
        pool = list(rand_dataset(rng, 60))
        for _ in range(300):
            if rng.random() < 0.6:
                store.insert_quads({rng.choice(pool)})
            else:
                store.delete_quads({rng.choice(pool)})
        rebuilt = Store(store.quads())
        assert store._by_graph == rebuilt._by_graph
        assert store._by_subject == rebuilt._by_subject
        assert store._by_sp == rebuilt._by_sp


class TestMatch:
    def test_all_wildcards(self):
        rng = random.Random(1)
        store = Store(rand_dataset(rng, 5))
        assert len(store.match(QuadPattern())) == 5

    def test_single_binding(self):
        store = Store()
        store.insert_quads({q("http://ex.org/s", "http://ex.org/p", "v"), q("http://ex.org/s2", "http://ex.org/p", "w")})
        bindings = store.match(QuadPattern(Variable("s"), Iri("http://ex.org/p"), Literal("v")))
        assert bindings == [{"s": Iri("http://ex.org/s")}]

    def test_matches_equal_brute_force(self):
        rng = random.Random(99)
        for _ in range(50):
            quads = rand_dataset(rng, 20)
            store = Store(quads)
            pattern = rand_pattern(rng, list(quads))
            got = store.match(pattern)
            want = brute_force_match(quads, pattern)
            assert sorted(map(repr, got)) == sorted(map(repr, want))

    def test_variable_does_not_bind_default_graph(self):
        store = Store({q("http://ex.org/s", "http://ex.org/p", "v")})
        assert store.match(QuadPattern(graph=Variable("g"))) == []
        assert len(store.match(QuadPattern(graph=ANY))) == 1


class TestBgp:
    def test_single_pattern_equals_match(self):
        rng = random.Random(3)
        quads = rand_dataset(rng, 15)
        store = Store(quads)
        pattern = QuadPattern(Variable("s"), Variable("p"), Variable("o"), ANY)
        assert store.bgp_query([pattern]) == store.match(pattern)

    def test_disjoint_variables_cross_product(self):
        store = Store()
        for i in range(2):
            store.insert_quads({q(f"http://ex.org/a{i}", "http://ex.org/p", "x")})
        for i in range(3):
            store.insert_quads({q(f"http://ex.org/b{i}", "http://ex.org/q", "y")})
        solutions = store.bgp_query(
            [
                QuadPattern(Variable("s"), Iri("http://ex.org/p"), ANY),
                QuadPattern(Variable("t"), Iri("http://ex.org/q"), ANY),
            ]
        )
        assert len(solutions) == 6

    def test_join_equals_nested_loop_oracle(self):
        rng = random.Random(17)
        for _ in range(40):
            quads = rand_dataset(rng, 15)
            store = Store(quads)
            patterns = [rand_pattern(rng, list(quads)) for _ in range(2)]
            got = store.bgp_query(patterns)
            want = brute_force_bgp(quads, patterns)
            assert sorted(map(repr, got)) == sorted(map(repr, want))

    def test_empty_pattern_list_rejected(self):
        with pytest.raises(ValueError):
            Store().bgp_query([])


class TestParseUpdate:
    def test_insert_data(self):
        delta = parse_update('INSERT DATA { <http://ex.org/s> <http://ex.org/p> "v" . }')
        assert delta.deletes == frozenset()
        assert delta.inserts == {q("http://ex.org/s", "http://ex.org/p", "v")}

    def test_delete_and_insert_in_graph(self):
        text = (
            'DELETE DATA { GRAPH <http://ex.org/g> { <http://ex.org/s> <http://ex.org/p> "v" . } };'
            ' INSERT DATA { GRAPH <http://ex.org/g> { <http://ex.org/s> <http://ex.org/p> "w" . } }'
        )
        delta = parse_update(text)
        assert delta.deletes == {q("http://ex.org/s", "http://ex.org/p", "v", "http://ex.org/g")}
        assert delta.inserts == {q("http://ex.org/s", "http://ex.org/p", "w", "http://ex.org/g")}

    def test_variables_rejected(self):
        with pytest.raises(ParseError):
            parse_update("INSERT DATA { ?x <http://ex.org/p> \"v\" . }")

    def test_overlap_rejected(self):
        text = (
            'DELETE DATA { <http://ex.org/s> <http://ex.org/p> "v" . };'
            ' INSERT DATA { <http://ex.org/s> <http://ex.org/p> "v" . }'
        )
        with pytest.raises(OverlapError):
            parse_update(text)

    def test_empty_text(self):
        assert parse_update("") == Delta()

    def test_prefixed_names_rejected(self):
        with pytest.raises(ParseError):
            parse_update('INSERT DATA { ex:s <http://ex.org/p> "v" . }')


class TestSerializeUpdate:
    def test_empty_delta(self):
        assert serialize_update(Delta()) == ""

    def test_single_insert_block(self):
        delta = Delta(inserts={q("http://ex.org/s", "http://ex.org/p", "v")})
        text = serialize_update(delta)
        assert text.count("INSERT DATA") == 1
        assert "DELETE DATA" not in text

    def test_round_trip_random_deltas(self):
        rng = random.Random(5)
        for _ in range(50):
            delta = Delta(deletes=rand_dataset(rng, 5), inserts=rand_dataset(rng, 5) - rand_dataset(rng, 0))
            # regenerate inserts disjoint from deletes
            delta = Delta(deletes=delta.deletes, inserts=frozenset(rand_dataset(rng, 5)) - delta.deletes)
            assert parse_update(serialize_update(delta)) == delta

    def test_multi_graph_delta_round_trips(self):
        delta = Delta(
            inserts={
                q("http://ex.org/s", "http://ex.org/p", "a"),
                q("http://ex.org/s", "http://ex.org/p", "b", "http://ex.org/g1"),
                q("http://ex.org/s", "http://ex.org/p", "c", "http://ex.org/g2"),
            }
        )
        assert parse_update(serialize_update(delta)) == delta


class TestDeltaAlgebra:
    def test_apply_then_inverse_restores(self):
        rng = random.Random(11)
        quads = rand_dataset(rng, 20)
        store = Store(quads)
        delta = rand_strict_delta(rng, quads)
        store.apply_delta(delta)
        store.apply_delta(delta.invert())
        assert store.quads() == quads

    def test_strict_missing_delete_rejected(self):
        store = Store()
        delta = Delta(deletes={q("http://ex.org/s", "http://ex.org/p", "v")})
        with pytest.raises(PreconditionViolation):
            store.apply_delta(delta)

    def test_strict_present_insert_rejected(self):
        quad = q("http://ex.org/s", "http://ex.org/p", "v")
        store = Store({quad})
        with pytest.raises(PreconditionViolation):
            store.apply_delta(Delta(inserts={quad}))

    def test_lax_apply_is_idempotent(self):
        quad = q("http://ex.org/s", "http://ex.org/p", "v")
        store = Store({quad})
        store.apply_delta(Delta(inserts={quad}), strict=False)
        assert store.quads() == {quad}

    def test_five_random_deltas_equal_set_algebra_fold(self):
        rng = random.Random(23)
        store = Store()
        deltas = []
        for _ in range(5):
            delta = rand_strict_delta(rng, store.quads())
            deltas.append(delta)
            store.apply_delta(delta)
        assert store.quads() == forward_replay(deltas)

    def test_invert_is_involution(self):
        rng = random.Random(31)
        for _ in range(20):
            delta = rand_strict_delta(rng, rand_dataset(rng, 10))
            assert invert_delta(invert_delta(delta)) == delta

    def test_invert_swaps_sides(self):
        a = q("http://ex.org/s", "http://ex.org/p", "a")
        b = q("http://ex.org/s", "http://ex.org/p", "b")
        assert invert_delta(Delta(deletes={b}, inserts={a})) == Delta(deletes={a}, inserts={b})

    def test_invert_empty(self):
        assert invert_delta(Delta()) == Delta()

    def test_overlapping_delta_rejected_at_construction(self):
        quad = q("http://ex.org/s", "http://ex.org/p", "v")
        with pytest.raises(OverlapError):
            Delta(deletes={quad}, inserts={quad})


class TestPersistence:
    def test_save_load_thousand_quads(self, tmp_path):
        rng = random.Random(77)
        store = Store(rand_dataset(rng, 1000))
        path = tmp_path / "store.nq"
        store.save(path)
        assert Store.load(path).quads() == store.quads()

    def test_load_empty_file(self, tmp_path):
        path = tmp_path / "empty.nq"
        path.write_text("")
        assert len(Store.load(path)) == 0

    def test_load_reports_bad_line_number(self, tmp_path):
        lines = ['<http://ex.org/s> <http://ex.org/p> "v%d" .' % i for i in range(6)]
        lines.append("malformed line")
        path = tmp_path / "bad.nq"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ParseError) as err:
            Store.load(path)
        assert err.value.line == 7

    def test_save_is_canonical(self, tmp_path):
        rng = random.Random(13)
        quads = rand_dataset(rng, 50)
        a, b = tmp_path / "a.nq", tmp_path / "b.nq"
        Store(quads).save(a)
        shuffled = list(quads)
        rng.shuffle(shuffled)
        Store(shuffled).save(b)
        assert a.read_bytes() == b.read_bytes()


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_property_apply_invert_identity(seed):
    rng = random.Random(seed)
    quads = rand_dataset(rng, rng.randrange(0, 15))
    store = Store(quads)
    delta = rand_strict_delta(rng, quads)
    store.apply_delta(delta)
    store.apply_delta(delta.invert())
    assert store.quads() == quads
