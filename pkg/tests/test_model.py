import pytest
from hypothesis import given

from taxonet import (
    Hyperedge,
    InvalidNetwork,
    MalformedTaxonomy,
    Network,
    Query,
    Source,
    UnknownTerm,
    answer,
    embed_query,
    flatten,
    make_peer,
    simplify,
    transitive_reduction,
)
from taxonet.fixtures import FIG2_EDGES, s2_source
from taxonet.model import check_name, fresh_term, index_of, is_fresh, qualify, split_term
from taxonet.parser import parse_query

from .strategies import source_and_query


def E(tail, head):
    return Hyperedge(frozenset(tail), head)


def test_simplify_expands_disjunction_and_conjunction():
    got = simplify([(parse_query("a | b"), parse_query("c & d"))])
    assert got == {E("a", "c"), E("a", "d"), E("b", "c"), E("b", "d")}


def test_simplify_drops_reflexive_pair():
    assert simplify([(parse_query("t"), parse_query("t"))]) == frozenset()


def test_simplify_keeps_conjunctive_tail():
    assert simplify([(parse_query("a & b"), parse_query("c"))]) == {E(["a", "b"], "c")}


def test_simplify_rejects_disjunctive_rhs():
    with pytest.raises(MalformedTaxonomy):
        simplify([(parse_query("a"), parse_query("b | c"))])


def test_simplify_is_idempotent():
    pairs = [(parse_query("a | b & c"), parse_query("d & e")), (parse_query("e"), parse_query("a"))]
    once = simplify(pairs)
    again = simplify((Query((e.tail,)), Query.of(e.head)) for e in once)
    assert again == once


def test_transitive_reduction():
    assert transitive_reduction({("a", "b"), ("b", "c"), ("a", "c")}) == {("a", "b"), ("b", "c")}
    assert transitive_reduction({("a", "a")}) == frozenset()
    # a 2-cycle composes only into reflexive pairs, which are not in R1
    assert transitive_reduction({("a", "b"), ("b", "a")}) == {("a", "b"), ("b", "a")}


def test_transitive_reduction_by_definition():
    pairs = {("a", "b"), ("b", "c"), ("c", "a"), ("a", "d")}
    r1 = {p for p in pairs if p[0] != p[1]}
    comp = {(x, z) for x, y in r1 for y2, z in r1 if y == y2}
    assert transitive_reduction(pairs) == r1 - comp


def test_embed_query_adds_fresh_term(fig2):
    ext, t = embed_query(fig2, Query.of(["a2", "a3"]))
    assert is_fresh(t)
    assert ext.terms == fig2.terms | {t}
    assert ext.edges == fig2.edges | {E(["a2", "a3"], t)}
    assert ext.I(t) == frozenset()


def test_embed_term_query_is_passthrough(fig2):
    ext, t = embed_query(fig2, Query.of("a1"))
    assert ext is fig2 and t == "a1"


def test_embed_unknown_term(fig2):
    with pytest.raises(UnknownTerm):
        embed_query(fig2, Query.of(["x1", "zz"]))


@given(source_and_query())
def test_embedding_preserves_answers(case):
    s, q = case
    ext, t = embed_query(s, q, "__qx")
    by_parts = set()
    for d in q.disjuncts:
        by_parts |= frozenset.intersection(*(answer(s, Query.of(u)) for u in d))
    assert answer(ext, Query.of(t)) == by_parts


def test_flatten_nstar_is_fig2(nstar, fig2):
    flat = flatten(nstar)
    strip = {E([split_term(u)[1] for u in e.tail], split_term(e.head)[1]) for e in flat.edges}
    assert strip == fig2.edges
    assert len(flat.edges) == len(FIG2_EDGES) == 8
    assert len(flat.terms) == sum(len(p.terms) for p in nstar.peers) == 9


def test_flatten_single_peer_is_qualified():
    p = make_peer("Pa", ["x", "y"], [(["x"], "y")], {"x": {"o"}})
    flat = flatten(Network((p,)))
    assert flat.terms == {"Pa:x", "Pa:y"}
    assert flat.edges == {E(["Pa:x"], "Pa:y")}


def test_flatten_two_peers_with_articulation():
    pa = make_peer("Pa", ["a"], articulations=[(["Pb:b"], "a")])
    pb = make_peer("Pb", ["b", "c"], [(["c"], "b")])
    flat = flatten(Network((pa, pb)))
    assert flat.edges == {E(["Pb:b"], "Pa:a"), E(["Pb:c"], "Pb:b")}


def test_network_rejects_dangling_and_overlap():
    pa = make_peer("Pa", ["a"], articulations=[(["Pz:q"], "a")])
    with pytest.raises(UnknownTerm):
        Network((pa,))
    with pytest.raises(InvalidNetwork):
        Network((make_peer("Pa", ["a"]), make_peer("Pa", ["b"])))


def test_articulation_tail_must_be_foreign():
    with pytest.raises(InvalidNetwork):
        make_peer("Pa", ["a", "b"], articulations=[(["Pa:b"], "a")])


def test_index_of(fig2):
    assert index_of(fig2, "o1") == {"c1"}
    assert index_of(fig2, "o99") == frozenset()
    assert index_of(s2_source(), "3") == {"Animal", "FlyingObject"}


def test_hyperedge_invariants():
    with pytest.raises(MalformedTaxonomy):
        E([], "a")
    with pytest.raises(MalformedTaxonomy):
        E(["a", "b"], "a")


def test_source_drops_empty_sets_and_checks_terms():
    s = Source.build([], {"a": set()}, ["a"])
    assert s.interp == {}
    with pytest.raises(UnknownTerm):
        s.require("b")


def test_query_dedups_and_prints():
    q = Query.of(["b", "a"], "c", ["a", "b"])
    assert len(q.disjuncts) == 2
    assert str(q) == "a & b | c"
    with pytest.raises(ValueError):
        Query(())


def test_term_names():
    assert check_name("a1") is None
    assert check_name("Φ") is None
    assert check_name("__x")
    assert check_name("a b")
    assert check_name("a:b")
    assert split_term(qualify("Pa", "a1")) == ("Pa", "a1")
    assert split_term("a1") == (None, "a1")
    assert fresh_term("Pa").startswith("Pa:__q")
    assert fresh_term() != fresh_term()


def test_transitive_reduction_is_not_run_on_load(fig2):
    # the cyclic part b1 -> c2 -> b1 survives as loaded
    assert E(["b1", "b3"], "c2") in fig2.edges
