from collections import Counter

from hypothesis import given
from hypothesis import strategies as st

from taxonet import CallTrace, Query, Source, answer, datalog_answer, decide, extended_answer, minimal_model, qe
from taxonet.evaluation import answer_by_parts
from taxonet.fixtures import s2_source
from taxonet.parser import NegQuery, parse_neg_query

from .strategies import OBJECTS, queries, source_and_query, sources

TABLE = [
    ("a2", {"a2"}), ("b3", {"a2", "b3"}), ("b1", {"a2", "b1"}), ("b2", {"a2", "b2"}),
    ("c1", {"a2", "b1", "c1"}), ("c2", {"a2", "b1", "c2"}), ("c2", {"a2", "b2", "c2"}),
    ("c3", {"a2", "b2", "c3"}), ("b1", {"a2", "b2", "c2", "b1"}), ("b3", {"a2", "b2", "c2", "b3"}),
    ("c1", {"a2", "b2", "c2", "b1", "c1"}),
]
STARRED = [("c2", {"a2", "b1", "c2"}), ("b1", {"a2", "b2", "c2", "b1"})]


def as_counter(pairs):
    return Counter((t, frozenset(v)) for t, v in pairs)


def test_qe_examples(fig2):
    assert qe(fig2, "a2") == {"o4"}
    assert qe(fig2, "b1", {"b1"}) == {"o1", "o2"}


def test_trace_matches_table(fig2):
    trace = CallTrace()
    qe(fig2, "a2", trace=trace)
    assert len(trace) == 11
    assert as_counter(trace.pairs()) == as_counter(TABLE)
    starred = [(c.term, c.visited) for c in trace if c.blocked]
    assert as_counter(starred) == as_counter(STARRED)


def test_trace_levels_match_table(fig2):
    trace = CallTrace()
    qe(fig2, "a2", trace=trace)
    by_depth = {}
    for c in trace.level_order():
        by_depth.setdefault(c.depth, Counter())[(c.term, c.visited)] += 1
    # table rows grouped by path length
    expected = {}
    for t, v in TABLE:
        expected.setdefault(len(v) - 1, Counter())[(t, frozenset(v))] += 1
    assert by_depth == expected


def test_answer_examples(fig2):
    assert answer(s2_source(), Query.of("Bird")) == {"1", "2", "3"}
    assert answer(fig2, Query.of(["a2", "a3"])) == frozenset()
    s = Source.build([], {"a": {"o"}}, ["a", "b"])
    assert answer(s, Query.of("a", "b")) == {"o"}


def test_minimal_model_examples(fig2):
    m = minimal_model(fig2)
    assert m["b1"] == {"o1", "o2"} and m["a2"] == {"o4"} and m["a1"] == {"o4"}
    assert m["b2"] == frozenset()
    s = Source.build([], {"a": {"o"}}, ["a", "b"])
    assert minimal_model(s) == {"a": {"o"}, "b": frozenset()}
    assert minimal_model(Source.build([(["a"], "b")], {"a": {"o"}}))["b"] == {"o"}


@given(sources())
def test_oracle_triangle(s):
    model = minimal_model(s)
    for t in s.terms:
        got = qe(s, t)
        assert got == model[t] == datalog_answer(s, Query.of(t))
        for o in s.objects:
            assert decide(s, t, o) == (o in got)


@given(source_and_query())
def test_answer_is_union_of_intersections(case):
    s, q = case
    assert answer(s, q) == answer_by_parts(s, q) == datalog_answer(s, q)


@given(sources(), st.data())
def test_monotonicity(s, data):
    t = data.draw(st.sampled_from(sorted(s.terms)))
    o = data.draw(st.sampled_from(OBJECTS))
    interp = {u: set(v) for u, v in s.interp.items()}
    interp.setdefault(t, set()).add(o)
    bigger = Source.build(s.edges, interp, s.terms)
    before, after = minimal_model(s), minimal_model(bigger)
    assert all(before[u] <= after[u] for u in s.terms)


def test_chain_is_exponential():
    from taxonet.gen import gen_chain

    counts = []
    for k in range(1, 7):
        s, t = gen_chain(k)
        trace = CallTrace()
        qe(s, t, trace=trace)
        counts.append(len(trace))
        assert len(trace) >= 2 ** k
    assert all(b > 1.8 * a for a, b in zip(counts, counts[1:]))


def test_extended_answer_examples(fig2):
    universe = {"o1", "o2", "o3", "o4"}
    assert extended_answer(fig2, parse_neg_query("!a2"), universe) == {"o1", "o2", "o3"}
    assert extended_answer(fig2, parse_neg_query("b1 | !b1"), universe) == universe
    q = NegQuery((frozenset({("b1", True), ("b1", False)}),))
    assert extended_answer(fig2, q, universe) == frozenset()


@given(sources(), st.data())
def test_de_morgan(s, data):
    t1, t2 = data.draw(st.lists(st.sampled_from(sorted(s.terms)), min_size=2, max_size=2))
    m = minimal_model(s)
    got = extended_answer(s, parse_neg_query(f"!{t1} & !{t2}"))
    assert got == s.objects - (m[t1] | m[t2])


@given(sources(), st.data())
def test_negation_matches_stratified_datalog(s, data):
    terms = sorted(s.terms)
    lit = st.tuples(st.sampled_from(terms), st.booleans())
    ds = data.draw(st.lists(st.frozensets(lit, min_size=1, max_size=3), min_size=1, max_size=3))
    q = NegQuery(tuple(dict.fromkeys(ds)))
    universe = s.objects | {"extra"}
    assert extended_answer(s, q, universe) == datalog_answer(s, q, universe)
