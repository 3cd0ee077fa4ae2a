from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from taxonet import Ask, Network, Query, Simulator, Tell, UnknownTerm, answer, flatten, gen_random, make_peer
from taxonet.evaluation import CallTrace, qe
from taxonet.model import Hyperedge
from taxonet.net import CachePut, DecodeError, Diverged, IllegalState, LogObject, compute_answer, decode, encode

A2A3 = Query.of(["Pa:a2", "Pa:a3"])


def step(sim):
    src, dest, msg = sim.bus.take()
    sim.peers[dest].handle(msg)
    return dest, msg


def test_root_ask_opens_two_calls(nstar):
    sim = Simulator(nstar)
    h = sim.submit_query("Pa", A2A3)
    assert step(sim) == ("Pa", Ask("Pa", "Pa#1", h.term, {h.term}))
    log = sim.peers["Pa"].log
    assert log == {"Pa#1": LogObject("Pa", "Pa#1", h.term, 2, [["Pa#2", "Pa#3"]])}
    pending = [(d, m) for _, d, m in sim.bus.pending]
    assert pending == [("Pa", Ask("Pa", "Pa#2", "Pa:a2", {h.term, "Pa:a2"})),
                       ("Pa", Ask("Pa", "Pa#3", "Pa:a3", {h.term, "Pa:a3"}))]


def test_leaf_ask_tells_interpretation_and_closes_call(nstar):
    sim = Simulator(nstar)
    h = sim.submit_query("Pa", A2A3)
    step(sim)
    step(sim)  # a2 fans out to Pb
    dest, msg = step(sim)  # a3 has no incoming hyperedges
    assert msg.t == "Pa:a3"
    tell = [m for _, d, m in sim.bus.pending if isinstance(m, Tell)]
    assert tell == [Tell("Pa#3", frozenset())]
    while not isinstance(sim.bus.pending[0][2], Tell):
        sim.bus.pending.rotate(-1)
    step(sim)
    assert sim.peers["Pa"].log["Pa#1"] == LogObject("Pa", "Pa#1", h.term, 1, [["Pa#2", frozenset()]])


def test_blocked_ask_replies_with_interpretation(nstar):
    sim = Simulator(nstar)
    pc = sim.peers["Pc"]
    pc.handle(Ask("Pb", "Pb#9", "Pc:c2", {"Pa:a2", "Pb:b1", "Pc:c2"}))
    assert [m for _, _, m in sim.bus.pending] == [Tell("Pb#9", {"o2"})]
    assert pc.log == {}


def test_appendix_asks(nstar):
    sim = Simulator(nstar, record=True)
    result, stats = sim.query("Pa", A2A3)
    assert stats.asks == stats.tells == 13
    root = next(m.t for _, _, m in sim.delivered if isinstance(m, Ask))
    seen = Counter()
    for _, dest, m in sim.delivered:
        if isinstance(m, Ask):
            seen[(dest, m.t.split(":")[1], frozenset(v.split(":")[1] for v in m.visited - {root}))] += 1
    rows = [("Pa", "__", ""), ("Pa", "a2", "a2"), ("Pa", "a3", "a3"),
            ("Pb", "b3", "a2 b3"), ("Pb", "b1", "a2 b1"), ("Pb", "b2", "a2 b2"),
            ("Pc", "c1", "a2 b1 c1"), ("Pc", "c2", "a2 b1 c2"), ("Pc", "c2", "a2 b2 c2"), ("Pc", "c3", "a2 b2 c3"),
            ("Pb", "b1", "a2 b2 c2 b1"), ("Pb", "b3", "a2 b2 c2 b3"), ("Pc", "c1", "a2 b2 c2 b1 c1")]
    expected = Counter()
    for dest, t, vis in rows:
        expected[(dest, root.split(":")[1] if t == "__" else t, frozenset(vis.split()))] += 1
    assert seen == expected


def test_nstar_answer_matches_oracle(nstar):
    flat = flatten(nstar)
    for q in [A2A3, Query.of("Pa:a2"), Query.of("Pa:a1", ["Pa:a2", "Pa:a3"])]:
        assert Simulator(nstar).query("Pa", q)[0] == answer(flat, q)


def test_trivial_network():
    net = Network((make_peer("P", ["t"], interp={"t": {"o"}}),))
    result, stats = Simulator(net).query("P", Query.of("P:t"))
    assert result == {"o"}
    assert (stats.asks, stats.tells) == (2, 2)


def test_foreign_query_term_is_unknown(nstar):
    with pytest.raises(UnknownTerm):
        Simulator(nstar).submit_query("Pa", Query.of("Pb:b1"))


def test_compute_answer():
    a, b, c = frozenset("ab"), frozenset("bc"), frozenset("cd")
    assert compute_answer([[a], [b, c]]) == a | (b & c)
    assert compute_answer([[frozenset()]]) == frozenset()
    i_b1, i_c1, i_b3 = frozenset({"x"}), frozenset({"y"}), frozenset({"y", "z"})
    assert compute_answer([[i_b1 | i_c1, i_b3]]) == (i_b1 | i_c1) & i_b3
    with pytest.raises(IllegalState):
        compute_answer([[a, "Pa#3"]])


def test_schedulers_agree(nstar):
    expected = Simulator(nstar).query("Pa", Query.of("Pa:a1"))[0]
    for seed in range(50):
        sim = Simulator(nstar, scheduler="random", seed=seed)
        result, stats = sim.query("Pa", Query.of("Pa:a1"))
        assert result == expected
        assert stats.asks == stats.tells


def test_concurrent_roots_on_one_peer(nstar):
    sim = Simulator(nstar, scheduler="random", seed=3)
    h1 = sim.submit_query("Pa", Query.of("Pa:a1"))
    h2 = sim.submit_query("Pa", A2A3)
    h3 = sim.submit_query("Pb", Query.of("Pb:b1"))
    sim.run_until_quiescent()
    assert h1.term != h2.term
    assert (h1.result, h2.result, h3.result) == ({"o4"}, frozenset(), {"o1", "o2"})
    assert sim.live_log_objects() == 0
    assert all(not p.root_edges for p in sim.peers.values())


def test_count_law_and_log_hygiene():
    for seed in range(30):
        net = gen_random(seed)
        flat = flatten(net)
        for t in sorted(net.terms):
            sim = Simulator(net)
            _, stats = sim.query(net.owner(t), Query.of(t))
            ext = flat.with_edges([Hyperedge(frozenset([t]), "__root")], ["__root"])
            trace = CallTrace()
            qe(ext, "__root", trace=trace)
            assert stats.asks == stats.tells == len(trace)
            assert stats.protocol_errors == 0
            assert sim.live_log_objects() == 0


def test_protocol_errors_are_counted(nstar):
    sim = Simulator(nstar)
    sim.bus.put("Pb", "Pa", Tell("Pa#99", frozenset()))
    sim.bus.put("Pb", "Pa", Ask("Pb", "Pb#1", "Pa:nope", {"Pa:nope"}))
    sim.bus.put("Pb", "Pz", Tell("Pa#1", frozenset()))
    stats = sim.run_until_quiescent()
    assert stats.protocol_errors == 3
    assert len(sim.errors) == 3


def test_budget_guard(nstar):
    sim = Simulator(nstar, budget=5)
    sim.submit_query("Pa", A2A3)
    with pytest.raises(Diverged):
        sim.run_until_quiescent()


def test_wire_mode_gives_same_answer(nstar):
    plain = Simulator(nstar).query("Pa", Query.of("Pa:a1"))
    wired = Simulator(nstar, wire=True).query("Pa", Query.of("Pa:a1"))
    assert plain[0] == wired[0]
    assert plain[1].asks == wired[1].asks


def test_trace_lines(nstar):
    lines = []
    Simulator(nstar, trace=lines.append).query("Pa", A2A3)
    assert len(lines) == 25
    assert lines[0].startswith("Pa ← ask(Pa, Pa#1, Pa:__q")
    assert any(line.startswith("Pa ← tell(Pa#3, {})") for line in lines)


def test_encode_example():
    m = Ask("Pa", "Pa#1", "Pa:__q0", {"Pa:__q0"})
    assert encode(m) == b'{"type":"ask","pid":"Pa","qid":"Pa#1","t":"Pa:__q0","visited":["Pa:__q0"]}'
    assert encode(Tell("Pa#1", {"o2", "o1"})) == b'{"type":"tell","qid":"Pa#1","res":["o1","o2"]}'


words = st.text("abcPé:#_0123", min_size=1, max_size=6)
sets = st.frozensets(words, max_size=4)


@st.composite
def messages(draw):
    kind = draw(st.sampled_from(["ask", "tell", "cache"]))
    if kind == "ask":
        t = draw(words)
        return Ask(draw(words), draw(words), t, draw(sets) | {t})
    if kind == "tell":
        return Tell(draw(words), draw(sets), draw(st.none() | words), draw(st.sampled_from([None, "full", "partial"])))
    return CachePut(draw(sets), draw(sets))


@given(messages())
def test_round_trip(m):
    assert decode(encode(m)) == m


def test_round_trip_many():
    import random

    rng = random.Random(7)
    for i in range(1000):
        objs = {f"o{rng.randrange(20)}" for _ in range(rng.randrange(5))}
        m = Ask("Pa", f"Pa#{i}", "Pb:x", {"Pb:x"} | {f"Pc:{o}" for o in objs}) if i % 2 else Tell(f"Pb#{i}", objs)
        assert decode(encode(m)) == m


@pytest.mark.parametrize("line", [b'{"type":"ask","pid":"Pa"', b"", b"[]", b'{"type":"nope"}',
                                  b'{"type":"ask","pid":"Pa","qid":"q","t":"x","visited":[]}',
                                  b'{"type":"tell","qid":1,"res":[]}', b'{"type":"tell","qid":"q","res":["a"],"flag":"x"}'])
def test_decode_errors(line):
    with pytest.raises(DecodeError):
        decode(line)


def test_decode_tolerates_cache_fields():
    m = decode(b'{"type":"tell","qid":"Pa#1","res":[],"t":"Pa:a1","flag":"full"}')
    assert m == Tell("Pa#1", frozenset(), "Pa:a1", "full")
