"""Caching variants of the distributed protocol.

Modes:

``local``
    Answers of local terms that appear directly in a user query are cached at
    the peer owning them; asks first consult the cache.
``push``
    As ``local``, and once every tail term of a foreign articulation (an
    articulation of another peer whose tail uses only this peer's terms) is
    cached, the answer of the whole tail conjunction is pushed to that peer.
``push-ext``
    Tells carry a ``full``/``partial`` flag. A reply is ``full`` when no
    hyperedge was cut by the visited set anywhere below it; full answers for
    articulation heads are cached as well.
``heads``
    Only articulation heads are cached. Before a query is answered the peer
    warms the heads it needs with ordinary distributed queries, then answers
    locally.

Cached values are always complete answers over the whole network, so every
mode returns the same answer sets as the plain protocol.
"""

from __future__ import annotations

from collections import OrderedDict

from .model import Query, owner_of
from .net import (
    FULL,
    PARTIAL,
    Ask,
    CachePut,
    LogObject,
    Peer,
    RunStats,
    Tell,
    close_call,
    compute_answer,
    min_flag,
)

CACHE_MODES = ("local", "push", "push-ext", "heads")


class CacheStore:
    """Term or conjunction -> object set, optionally LRU-bounded."""

    def __init__(self, capacity: int | None = None):
        if capacity is not None and capacity < 1:
            raise ValueError("cache capacity must be positive")
        self.capacity = capacity
        self._data: OrderedDict = OrderedDict()

    def __contains__(self, key):
        return key in self._data

    def __len__(self):
        return len(self._data)

    def get(self, key):
        if key not in self._data:
            return None
        self._data.move_to_end(key)
        return self._data[key]

    def put(self, key, value) -> None:
        self._data[key] = frozenset(value)
        self._data.move_to_end(key)
        if self.capacity is not None:
            while len(self._data) > self.capacity:
                self._data.popitem(last=False)

    def keys(self):
        return list(self._data)

    def items(self):
        return list(self._data.items())


class CachingPeer(Peer):
    def __init__(self, pdef, sim, mode: str, capacity: int | None = None):
        super().__init__(pdef, sim)
        if mode not in CACHE_MODES:
            raise ValueError(f"unknown cache mode {mode!r}")
        self.mode = mode
        self.cache = CacheStore(capacity)
        # ask id -> term, for asks made directly on behalf of a user query
        self.to_be_cached: dict[str, str] = {}
        self.art_heads = frozenset(a.head for a in pdef.articulations)
        self.foreign_articulations = sorted(
            (p.peer_id, a.tail)
            for p in sim.network.peers
            if p.peer_id != self.id
            for a in p.articulations
            if a.tail <= self.terms
        )

    # cache helpers

    def lookup(self, key):
        value = self.cache.get(key)
        stats = self.sim.bus.stats
        if value is None:
            stats.cache_misses += 1
        else:
            stats.cache_hits += 1
        return value

    def is_local_edge(self, h) -> bool:
        return h.tail <= self.terms or h.head in self.root_edges

    def forward(self, t: str) -> None:
        for dest, tail in self.foreign_articulations:
            if t not in tail:
                continue
            values = [self.cache.get(u) for u in sorted(tail)]
            if any(v is None for v in values):
                continue
            self.send(dest, CachePut(tail, frozenset.intersection(*values)))

    def store(self, t: str, res) -> None:
        """Insert a full answer; push variants also forward tail conjunctions."""
        self.cache.put(t, res)
        for qid in [q for q, term in self.to_be_cached.items() if term == t]:
            del self.to_be_cached[qid]
        if self.mode in ("push", "push-ext"):
            self.forward(t)

    def reply(self, pid, qid, t, res, flag=FULL) -> None:
        if self.is_root_term(t):
            self.complete(t, res)
            return
        if self.mode == "heads":
            self.send(pid, Tell(qid, res))
        elif self.mode == "push-ext":
            self.send(pid, Tell(qid, res, t, flag))
        else:
            self.send(pid, Tell(qid, res, t))

    # asks

    def on_ask(self, m: Ask) -> None:
        if not self.is_root_term(m.t):
            hit = self.lookup(m.t)
            if hit is not None:
                self.reply(m.pid, m.qid, m.t, hit, FULL)
                return
        if len(m.visited) == 2 and self.mode != "heads":
            self.to_be_cached[m.qid] = m.t

        n = 0
        qp = []
        queue = []
        flag = FULL
        for h in self.incoming(m.t):
            if h.tail & m.visited:
                flag = PARTIAL
                continue
            local = self.is_local_edge(h)
            conj = None
            if not local and self.mode != "heads":
                conj = self.lookup(h.tail)
            if conj is not None:
                qp.append([conj])
                continue
            c = []
            for u in sorted(h.tail):
                hit = self.lookup(u) if (local or self.mode == "heads") else None
                if hit is not None:
                    c.append(hit)
                else:
                    qid = self.new_qid()
                    c.append(qid)
                    n += 1
                    queue.append((owner_of(u), qid, u, m.visited | {u}))
            qp.append(c)
        if self.mode != "push-ext":
            flag = FULL
        if n > 0:
            self.persist(LogObject(m.pid, m.qid, m.t, n, qp, flag))
            for dest, qid, u, visited in queue:
                self.send(dest, Ask(self.id, qid, u, visited))
        else:
            s = compute_answer(qp)
            self.reply(m.pid, m.qid, m.t, s | self.I(m.t), flag)

    # tells

    def on_tell(self, m: Tell) -> None:
        term = self.to_be_cached.pop(m.qid, None)
        if term is not None:
            self.store(term, m.res)
        obj = self.delete1(m.qid)
        if obj is None:
            self.error(f"tell for unknown call {m.qid}")
            return
        qp = close_call(obj.qp, m.qid, m.res)
        flag = min_flag(obj.flag, m.flag or FULL)
        if obj.n == 1:
            s = compute_answer(qp)
            if self.is_root_term(obj.t):
                self.complete(obj.t, s)
                return
            res = s | self.I(obj.t)
            self.reply(obj.pid, obj.qid, obj.t, res, flag)
            if self.mode == "push-ext" and flag == FULL and obj.t in self.art_heads:
                self.store(obj.t, res)
        else:
            self.persist(LogObject(obj.pid, obj.qid, obj.t, obj.n - 1, qp, flag))

    def on_cache_put(self, m: CachePut) -> None:
        self.cache.put(m.key, m.res)


# -- articulation-head warming -------------------------------------------------


def needed_heads(peer: CachingPeer, q: Query) -> list[str]:
    """Local articulation heads reachable backwards from the terms of ``q``
    through local hyperedges."""
    seen = set()
    stack = sorted(q.terms)
    while stack:
        t = stack.pop()
        if t in seen:
            continue
        seen.add(t)
        for h in peer.incoming(t):
            if h.tail <= peer.terms:
                stack.extend(sorted(h.tail - seen))
    return sorted(seen & peer.art_heads)


class _NeedsNetwork(Exception):
    pass


def _local_qe(peer: CachingPeer, x: str, visited: frozenset) -> frozenset:
    hit = peer.cache.get(x)
    if hit is not None:
        return hit
    out = set(peer.I(x))
    for h in peer.incoming(x):
        if h.tail & visited:
            continue
        if not h.tail <= peer.terms:
            raise _NeedsNetwork(x)
        part = None
        for u in sorted(h.tail):
            sub = _local_qe(peer, u, visited | {u})
            part = sub if part is None else part & sub
        out |= part
    return frozenset(out)


def local_answer(peer: CachingPeer, q: Query) -> frozenset[str]:
    """Answer ``q`` from the peer's own taxonomy plus its cache.

    Raises ``_NeedsNetwork`` when an uncached articulation would be needed.
    """
    out = set()
    for d in q.disjuncts:
        part = None
        for u in sorted(d):
            sub = _local_qe(peer, u, frozenset([u]))
            part = sub if part is None else part & sub
        out |= part
    return frozenset(out)


def warm_heads(sim, peer_id: str, q: Query) -> tuple[frozenset[str], RunStats]:
    peer = sim.peer(peer_id)
    for t in sorted(q.terms):
        if t not in peer.terms:
            from .model import UnknownTerm

            raise UnknownTerm(t, f"terminology of {peer_id}")
    total = RunStats()
    heads = needed_heads(peer, q)
    if not heads:
        handle = peer.submit(q)
        total = sim.run_until_quiescent()
        return handle.result, total
    for t in heads:
        if t in peer.cache:
            continue
        handle = peer.submit(Query.of(t))
        total = total + sim.run_until_quiescent()
        peer.cache.put(t, handle.result)
    try:
        return local_answer(peer, q), total
    except _NeedsNetwork:
        # a warmed head was evicted in the meantime
        handle = peer.submit(q)
        total = total + sim.run_until_quiescent()
        return handle.result, total
