"""Distributed evaluation over a network of articulated peers.

Peers talk through two message kinds. ``Ask(pid, qid, t, visited)`` asks the
receiver to evaluate the term ``t``; ``Tell(qid, res)`` returns the result of
an earlier ask. A peer answering an ask opens one sub-query per tail term of
every usable hyperedge into ``t`` and records the pending calls in a log
object; when the last call of a log object is closed it computes
``union over sub-programs of intersection of their results``, adds ``I(t)``
and tells the asker.

Everything runs on an in-memory bus with a deterministic scheduler (FIFO, or a
seeded shuffle). Each delivery is handled to completion before the next.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass, field, fields
from typing import Callable

from .model import (
    Hyperedge,
    Network,
    Query,
    UnknownTerm,
    fresh_term,
    owner_of,
    sorted_edges,
)

FULL = "full"
PARTIAL = "partial"
FLAG_ORDER = {PARTIAL: 0, FULL: 1}


def min_flag(a: str, b: str) -> str:
    return a if FLAG_ORDER[a] <= FLAG_ORDER[b] else b


class ProtocolError(Exception):
    pass


class IllegalState(ProtocolError):
    pass


class Diverged(RuntimeError):
    pass


class DecodeError(ValueError):
    pass


# -- messages ----------------------------------------------------------------


@dataclass(frozen=True)
class Ask:
    pid: str
    qid: str
    t: str
    visited: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "visited", frozenset(self.visited))
        if self.t not in self.visited:
            raise ProtocolError(f"ask term {self.t!r} missing from its visited set")

    def __str__(self):
        return f"ask({self.pid}, {self.qid}, {self.t}, {{{', '.join(sorted(self.visited))}}})"


@dataclass(frozen=True)
class Tell:
    qid: str
    res: frozenset[str]
    t: str | None = None
    flag: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "res", frozenset(self.res))
        if self.flag is not None and self.flag not in FLAG_ORDER:
            raise ProtocolError(f"bad flag {self.flag!r}")

    def __str__(self):
        extra = "".join(f", {v}" for v in (self.t, self.flag) if v is not None)
        return f"tell({self.qid}{extra}, {{{', '.join(sorted(self.res))}}})"


@dataclass(frozen=True)
class CachePut:
    """A pushed answer for a conjunction of the sender's terms."""

    key: frozenset[str]
    res: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "key", frozenset(self.key))
        object.__setattr__(self, "res", frozenset(self.res))

    def __str__(self):
        return f"cache({' & '.join(sorted(self.key))}, {{{', '.join(sorted(self.res))}}})"


Message = Ask | Tell | CachePut


def encode(m: Message) -> bytes:
    if isinstance(m, Ask):
        doc = {"type": "ask", "pid": m.pid, "qid": m.qid, "t": m.t, "visited": sorted(m.visited)}
    elif isinstance(m, Tell):
        doc = {"type": "tell", "qid": m.qid, "res": sorted(m.res)}
        if m.t is not None:
            doc["t"] = m.t
        if m.flag is not None:
            doc["flag"] = m.flag
    elif isinstance(m, CachePut):
        doc = {"type": "cache", "key": sorted(m.key), "res": sorted(m.res)}
    else:
        raise TypeError(f"not a message: {m!r}")
    return json.dumps(doc, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def _field(doc, name, kind):
    if name not in doc:
        raise DecodeError(f"missing field {name!r}")
    value = doc[name]
    if kind is str and not isinstance(value, str):
        raise DecodeError(f"field {name!r} must be a string")
    if kind is list and not (isinstance(value, list) and all(isinstance(v, str) for v in value)):
        raise DecodeError(f"field {name!r} must be a list of strings")
    return value


def decode(line: bytes | str) -> Message:
    try:
        doc = json.loads(line)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise DecodeError(f"malformed message: {exc}") from exc
    if not isinstance(doc, dict):
        raise DecodeError("message must be a JSON object")
    kind = doc.get("type")
    try:
        if kind == "ask":
            return Ask(_field(doc, "pid", str), _field(doc, "qid", str), _field(doc, "t", str),
                       frozenset(_field(doc, "visited", list)))
        if kind == "tell":
            t = _field(doc, "t", str) if "t" in doc else None
            flag = _field(doc, "flag", str) if "flag" in doc else None
            return Tell(_field(doc, "qid", str), frozenset(_field(doc, "res", list)), t, flag)
        if kind == "cache":
            return CachePut(frozenset(_field(doc, "key", list)), frozenset(_field(doc, "res", list)))
    except ProtocolError as exc:
        raise DecodeError(str(exc)) from exc
    raise DecodeError(f"unknown message type {kind!r}")


# -- peer state ---------------------------------------------------------------


@dataclass
class LogObject:
    pid: str
    qid: str
    t: str
    n: int
    qp: list[list]  # each call is an open query id (str) or a closed frozenset
    flag: str = FULL

    def open_calls(self) -> list[str]:
        return [c for sp in self.qp for c in sp if isinstance(c, str)]


def compute_answer(qp) -> frozenset[str]:
    """Union over sub-programs of the intersection of their closed calls."""
    out = set()
    for sp in qp:
        part = None
        for call in sp:
            if isinstance(call, str):
                raise IllegalState(f"call {call} is still open")
            part = set(call) if part is None else part & call
        out |= part if part is not None else set()
    return frozenset(out)


def close_call(qp, qid, res):
    return [[res if c == qid else c for c in sp] for sp in qp]


@dataclass
class QueryHandle:
    peer: str
    qid: str
    term: str
    query: Query
    result: frozenset[str] | None = None
    callbacks: list[Callable] = field(default_factory=list)

    @property
    def done(self) -> bool:
        return self.result is not None


@dataclass
class RunStats:
    asks: int = 0
    tells: int = 0  # tell deliveries plus root completions
    tell_messages: int = 0
    completions: int = 0
    forwards: int = 0
    delivered: int = 0
    inter_peer: int = 0
    log_objects_peak: int = 0
    cache_hits: int = 0
    cache_misses: int = 0
    protocol_errors: int = 0

    def __add__(self, other: "RunStats") -> "RunStats":
        out = RunStats()
        for f in fields(self):
            a, b = getattr(self, f.name), getattr(other, f.name)
            setattr(out, f.name, max(a, b) if f.name == "log_objects_peak" else a + b)
        return out

    def summary(self) -> str:
        return " ".join(f"{f.name}={getattr(self, f.name)}" for f in fields(self))


class Peer:
    """Plain protocol: asks and tells handled as in the cache-less procedures."""

    def __init__(self, pdef, sim: "Simulator"):
        self.id = pdef.peer_id
        self.pdef = pdef
        self.sim = sim
        self.terms = pdef.terms
        self.interp = pdef.source.interp
        self.log: dict[str, LogObject] = {}
        self.parent_of: dict[str, str] = {}  # open call id -> owning log object id
        self.roots: dict[str, QueryHandle] = {}  # fresh term -> handle
        self.root_edges: dict[str, list[Hyperedge]] = {}
        self._counter = 0
        into: dict[str, list[Hyperedge]] = {}
        for e in sorted_edges(pdef.all_edges):
            into.setdefault(e.head, []).append(e)
        self._incoming = into

    # helpers

    def new_qid(self) -> str:
        self._counter += 1
        return f"{self.id}#{self._counter}"

    def I(self, t: str) -> frozenset[str]:  # noqa: E743
        return self.interp.get(t, frozenset())

    def incoming(self, t: str) -> list[Hyperedge]:
        if t in self.root_edges:
            return self.root_edges[t]
        return self._incoming.get(t, [])

    def knows(self, t: str) -> bool:
        return t in self.terms or t in self.root_edges

    def is_root_term(self, t: str) -> bool:
        return t not in self.terms

    def send(self, dest: str, msg: Message) -> None:
        self.sim.bus.put(self.id, dest, msg)

    def persist(self, obj: LogObject) -> None:
        self.log[obj.qid] = obj
        for c in obj.open_calls():
            self.parent_of[c] = obj.qid

    def delete1(self, qid: str) -> LogObject | None:
        parent = self.parent_of.pop(qid, None)
        if parent is None:
            return None
        return self.log.pop(parent)

    def error(self, reason: str) -> None:
        self.sim.bus.stats.protocol_errors += 1
        self.sim.errors.append(f"{self.id}: {reason}")

    # QUERY

    def submit(self, q: Query) -> QueryHandle:
        for t in sorted(q.terms):
            if t not in self.terms:
                raise UnknownTerm(t, f"terminology of {self.id}")
        t = fresh_term(self.id)
        self.root_edges[t] = sorted_edges(Hyperedge(d, t) for d in q.disjuncts)
        qid = self.new_qid()
        handle = QueryHandle(self.id, qid, t, q)
        self.roots[t] = handle
        self.send(self.id, Ask(self.id, qid, t, frozenset([t])))
        return handle

    def complete(self, t: str, result: frozenset[str]) -> None:
        """The root log object reached zero open calls: wake the waiting query."""
        handle = self.roots.pop(t)
        del self.root_edges[t]
        handle.result = frozenset(result)
        self.sim.bus.stats.tells += 1
        self.sim.bus.stats.completions += 1
        for cb in handle.callbacks:
            cb(handle)

    # message handling

    def handle(self, msg: Message) -> None:
        if isinstance(msg, Ask):
            if not self.knows(msg.t):
                self.error(f"ask for unknown term {msg.t!r}")
                return
            self.on_ask(msg)
        elif isinstance(msg, Tell):
            self.on_tell(msg)
        elif isinstance(msg, CachePut):
            self.on_cache_put(msg)
        else:
            self.error(f"unknown message {msg!r}")

    def on_ask(self, m: Ask) -> None:
        n = 0
        qp = []
        queue = []
        for h in self.incoming(m.t):
            if h.tail & m.visited:
                continue
            c = []
            for u in sorted(h.tail):
                qid = self.new_qid()
                c.append(qid)
                n += 1
                queue.append((owner_of(u), qid, u, m.visited | {u}))
            qp.append(c)
        if n > 0:
            self.persist(LogObject(m.pid, m.qid, m.t, n, qp))
            for dest, qid, u, visited in queue:
                self.send(dest, Ask(self.id, qid, u, visited))
        else:
            self.send(m.pid, Tell(m.qid, self.I(m.t)))

    def on_tell(self, m: Tell) -> None:
        obj = self.delete1(m.qid)
        if obj is None:
            self.error(f"tell for unknown call {m.qid}")
            return
        qp = close_call(obj.qp, m.qid, m.res)
        if obj.n == 1:
            s = compute_answer(qp)
            if self.is_root_term(obj.t):
                self.complete(obj.t, s)
            else:
                self.send(obj.pid, Tell(obj.qid, s | self.I(obj.t)))
        else:
            self.persist(LogObject(obj.pid, obj.qid, obj.t, obj.n - 1, qp, obj.flag))

    def on_cache_put(self, m: CachePut) -> None:
        self.error("cache message received by a peer without a cache")


# -- bus and driver -----------------------------------------------------------


class Bus:
    """In-memory message queue with FIFO or seeded-random delivery order."""

    def __init__(self, scheduler: str = "fifo", seed: int | None = None, wire: bool = False):
        if scheduler not in ("fifo", "random"):
            raise ValueError(f"unknown scheduler {scheduler!r}")
        self.scheduler = scheduler
        self.rng = random.Random(seed)
        self.wire = wire
        self.pending: deque = deque()
        self.stats = RunStats()

    def put(self, src: str, dest: str, msg: Message) -> None:
        if self.wire:
            msg = decode(encode(msg))
        self.pending.append((src, dest, msg))

    def take(self):
        if self.scheduler == "fifo" or len(self.pending) == 1:
            return self.pending.popleft()
        i = self.rng.randrange(len(self.pending))
        self.pending.rotate(-i)
        item = self.pending.popleft()
        self.pending.rotate(i)
        return item

    def __len__(self):
        return len(self.pending)


class Simulator:
    """A network of peers wired to one bus.

    ``cache`` selects the protocol: ``none`` (plain), ``local``, ``push``,
    ``push-ext`` or ``heads``.
    """

    def __init__(self, network: Network, cache: str = "none", scheduler: str = "fifo",
                 seed: int | None = None, budget: int = 10**6, capacity: int | None = None,
                 wire: bool = False, record: bool = False, trace: Callable[[str], None] | None = None):
        from .cache import CACHE_MODES, CachingPeer

        if cache != "none" and cache not in CACHE_MODES:
            raise ValueError(f"unknown cache mode {cache!r}")
        self.network = network
        self.cache = cache
        self.bus = Bus(scheduler, seed, wire)
        self.budget = budget
        self.trace = trace
        self.record = record
        self.delivered: list[tuple[str, str, Message]] = []
        self.errors: list[str] = []
        self.peers: dict[str, Peer] = {}
        for pdef in network.peers:
            if cache == "none":
                self.peers[pdef.peer_id] = Peer(pdef, self)
            else:
                self.peers[pdef.peer_id] = CachingPeer(pdef, self, cache, capacity)

    def peer(self, peer_id: str) -> Peer:
        try:
            return self.peers[peer_id]
        except KeyError:
            raise KeyError(f"no peer {peer_id!r}") from None

    def submit_query(self, peer_id: str, q: Query) -> QueryHandle:
        return self.peer(peer_id).submit(q)

    def run_until_quiescent(self) -> RunStats:
        """Deliver messages until the queue is empty; return this run's counts."""
        stats = self.bus.stats = RunStats()
        while self.bus.pending:
            if stats.delivered >= self.budget:
                raise Diverged(f"message budget of {self.budget} exhausted")
            src, dest, msg = self.bus.take()
            stats.delivered += 1
            if src != dest:
                stats.inter_peer += 1
            if isinstance(msg, Ask):
                stats.asks += 1
            elif isinstance(msg, Tell):
                stats.tells += 1
                stats.tell_messages += 1
            else:
                stats.forwards += 1
            if self.record:
                self.delivered.append((src, dest, msg))
            if self.trace is not None:
                self.trace(f"{dest} ← {msg}")
            target = self.peers.get(dest)
            if target is None:
                stats.protocol_errors += 1
                self.errors.append(f"message for unknown peer {dest!r}")
                continue
            target.handle(msg)
            live = sum(len(p.log) for p in self.peers.values())
            stats.log_objects_peak = max(stats.log_objects_peak, live)
        return stats

    def query(self, peer_id: str, q: Query) -> tuple[frozenset[str], RunStats]:
        """Evaluate ``q`` at ``peer_id`` and run the network to quiescence."""
        if self.cache == "heads":
            from .cache import warm_heads

            return warm_heads(self, peer_id, q)
        handle = self.submit_query(peer_id, q)
        stats = self.run_until_quiescent()
        if not handle.done:
            raise IllegalState(f"query {handle.qid} did not complete")
        return handle.result, stats

    def live_log_objects(self) -> int:
        return sum(len(p.log) for p in self.peers.values())
