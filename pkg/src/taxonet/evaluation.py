"""Centralized query evaluation.

``qe`` is the recursive evaluator over the taxonomy B-graph: the answer of
``x`` is ``I(x)`` plus, for every hyperedge into ``x`` whose tail avoids the
terms already on the current path, the intersection of the answers of its
tail terms. The path set is what keeps the recursion finite on cycles, and
it makes intermediate results path-dependent, so nothing is memoized.

``minimal_model`` is the independent oracle: a plain least fixpoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .model import Query, Source, embed_query
from .parser import NegQuery


@dataclass(frozen=True)
class TraceCall:
    term: str
    visited: frozenset[str]
    depth: int
    children: int = 0
    blocked: int = 0

    def __str__(self):
        star = " *" if self.blocked else ""
        return f"QE({self.term}, {{{','.join(sorted(self.visited))}}}){star}"


@dataclass
class CallTrace:
    """Calls made by :func:`qe` in the order they were entered."""

    calls: list[TraceCall] = field(default_factory=list)

    def __len__(self):
        return len(self.calls)

    def __iter__(self):
        return iter(self.calls)

    def pairs(self) -> list[tuple[str, frozenset[str]]]:
        return [(c.term, c.visited) for c in self.calls]

    def level_order(self) -> list[TraceCall]:
        """The same calls listed breadth-first (stable within a level)."""
        return sorted(self.calls, key=lambda c: c.depth)

    def dump(self) -> str:
        return "".join(f"{c}\n" for c in self.calls)


def qe(source: Source, x: str, visited: Iterable[str] | None = None, trace: CallTrace | None = None) -> frozenset[str]:
    """Answer of the term ``x`` given the set of terms on the current path.

    Call as ``qe(source, t)`` (the path defaults to ``{t}``).
    """
    source.require(x)
    visited = frozenset(visited) if visited is not None else frozenset([x])
    if x not in visited:
        raise ValueError(f"{x!r} must be in the visited set")
    return _qe(source, x, visited, trace, 0)


def _qe(source, x, visited, trace, depth):
    slot = None
    if trace is not None:
        slot = len(trace.calls)
        trace.calls.append(TraceCall(x, visited, depth))
    result = set(source.I(x))
    children = blocked = 0
    for e in source.taxonomy.incoming(x):
        if e.tail & visited:
            blocked += 1
            continue
        part = None
        for u in sorted(e.tail):
            children += 1
            sub = _qe(source, u, visited | {u}, trace, depth + 1)
            part = sub if part is None else part & sub
        result |= part
    if trace is not None:
        trace.calls[slot] = TraceCall(x, visited, depth, children, blocked)
    return frozenset(result)


def answer(source: Source, q: Query) -> frozenset[str]:
    """``ans(q, S)``: embed the query as a fresh term and evaluate that term."""
    extended, t = embed_query(source, q)
    return qe(extended, t)


def answer_by_parts(source: Source, q: Query) -> frozenset[str]:
    """Union over disjuncts of the intersection of the term answers."""
    out = set()
    for d in q.disjuncts:
        part = None
        for t in sorted(d):
            a = qe(source, t)
            part = a if part is None else part & a
        out |= part
    return frozenset(out)


def minimal_model(source: Source) -> dict[str, frozenset[str]]:
    """The least model dominating the stored interpretation."""
    model = {t: set(source.I(t)) for t in source.terms}
    edges = list(source.edges)
    changed = True
    while changed:
        changed = False
        for e in edges:
            tail = iter(e.tail)
            derived = set(model[next(tail)])
            for u in tail:
                derived &= model[u]
            if not derived <= model[e.head]:
                model[e.head] |= derived
                changed = True
    return {t: frozenset(objs) for t, objs in model.items()}


def default_universe(source: Source) -> frozenset[str]:
    return source.objects


def extended_answer(source: Source, q: NegQuery, universe: Iterable[str] | None = None,
                    model: dict | None = None) -> frozenset[str]:
    """Closed-world answer of a query with negated literals.

    Positive literals denote their minimal-model extension, ``!t`` its
    complement within ``universe`` (defaults to every stored object).
    """
    for t in sorted(q.terms):
        source.require(t)
    universe = frozenset(universe) if universe is not None else default_universe(source)
    model = model if model is not None else minimal_model(source)
    out = set()
    for d in q.disjuncts:
        part = None
        for t, positive in sorted(d):
            ext = model[t] if positive else universe - model[t]
            part = ext if part is None else part & ext
        out |= part
    return frozenset(out)
