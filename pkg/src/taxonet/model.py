"""Core value types: terms, queries, taxonomies, sources, peers and networks.

Terms are plain strings. Inside a network every term is qualified with the id
of the peer that owns it (``"Pa:a1"``); a stand-alone source uses bare names.
All types here are immutable; operations return new values.
"""

from __future__ import annotations

import itertools
import logging
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

logger = logging.getLogger(__name__)

RESERVED_PREFIX = "__"
FRESH_PREFIX = "__q"
SEPARATOR = ":"

# characters that can never appear inside a term name
_FORBIDDEN = re.compile(r"[\s&|!:()]")

_fresh_counter = itertools.count()


class TaxonomyError(Exception):
    """Base class for errors raised by the model layer."""


class UnknownTerm(TaxonomyError, KeyError):
    def __init__(self, term, where="terminology"):
        self.term = term
        super().__init__(f"unknown term {term!r} (not in {where})")

    def __str__(self):
        return self.args[0]


class MalformedTaxonomy(TaxonomyError, ValueError):
    pass


class InvalidNetwork(TaxonomyError, ValueError):
    pass


# -- terms -------------------------------------------------------------------


def qualify(peer: str, name: str) -> str:
    return f"{peer}{SEPARATOR}{name}"


def split_term(term: str) -> tuple[str | None, str]:
    """Return ``(peer, name)``; peer is None for an unqualified term."""
    peer, sep, name = term.partition(SEPARATOR)
    if not sep:
        return None, term
    return peer, name


def owner_of(term: str) -> str | None:
    return split_term(term)[0]


def check_name(name: str, *, allow_reserved: bool = False) -> str | None:
    """Return a reason string if ``name`` is not a legal bare term name."""
    if not name:
        return "empty term name"
    if _FORBIDDEN.search(name):
        return f"term {name!r} contains whitespace or a reserved character"
    if not allow_reserved and name.startswith(RESERVED_PREFIX):
        return f"term {name!r} uses the reserved prefix {RESERVED_PREFIX!r}"
    return None


def is_fresh(term: str) -> bool:
    return split_term(term)[1].startswith(FRESH_PREFIX)


def fresh_term(peer: str | None = None) -> str:
    """A process-unique query term, e.g. ``__q7`` or ``Pa:__q7``."""
    name = f"{FRESH_PREFIX}{next(_fresh_counter)}"
    return qualify(peer, name) if peer else name


# -- queries -----------------------------------------------------------------


@dataclass(frozen=True)
class Query:
    """A query in disjunctive normal form: an ordered tuple of conjunctions."""

    disjuncts: tuple[frozenset[str], ...]

    def __post_init__(self):
        seen = []
        for d in self.disjuncts:
            d = frozenset(d)
            if not d:
                raise ValueError("empty conjunction in query")
            if d not in seen:
                seen.append(d)
        if not seen:
            raise ValueError("query has no disjuncts")
        object.__setattr__(self, "disjuncts", tuple(seen))

    @classmethod
    def of(cls, *disjuncts: Iterable[str] | str) -> "Query":
        """``Query.of("a", ["b", "c"])`` is ``a | b & c``."""
        return cls(tuple(frozenset([d] if isinstance(d, str) else d) for d in disjuncts))

    @property
    def terms(self) -> frozenset[str]:
        return frozenset().union(*self.disjuncts)

    @property
    def is_term(self) -> bool:
        return len(self.disjuncts) == 1 and len(self.disjuncts[0]) == 1

    def __str__(self):
        return " | ".join(" & ".join(sorted(d)) for d in self.disjuncts)


# -- taxonomies --------------------------------------------------------------


@dataclass(frozen=True)
class Hyperedge:
    """A simplified subsumption ``t1 & ... & tn <= head``."""

    tail: frozenset[str]
    head: str

    def __post_init__(self):
        tail = frozenset([self.tail] if isinstance(self.tail, str) else self.tail)
        if not tail:
            raise MalformedTaxonomy("hyperedge with empty tail")
        if self.head in tail:
            raise MalformedTaxonomy(f"hyperedge head {self.head!r} occurs in its tail")
        object.__setattr__(self, "tail", tail)

    @property
    def sort_key(self):
        return (self.head, tuple(sorted(self.tail)))

    def __str__(self):
        return f"{' & '.join(sorted(self.tail))} <= {self.head}"


def edge(tail, head) -> Hyperedge:
    return Hyperedge(frozenset([tail] if isinstance(tail, str) else tail), head)


def sorted_edges(edges: Iterable[Hyperedge]) -> list[Hyperedge]:
    return sorted(edges, key=lambda e: e.sort_key)


@dataclass(frozen=True)
class Taxonomy:
    terms: frozenset[str]
    edges: frozenset[Hyperedge] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "terms", frozenset(self.terms))
        object.__setattr__(self, "edges", frozenset(self.edges))
        for e in self.edges:
            for t in (*e.tail, e.head):
                if t not in self.terms:
                    raise UnknownTerm(t)

    @cached_property
    def _incoming(self) -> dict[str, tuple[Hyperedge, ...]]:
        into: dict[str, list[Hyperedge]] = {}
        for e in sorted_edges(self.edges):
            into.setdefault(e.head, []).append(e)
        return {h: tuple(es) for h, es in into.items()}

    def incoming(self, term: str) -> tuple[Hyperedge, ...]:
        """Hyperedges whose head is ``term``, in canonical order."""
        return self._incoming.get(term, ())


@dataclass(frozen=True, eq=True)
class Source:
    """A taxonomy together with a stored interpretation (term -> objects)."""

    taxonomy: Taxonomy
    interp: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for t, objs in self.interp.items():
            if t not in self.taxonomy.terms:
                raise UnknownTerm(t)
            objs = frozenset(objs)
            if objs:
                clean[t] = objs
        object.__setattr__(self, "interp", clean)

    __hash__ = None

    @classmethod
    def build(cls, edges=(), interp=None, terms=()) -> "Source":
        """Convenience constructor; the terminology defaults to every term mentioned."""
        edges = [e if isinstance(e, Hyperedge) else edge(*e) for e in edges]
        interp = {t: frozenset(o) for t, o in (interp or {}).items()}
        all_terms = set(terms) | set(interp)
        for e in edges:
            all_terms |= e.tail | {e.head}
        return cls(Taxonomy(frozenset(all_terms), frozenset(edges)), interp)

    @property
    def terms(self) -> frozenset[str]:
        return self.taxonomy.terms

    @property
    def edges(self) -> frozenset[Hyperedge]:
        return self.taxonomy.edges

    def I(self, term: str) -> frozenset[str]:  # noqa: E743
        return self.interp.get(term, frozenset())

    @property
    def objects(self) -> frozenset[str]:
        """Every object mentioned by the interpretation."""
        return frozenset().union(*self.interp.values())

    def index_of(self, obj: str) -> frozenset[str]:
        return index_of(self, obj)

    def require(self, term: str) -> None:
        if term not in self.taxonomy.terms:
            raise UnknownTerm(term)

    def with_edges(self, extra: Iterable[Hyperedge], extra_terms=()) -> "Source":
        tax = Taxonomy(self.terms | frozenset(extra_terms), self.edges | frozenset(extra))
        return Source(tax, self.interp)


def index_of(source: Source, obj: str) -> frozenset[str]:
    return frozenset(t for t, objs in source.interp.items() if obj in objs)


# -- simplification ----------------------------------------------------------


def simplify(pairs: Iterable[tuple[Query, Query]]) -> frozenset[Hyperedge]:
    """Expand DNF subsumptions ``C1 | ... | Cn <= t1 & ... & tm`` into hyperedges.

    Each pair yields one edge ``(Ci, tj)`` per disjunct and right-hand term.
    Reflexive and vacuous pairs (head inside its own tail) are dropped.
    """
    out = set()
    for lhs, rhs in pairs:
        if isinstance(rhs, Query):
            if len(rhs.disjuncts) != 1:
                raise MalformedTaxonomy(f"right-hand side {rhs} is not a conjunction")
            rhs_terms = rhs.disjuncts[0]
        else:
            rhs_terms = frozenset([rhs] if isinstance(rhs, str) else rhs)
        lhs_disjuncts = lhs.disjuncts if isinstance(lhs, Query) else Query.of(lhs).disjuncts
        for conj in lhs_disjuncts:
            for t in rhs_terms:
                if t in conj:
                    if len(conj) > 1:
                        logger.warning("dropping vacuous subsumption %s <= %s", " & ".join(sorted(conj)), t)
                    continue
                out.add(Hyperedge(conj, t))
    return frozenset(out)


def transitive_reduction(pairs: Iterable[tuple[str, str]]) -> frozenset[tuple[str, str]]:
    """``R1 - R1∘R1`` where ``R1`` is ``R`` without reflexive pairs.

    This is the textbook definition. On cyclic relations it may not preserve
    the closure (every edge of a 3-clique is composite), which is why loaded
    taxonomies are never reduced automatically.
    """
    r1 = {(a, b) for a, b in pairs if a != b}
    succ: dict[str, set[str]] = {}
    for a, b in r1:
        succ.setdefault(a, set()).add(b)
    composed = {(a, c) for a, b in r1 for c in succ.get(b, ())}
    return frozenset(r1 - composed)


def embed_query(source: Source, q: Query, term: str | None = None) -> tuple[Source, str]:
    """Reduce ``q`` to a term query over an extended source.

    A fresh term with an empty interpretation is added, subsuming every
    disjunct of ``q``. Single-term queries are returned unchanged.
    """
    for t in sorted(q.terms):
        source.require(t)
    if q.is_term:
        (t,) = q.disjuncts[0]
        return source, t
    tq = term or fresh_term()
    extra = [Hyperedge(d, tq) for d in q.disjuncts]
    return source.with_edges(extra, [tq]), tq


# -- networks ----------------------------------------------------------------


@dataclass(frozen=True, eq=True)
class ArticulatedSource:
    """A peer: a source over qualified local terms plus its articulations.

    Articulations have a local head and a tail made only of foreign terms
    (possibly from several peers).
    """

    peer_id: str
    source: Source
    articulations: frozenset[Hyperedge] = frozenset()

    __hash__ = None

    def __post_init__(self):
        object.__setattr__(self, "articulations", frozenset(self.articulations))
        if not self.peer_id or SEPARATOR in self.peer_id or _FORBIDDEN.search(self.peer_id):
            raise InvalidNetwork(f"bad peer id {self.peer_id!r}")
        local = self.source.terms
        for t in local:
            if owner_of(t) != self.peer_id:
                raise InvalidNetwork(f"term {t!r} of peer {self.peer_id} is not qualified by it")
        for a in self.articulations:
            if a.head not in local:
                raise InvalidNetwork(f"articulation head {a.head!r} is not a term of {self.peer_id}")
            for t in a.tail:
                if t in local or owner_of(t) in (None, self.peer_id):
                    raise InvalidNetwork(f"articulation tail term {t!r} is not foreign to {self.peer_id}")

    @property
    def terms(self) -> frozenset[str]:
        return self.source.terms

    @property
    def all_edges(self) -> frozenset[Hyperedge]:
        return self.source.edges | self.articulations


@dataclass(frozen=True, eq=True)
class Network:
    peers: tuple[ArticulatedSource, ...]
    universe: frozenset[str] | None = None

    __hash__ = None

    def __post_init__(self):
        peers = tuple(sorted(self.peers, key=lambda p: p.peer_id))
        if not peers:
            raise InvalidNetwork("a network needs at least one peer")
        ids = [p.peer_id for p in peers]
        if len(set(ids)) != len(ids):
            raise InvalidNetwork("duplicate peer id")
        object.__setattr__(self, "peers", peers)
        if self.universe is not None:
            object.__setattr__(self, "universe", frozenset(self.universe))
        all_terms = set()
        for p in peers:
            if all_terms & p.terms:
                raise InvalidNetwork(f"terminology of {p.peer_id} overlaps another peer")
            all_terms |= p.terms
        for p in peers:
            for a in p.articulations:
                for t in a.tail:
                    if t not in all_terms:
                        raise UnknownTerm(t, f"network (articulation of {p.peer_id})")

    def peer(self, peer_id: str) -> ArticulatedSource:
        for p in self.peers:
            if p.peer_id == peer_id:
                return p
        raise KeyError(f"no peer {peer_id!r}")

    @property
    def peer_ids(self) -> list[str]:
        return [p.peer_id for p in self.peers]

    @property
    def terms(self) -> frozenset[str]:
        return frozenset().union(*(p.terms for p in self.peers))

    def owner(self, term: str) -> str:
        peer = owner_of(term)
        if peer is None or term not in self.peer(peer).terms:
            raise UnknownTerm(term, "network")
        return peer


def flatten(network: Network) -> Source:
    """The network source: union of terminologies, edges, articulations and interpretations."""
    terms = set()
    edges = set()
    interp: dict[str, frozenset[str]] = {}
    for p in network.peers:
        terms |= p.terms
        edges |= p.all_edges
        interp.update(p.source.interp)
    return Source(Taxonomy(frozenset(terms), frozenset(edges)), interp)


def make_peer(peer_id: str, terms=(), edges=(), interp=None, articulations=()) -> ArticulatedSource:
    """Build a peer from bare local names; foreign terms must already be qualified."""

    def q(t):
        return t if SEPARATOR in t else qualify(peer_id, t)

    local_edges = [Hyperedge(frozenset(map(q, tail)), q(head)) for tail, head in edges]
    arts = [Hyperedge(frozenset(tail), q(head)) for tail, head in articulations]
    src = Source.build(
        local_edges,
        {q(t): objs for t, objs in (interp or {}).items()},
        terms=[q(t) for t in terms],
    )
    for a in arts:
        if a.head not in src.terms:
            src = Source(Taxonomy(src.terms | {a.head}, src.edges), src.interp)
    return ArticulatedSource(peer_id, src, frozenset(arts))
