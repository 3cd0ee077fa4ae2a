"""Instance generators: the hitting-set reduction, the exponential chain and
seeded random networks for property tests."""

from __future__ import annotations

import random
import string
from dataclasses import dataclass

from .model import (
    Hyperedge,
    Network,
    Query,
    Source,
    UnknownTerm,
    check_name,
    make_peer,
    owner_of,
)


def gen_hitting(collection, query_term: str = "t") -> tuple[Source, str]:
    """Reduce a hitting-set instance to a taxonomy.

    Each set ``C_j`` gets a term ``u_j`` subsuming its elements and ``t`` is
    subsumed by the conjunction of all the ``u_j``. An object is in ``ans(t)``
    as soon as its index hits every set.
    """
    sets = [list(dict.fromkeys(c)) for c in collection]
    if not sets or any(not c for c in sets):
        raise ValueError("a collection is a non-empty list of non-empty sets")
    us = [f"u{j}" for j in range(1, len(sets) + 1)]
    ground = sorted({x for c in sets for x in c})
    for x in ground:
        if check_name(x) or x in us or x == query_term:
            raise UnknownTerm(x, "allowed element names")
    edges = [Hyperedge(frozenset([x]), u) for u, c in zip(us, sets) for x in c]
    edges.append(Hyperedge(frozenset(us), query_term))
    return Source.build(edges, terms=ground + us + [query_term]), query_term


def parse_collection(text: str) -> list[list[str]]:
    """``"a,b;b,c,d"`` -> ``[["a", "b"], ["b", "c", "d"]]``."""
    return [[x.strip() for x in part.split(",") if x.strip()] for part in text.split(";") if part.strip()]


def gen_chain(k: int, query_term: str = "t") -> tuple[Source, str]:
    """Two parallel ladders ``u_i, v_i`` joined pairwise; 2**k simple paths
    lead from ``u1`` to ``t``."""
    if k < 1:
        raise ValueError("k must be at least 1")
    edges = []
    for i in range(1, k + 1):
        tail = frozenset([f"u{i}", f"v{i}"])
        edges.append(Hyperedge(tail, f"u{i + 1}"))
        edges.append(Hyperedge(tail, f"v{i + 1}"))
    edges.append(Hyperedge(frozenset([f"u{k + 1}", f"v{k + 1}"]), query_term))
    return Source.build(edges), query_term


@dataclass(frozen=True)
class Limits:
    peers: int = 3
    terms: int = 8  # over the whole network
    edges: int = 12
    tail: int = 3
    objects: int = 8
    cyclic: float = 0.2


def _peer_ids(n):
    return [f"P{string.ascii_lowercase[i]}" for i in range(n)]


def gen_random(seed: int, limits: Limits = Limits()) -> Network:
    """A reproducible random network within ``limits``.

    Tails are either all local or all foreign. With probability
    ``limits.cyclic`` an edge reverses an earlier one, closing a cycle.
    """
    rng = random.Random(seed)
    n_peers = rng.randint(1, limits.peers)
    ids = _peer_ids(n_peers)
    n_terms = rng.randint(n_peers, max(n_peers, limits.terms))
    counts = [1] * n_peers
    for _ in range(n_terms - n_peers):
        counts[rng.randrange(n_peers)] += 1
    terms = {p: [f"{p}:{p[1]}{i}" for i in range(1, c + 1)] for p, c in zip(ids, counts)}
    everything = [t for p in ids for t in terms[p]]

    edges: set[Hyperedge] = set()
    for _ in range(rng.randint(0, limits.edges)):
        if edges and rng.random() < limits.cyclic:
            prev = rng.choice(sorted(edges, key=lambda e: e.sort_key))
            head = rng.choice(sorted(prev.tail))
            edges.add(Hyperedge(frozenset([prev.head]), head))
            continue
        head = rng.choice(everything)
        p = owner_of(head)
        foreign = [t for t in everything if owner_of(t) != p]
        pool = foreign if foreign and rng.random() < 0.5 else [t for t in terms[p] if t != head]
        if not pool:
            continue
        size = rng.randint(1, min(limits.tail, len(pool)))
        edges.add(Hyperedge(frozenset(rng.sample(pool, size)), head))

    objects = [f"o{i}" for i in range(1, rng.randint(1, limits.objects) + 1)]
    interp: dict[str, set[str]] = {}
    for o in objects:
        for t in rng.sample(everything, rng.randint(0, min(3, len(everything)))):
            interp.setdefault(t, set()).add(o)

    peers = []
    for p in ids:
        mine = set(terms[p])
        local = [(e.tail, e.head) for e in edges if e.head in mine and e.tail <= mine]
        arts = [(e.tail, e.head) for e in edges if e.head in mine and not e.tail <= mine]
        peers.append(make_peer(p, terms[p], local, {t: o for t, o in interp.items() if t in mine}, arts))
    return Network(tuple(peers))


def gen_random_source(seed: int, terms: int = 6, edges: int = 8, tail: int = 3, objects: int = 6) -> Source:
    """A single stand-alone source with bare term names."""
    rng = random.Random(seed)
    names = [f"t{i}" for i in range(1, rng.randint(1, terms) + 1)]
    es = set()
    for _ in range(rng.randint(0, edges)):
        head = rng.choice(names)
        pool = [t for t in names if t != head]
        if not pool:
            break
        es.add(Hyperedge(frozenset(rng.sample(pool, rng.randint(1, min(tail, len(pool))))), head))
    interp: dict[str, set[str]] = {}
    for i in range(1, rng.randint(1, objects) + 1):
        for t in rng.sample(names, rng.randint(0, min(3, len(names)))):
            interp.setdefault(t, set()).add(f"o{i}")
    return Source.build(es, interp, names)


def random_query(rng: random.Random, terms, max_disjuncts: int = 3, max_size: int = 3) -> Query:
    terms = sorted(terms)
    ds = []
    for _ in range(rng.randint(1, max_disjuncts)):
        ds.append(frozenset(rng.sample(terms, rng.randint(1, min(max_size, len(terms))))))
    return Query(tuple(ds))


def gen_dnf_taxonomy(seed: int, terms: int = 4, pairs: int = 4, objects: int = 2):
    """Random DNF subsumptions ``lhs <= rhs`` (rhs a conjunction) and a stored
    interpretation, for checking simplification against brute force.

    Returns ``(names, pairs, interp)``.
    """
    rng = random.Random(seed)
    names = [f"t{i}" for i in range(1, rng.randint(2, terms) + 1)]
    out = []
    for _ in range(rng.randint(1, pairs)):
        lhs = random_query(rng, names, 2, 2)
        rhs = Query((frozenset(rng.sample(names, rng.randint(1, 2))),))
        out.append((lhs, rhs))
    objs = [f"o{i}" for i in range(1, objects + 1)]
    interp = {}
    for o in objs:
        for t in rng.sample(names, rng.randint(0, 2)):
            interp.setdefault(t, set()).add(o)
    return names, out, interp
