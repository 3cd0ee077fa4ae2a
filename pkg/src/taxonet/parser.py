"""Query grammar and the JSON network/source file format.

Queries use ``&`` for conjunction, ``|`` for disjunction and a ``!`` prefix for
negation; there are no parentheses, so the grammar only admits DNF::

    query   := conj ("|" conj)*
    conj    := literal ("&" literal)*
    literal := "!"? TERM
"""

from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass
from pathlib import Path

from .model import (
    SEPARATOR,
    ArticulatedSource,
    Hyperedge,
    InvalidNetwork,
    Network,
    Query,
    Source,
    Taxonomy,
    TaxonomyError,
    UnknownTerm,
    check_name,
    qualify,
    simplify,
    sorted_edges,
    split_term,
)


class ParseError(ValueError):
    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


class SchemaViolation(TaxonomyError, ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class DanglingForeignTerm(SchemaViolation):
    pass


class ValidationFailed(TaxonomyError, ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class ContradictionWarning(UserWarning):
    pass


# -- queries -----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<op>[&|!])|(?P<term>[^\s&|!()]+)|(?P<bad>\S))")


@dataclass(frozen=True)
class NegQuery:
    """DNF query whose literals are ``(term, positive)`` pairs."""

    disjuncts: tuple[frozenset[tuple[str, bool]], ...]

    @property
    def terms(self) -> frozenset[str]:
        return frozenset(t for d in self.disjuncts for t, _ in d)

    @property
    def contradictory(self) -> tuple[int, ...]:
        """Indices of disjuncts containing both ``t`` and ``!t``."""
        out = []
        for i, d in enumerate(self.disjuncts):
            pos = {t for t, p in d if p}
            if any(t in pos for t, p in d if not p):
                out.append(i)
        return tuple(out)

    @property
    def has_negation(self) -> bool:
        return any(not p for d in self.disjuncts for _, p in d)

    def positive(self) -> Query:
        if self.has_negation:
            raise ValueError("query contains negated literals")
        return Query(tuple(frozenset(t for t, _ in d) for d in self.disjuncts))

    def __str__(self):
        def lit(t, p):
            return t if p else f"!{t}"

        return " | ".join(
            " & ".join(lit(t, p) for t, p in sorted(d, key=lambda x: (x[0], not x[1])))
            for d in self.disjuncts
        )


def _check_term(token: str, offset: int, text: str, allow_reserved: bool) -> None:
    peer, name = split_term(token)
    if peer is not None and (not peer or check_name(peer, allow_reserved=True)):
        raise ParseError(f"bad peer qualifier in {token!r}", offset, text)
    reason = check_name(name, allow_reserved=allow_reserved)
    if reason:
        raise ParseError(reason, offset, text)


def _parse(text: str, allow_negation: bool, allow_reserved: bool = False):
    disjuncts: list[list[tuple[str, bool]]] = [[]]
    expect_literal = True
    negate = False
    pos = 0
    last_op = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # trailing whitespace
            break
        start = m.start(m.lastgroup)
        if m.group("bad"):
            raise ParseError(f"unexpected character {m.group('bad')!r}", start, text)
        if m.group("term"):
            if not expect_literal:
                raise ParseError("expected '&' or '|'", start, text)
            _check_term(m.group("term"), start, text, allow_reserved)
            disjuncts[-1].append((m.group("term"), not negate))
            expect_literal, negate = False, False
        else:
            op = m.group("op")
            if op == "!":
                if not allow_negation:
                    raise ParseError("negation is not allowed here", start, text)
                if not expect_literal or negate:
                    raise ParseError("misplaced '!'", start, text)
                negate = True
            else:
                if expect_literal:
                    raise ParseError(f"unexpected {op!r}", start, text)
                if op == "|":
                    disjuncts.append([])
                expect_literal = True
                last_op = start
        pos = m.end()
    if expect_literal:
        if not text.strip():
            raise ParseError("empty query", 0, text)
        where = len(text.rstrip()) if negate else last_op
        raise ParseError("dangling operator", where, text)
    return disjuncts


def parse_query(text: str, *, allow_reserved: bool = False) -> Query:
    """Parse a negation-free DNF query such as ``"a2 & a3 | b1"``."""
    disjuncts = _parse(text, allow_negation=False, allow_reserved=allow_reserved)
    return Query(tuple(frozenset(t for t, _ in d) for d in disjuncts))


def parse_neg_query(text: str, *, allow_reserved: bool = False) -> NegQuery:
    """Parse a DNF query that may contain ``!t`` literals.

    A disjunct holding both ``t`` and ``!t`` is kept (it denotes the empty
    set) and reported with a :class:`ContradictionWarning`.
    """
    raw = _parse(text, allow_negation=True, allow_reserved=allow_reserved)
    seen = []
    for d in raw:
        d = frozenset(d)
        if d not in seen:
            seen.append(d)
    q = NegQuery(tuple(seen))
    for i in q.contradictory:
        warnings.warn(f"disjunct {i} of {text!r} is contradictory", ContradictionWarning, stacklevel=2)
    return q


def qualify_query(q: Query, peer: str) -> Query:
    """Qualify the bare terms of ``q`` with ``peer``; qualified terms pass through."""
    return Query(tuple(frozenset(t if SEPARATOR in t else qualify(peer, t) for t in d) for d in q.disjuncts))


# -- files -------------------------------------------------------------------


def _expect(cond, path, message):
    if not cond:
        raise SchemaViolation(path, message)


def _string_list(value, path):
    _expect(isinstance(value, list), path, "expected a list of strings")
    for i, v in enumerate(value):
        _expect(isinstance(v, str), f"{path}[{i}]", "expected a string")
    return value


def _raw_edge(raw, path):
    """An edge from the file as ``(lhs_text, rhs_text)``."""
    _expect(isinstance(raw, dict), path, "expected an object with 'tail' and 'head'")
    _expect(set(raw) <= {"tail", "head"}, path, f"unexpected keys {sorted(set(raw) - {'tail', 'head'})}")
    _expect("tail" in raw and "head" in raw, path, "missing 'tail' or 'head'")
    tail, head = raw["tail"], raw["head"]
    if isinstance(tail, list):
        _expect(tail, f"{path}.tail", "empty tail")
        lhs = " & ".join(_string_list(tail, f"{path}.tail"))
    else:
        _expect(isinstance(tail, str), f"{path}.tail", "expected a list or a query string")
        lhs = tail
    _expect(isinstance(head, str), f"{path}.head", "expected a string")
    return lhs, head


def _peer_from_raw(raw, path, qualified: bool):
    from .validation import validate_relations

    _expect(isinstance(raw, dict), path, "expected an object")
    allowed = {"id", "terms", "edges", "interp", "articulations"}
    _expect(set(raw) <= allowed, path, f"unexpected keys {sorted(set(raw) - allowed)}")
    _expect(isinstance(raw.get("id"), str) and raw["id"], f"{path}.id", "expected a non-empty string")
    pid = raw["id"]
    terms = _string_list(raw.get("terms", []), f"{path}.terms")
    _expect(len(set(terms)) == len(terms), f"{path}.terms", "duplicate terms")
    edges = [_raw_edge(e, f"{path}.edges[{i}]") for i, e in enumerate(raw.get("edges", []))]
    arts = [_raw_edge(e, f"{path}.articulations[{i}]") for i, e in enumerate(raw.get("articulations", []))]
    interp = raw.get("interp", {})
    _expect(isinstance(interp, dict), f"{path}.interp", "expected an object")
    for t, objs in interp.items():
        _string_list(objs, f"{path}.interp.{t}")

    violations = validate_relations(terms, edges, interp=interp)
    violations += validate_relations(terms, arts, foreign_tails=True)
    errors = [v for v in violations if v.fatal]
    if errors:
        raise ValidationFailed(errors)

    def q(t):
        return qualify(pid, t) if qualified else t

    local = simplify((parse_query(lhs), parse_query(rhs)) for lhs, rhs in edges)
    local = {Hyperedge(frozenset(map(q, e.tail)), q(e.head)) for e in local}
    art_edges = simplify((parse_query(lhs), parse_query(rhs)) for lhs, rhs in arts)
    art_edges = {Hyperedge(e.tail, q(e.head)) for e in art_edges}
    tax = Taxonomy(frozenset(map(q, terms)), frozenset(local))
    src = Source(tax, {q(t): frozenset(o) for t, o in interp.items()})
    return pid, src, frozenset(art_edges)


def network_from_dict(doc) -> Network:
    _expect(isinstance(doc, dict), "$", "expected an object")
    _expect(set(doc) <= {"peers", "universe"}, "$", f"unexpected keys {sorted(set(doc) - {'peers', 'universe'})}")
    _expect(isinstance(doc.get("peers"), list) and doc["peers"], "$.peers", "expected a non-empty list")
    ids = set()
    peers = []
    for i, raw in enumerate(doc["peers"]):
        path = f"$.peers[{i}]"
        pid, src, arts = _peer_from_raw(raw, path, qualified=True)
        _expect(pid not in ids, f"{path}.id", f"duplicate peer id {pid!r}")
        ids.add(pid)
        peers.append((path, pid, src, arts))
    all_terms = set().union(*(src.terms for _, _, src, _ in peers))
    for path, pid, src, arts in peers:
        for a in sorted_edges(arts):
            for t in sorted(a.tail):
                if t not in all_terms:
                    raise DanglingForeignTerm(f"{path}.articulations", f"foreign term {t!r} does not exist")
    universe = doc.get("universe")
    if universe is not None:
        universe = frozenset(_string_list(universe, "$.universe"))
    try:
        return Network(tuple(ArticulatedSource(pid, src, arts) for _, pid, src, arts in peers), universe)
    except (InvalidNetwork, UnknownTerm) as exc:
        raise SchemaViolation("$.peers", str(exc)) from exc


def loads_network(text: str) -> Network:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("$", f"invalid JSON: {exc}") from exc
    return network_from_dict(doc)


def load_network(path) -> Network:
    return loads_network(Path(path).read_text(encoding="utf-8"))


def load_source(path) -> Source:
    """Load a file as one source.

    A single peer without articulations keeps its bare term names; anything
    else is flattened into the network source (qualified names).
    """
    from .model import flatten

    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    peers = doc.get("peers") if isinstance(doc, dict) else None
    if isinstance(peers, list) and len(peers) == 1 and not peers[0].get("articulations"):
        _, src, _ = _peer_from_raw(peers[0], "$.peers[0]", qualified=False)
        return src
    return flatten(network_from_dict(doc))


def _local(term, pid):
    peer, name = split_term(term)
    return name if peer == pid else term


def _edges_out(edges, pid):
    return [
        {"tail": sorted(_local(t, pid) for t in e.tail), "head": _local(e.head, pid)}
        for e in sorted(edges, key=lambda e: (_local(e.head, pid), sorted(_local(t, pid) for t in e.tail)))
    ]


def network_to_dict(network: Network) -> dict:
    peers = []
    for p in network.peers:
        pid = p.peer_id
        entry = {"id": pid, "terms": sorted(_local(t, pid) for t in p.terms)}
        if p.source.edges:
            entry["edges"] = _edges_out(p.source.edges, pid)
        if p.source.interp:
            entry["interp"] = {_local(t, pid): sorted(o) for t, o in p.source.interp.items()}
        if p.articulations:
            entry["articulations"] = _edges_out(p.articulations, pid)
        peers.append(entry)
    doc = {"peers": peers}
    if network.universe is not None:
        doc["universe"] = sorted(network.universe)
    return doc


def dump_network(network: Network) -> str:
    """Canonical JSON text: sorted keys, sorted sets, empty parts omitted."""
    return json.dumps(network_to_dict(network), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def dump_source(source: Source, peer_id: str = "S") -> str:
    """Serialize a bare-named source as a single-peer file."""
    entry = {"id": peer_id, "terms": sorted(source.terms)}
    if source.edges:
        entry["edges"] = [{"tail": sorted(e.tail), "head": e.head} for e in sorted_edges(source.edges)]
    if source.interp:
        entry["interp"] = {t: sorted(o) for t, o in source.interp.items()}
    return json.dumps({"peers": [entry]}, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def canonicalize(text: str) -> str:
    return dump_network(loads_network(text))
