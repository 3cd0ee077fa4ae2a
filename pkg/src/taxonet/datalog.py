"""Translation of sources and queries into (stratified) datalog, and a naive
bottom-up evaluator used as an oracle.

Every term ``t`` gets an extensional predicate ``C_t`` (its stored objects)
and an intensional one ``Y_t``. The source program is

* terminological rules ``Y_t(X) :- Y_t1(X), ..., Y_tm(X)`` for each edge,
* extensional rules ``Y_t(X) :- C_t(X)`` for each term,
* facts ``C_t(o)`` for each stored object,

and a query adds one ``q(X)`` rule per disjunct. Negated literals become
``not Y_t(X)``; such rules are guarded by ``Obj(X)`` facts for the universe
so every rule stays range-restricted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import Query, Source
from .parser import NegQuery

VAR = "X"
QUERY_PRED = "q"
DOMAIN_PRED = "Obj"


class Unstratifiable(Exception):
    pass


@dataclass(frozen=True)
class Atom:
    pred: str
    arg: str = VAR

    def __str__(self):
        return f"{self.pred}({self.arg})"


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: tuple[tuple[Atom, bool], ...]

    def __str__(self):
        lits = ", ".join(str(a) if pos else f"not {a}" for a, pos in self.body)
        return f"{self.head} :- {lits}."


@dataclass
class DatalogProgram:
    rules: list[Rule] = field(default_factory=list)
    facts: set[Atom] = field(default_factory=set)
    query_rules: list[Rule] = field(default_factory=list)

    def all_rules(self) -> list[Rule]:
        return self.rules + self.query_rules

    def __str__(self):
        lines = [f"{f}." for f in sorted(self.facts, key=str)]
        lines += [str(r) for r in self.all_rules()]
        return "\n".join(lines) + "\n"


def Y(t):
    return f"Y_{t}"


def C(t):
    return f"C_{t}"


def to_datalog(source: Source, q: Query | NegQuery | None = None, universe=None) -> DatalogProgram:
    prog = DatalogProgram()
    for e in sorted(source.edges, key=lambda e: e.sort_key):
        prog.rules.append(Rule(Atom(Y(e.head)), tuple((Atom(Y(u)), True) for u in sorted(e.tail))))
    for t in sorted(source.terms):
        prog.rules.append(Rule(Atom(Y(t)), ((Atom(C(t)), True),)))
    for t, objs in source.interp.items():
        prog.facts |= {Atom(C(t), o) for o in objs}
    if q is None:
        return prog

    if isinstance(q, Query):
        disjuncts = [tuple((t, True) for t in sorted(d)) for d in q.disjuncts]
    else:
        disjuncts = [tuple(sorted(d)) for d in q.disjuncts]
    negated = any(not p for d in disjuncts for _, p in d)
    if negated:
        universe = source.objects if universe is None else universe
        prog.facts |= {Atom(DOMAIN_PRED, o) for o in universe}
    for d in disjuncts:
        body = tuple((Atom(Y(t)), p) for t, p in d)
        if any(not p for _, p in d):
            body = ((Atom(DOMAIN_PRED), True),) + body
        prog.query_rules.append(Rule(Atom(QUERY_PRED), body))
    return prog


def stratify(rules: list[Rule]) -> list[list[Rule]]:
    """Group rules by stratum; negated body predicates must be strictly lower."""
    preds = {r.head.pred for r in rules} | {a.pred for r in rules for a, _ in r.body}
    level = dict.fromkeys(preds, 0)
    bound = len(preds)
    changed = True
    while changed:
        changed = False
        for r in rules:
            for a, pos in r.body:
                need = level[a.pred] + (0 if pos else 1)
                if level[r.head.pred] < need:
                    level[r.head.pred] = need
                    if need > bound:
                        raise Unstratifiable(f"negative cycle through {r.head.pred}")
                    changed = True
    strata: dict[int, list[Rule]] = {}
    for r in rules:
        strata.setdefault(level[r.head.pred], []).append(r)
    return [strata[k] for k in sorted(strata)]


def _fire(rule: Rule, rel: dict[str, set[str]]) -> set[str]:
    pos = [a for a, p in rule.body if p]
    neg = [a for a, p in rule.body if not p]
    if not pos:
        raise Unstratifiable(f"rule {rule} is not range-restricted")
    # every atom here is unary over the single variable X
    it = iter(pos)
    cands = set(rel.get(next(it).pred, ()))
    for a in it:
        cands &= rel.get(a.pred, set())
    for a in neg:
        cands -= rel.get(a.pred, set())
    return cands


def naive_eval(prog: DatalogProgram) -> set[Atom]:
    """All ground atoms of the perfect model, computed stratum by stratum."""
    rel: dict[str, set[str]] = {}
    for f in prog.facts:
        rel.setdefault(f.pred, set()).add(f.arg)
    for stratum in stratify(prog.all_rules()):
        changed = True
        while changed:
            changed = False
            for r in stratum:
                new = _fire(r, rel) - rel.get(r.head.pred, set())
                if new:
                    rel.setdefault(r.head.pred, set()).update(new)
                    changed = True
    return {Atom(p, o) for p, objs in rel.items() for o in objs}


def query_answers(atoms: set[Atom]) -> frozenset[str]:
    return frozenset(a.arg for a in atoms if a.pred == QUERY_PRED)


def datalog_answer(source: Source, q, universe=None) -> frozenset[str]:
    return query_answers(naive_eval(to_datalog(source, q, universe)))
