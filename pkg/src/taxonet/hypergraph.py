"""Directed B-graphs and the membership decision procedure.

An object ``o`` is in the answer of ``t`` iff ``t`` is B-connected to the
``TRUE`` vertex in the object graph of ``o``: the taxonomy B-graph plus an
edge ``({TRUE}, u)`` for every term ``u`` indexing ``o``. B-connectivity is
computed by forward marking (unit propagation on Horn clauses) in time linear
in the total size of the hyperedges.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property

from .model import Hyperedge, Source, Taxonomy, UnknownTerm, index_of, sorted_edges

TRUE = "__true"


@dataclass(frozen=True)
class BGraph:
    vertices: frozenset[str]
    edges: tuple[Hyperedge, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", frozenset(self.vertices) | {TRUE})
        object.__setattr__(self, "edges", tuple(sorted_edges(set(self.edges))))
        for e in self.edges:
            if e.head == TRUE:
                raise ValueError("TRUE cannot be the head of a hyperedge")
            for v in (*e.tail, e.head):
                if v not in self.vertices:
                    raise UnknownTerm(v, "B-graph")

    @cached_property
    def _by_tail_vertex(self) -> dict[str, list[int]]:
        index: dict[str, list[int]] = {}
        for i, e in enumerate(self.edges):
            for v in e.tail:
                index.setdefault(v, []).append(i)
        return index

    def out_edges(self, vertex: str) -> list[int]:
        """Indices of the hyperedges having ``vertex`` in their tail."""
        return self._by_tail_vertex.get(vertex, [])


def build_bgraph(taxonomy: Taxonomy) -> BGraph:
    return BGraph(taxonomy.terms, tuple(taxonomy.edges))


def object_graph(source: Source, obj: str) -> BGraph:
    extra = [Hyperedge(frozenset([TRUE]), u) for u in index_of(source, obj)]
    return BGraph(source.terms, tuple(source.edges) + tuple(extra))


def marked_vertices(g: BGraph, counter: dict | None = None) -> frozenset[str]:
    """Every vertex B-connected to ``TRUE``.

    Each hyperedge keeps a count of unmarked tail vertices; it fires when the
    count reaches zero. ``counter['ops']`` accumulates the number of
    tail-vertex decrements plus edge firings.
    """
    remaining = [len(e.tail) for e in g.edges]
    marked = {TRUE}
    queue = deque([TRUE])
    ops = 0
    while queue:
        v = queue.popleft()
        for i in g.out_edges(v):
            remaining[i] -= 1
            ops += 1
            if remaining[i] == 0:
                ops += 1
                h = g.edges[i].head
                if h not in marked:
                    marked.add(h)
                    queue.append(h)
    if counter is not None:
        counter["ops"] = counter.get("ops", 0) + ops
    return frozenset(marked)


def b_connected(g: BGraph, target: str, counter: dict | None = None) -> bool:
    if target not in g.vertices:
        raise UnknownTerm(target, "B-graph")
    if target == TRUE:
        return True
    return target in marked_vertices(g, counter)


def decide(source: Source, term: str, obj: str) -> bool:
    """Is ``obj`` in the answer of the term query ``term``?"""
    source.require(term)
    return b_connected(object_graph(source, obj), term)


def to_dot(g: BGraph, name: str = "bgraph") -> str:
    """Graphviz rendering; multi-tail hyperedges go through a junction node."""
    lines = [f"digraph {name} {{", "  rankdir=BT;"]
    for v in sorted(g.vertices):
        shape = "doublecircle" if v == TRUE else "ellipse"
        lines.append(f'  "{v}" [shape={shape}];')
    for i, e in enumerate(g.edges):
        if len(e.tail) == 1:
            (u,) = e.tail
            lines.append(f'  "{u}" -> "{e.head}";')
        else:
            j = f"_j{i}"
            lines.append(f'  "{j}" [shape=point];')
            for u in sorted(e.tail):
                lines.append(f'  "{u}" -> "{j}" [arrowhead=none];')
            lines.append(f'  "{j}" -> "{e.head}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
