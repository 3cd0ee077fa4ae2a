"""Small worked examples shipped with the package.

``nstar_network`` is a three-peer network whose flattened taxonomy is
``fig2_source``; ``data_path`` locates the bundled JSON files.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .model import Network, Source, make_peer

NSTAR_INTERP = {"c1": {"o1"}, "c2": {"o2"}, "c3": {"o3"}, "b3": {"o4"}}

# bare-name edges of the flattened taxonomy, as (tail, head)
FIG2_EDGES = [
    (["a2"], "a1"),
    (["a3"], "a1"),
    (["b1", "b2"], "a2"),
    (["b3"], "a2"),
    (["c1"], "b1"),
    (["c2"], "b1"),
    (["c2", "c3"], "b2"),
    (["b1", "b3"], "c2"),
]


def data_path(name: str) -> Path:
    return Path(str(resources.files("taxonet") / "data" / name))


def fig2_source(interp=None) -> Source:
    interp = NSTAR_INTERP if interp is None else interp
    terms = [f"{p}{i}" for p in "abc" for i in (1, 2, 3)]
    return Source.build(FIG2_EDGES, interp, terms)


def nstar_network(interp=None) -> Network:
    """Peers Pa, Pb, Pc own the a-, b- and c-terms; ``interp`` uses bare names."""
    interp = NSTAR_INTERP if interp is None else interp
    peers = []
    for pid in ("Pa", "Pb", "Pc"):
        letter = pid[1]
        local, arts = [], []
        for tail, head in FIG2_EDGES:
            if head[0] != letter:
                continue
            if all(t[0] == letter for t in tail):
                local.append((tail, head))
            else:
                arts.append(([f"P{t[0]}:{t}" for t in tail], head))
        mine = {t: objs for t, objs in interp.items() if t[0] == letter}
        peers.append(make_peer(pid, [f"{letter}{i}" for i in (1, 2, 3)], local, mine, arts))
    return Network(tuple(peers))


def s2_source() -> Source:
    from .parser import load_source

    return load_source(data_path("s2.json"))
