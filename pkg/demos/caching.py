"""Repeat the same queries under each cache mode and watch the ask counts drop."""

from taxonet import Query, Simulator
from taxonet.fixtures import nstar_network

QUERIES = [("Pa", "Pa:a2"), ("Pa", "Pa:a2 & Pa:a3"), ("Pb", "Pb:b1")]


def main():
    net = nstar_network()
    for mode in ("none", "local", "push", "push-ext", "heads"):
        sim = Simulator(net, cache=mode)
        row = []
        for _ in range(2):
            for peer, text in QUERIES:
                terms = [t.strip() for t in text.split("&")]
                _, stats = sim.query(peer, Query.of(terms))
                row.append(stats.asks)
        print(f"{mode:>9}: first pass asks {row[:3]}, second pass asks {row[3:]}")


if __name__ == "__main__":
    main()
