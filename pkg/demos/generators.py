"""The hitting-set reduction, the exponential chain and a random network."""

from taxonet import CallTrace, Source, dump_network, gen_chain, gen_hitting, gen_random, minimal_model, qe


def member(source, index, term):
    s = Source.build(source.edges, {x: {"o"} for x in index}, source.terms)
    return "o" in minimal_model(s)[term]


def main():
    sets = [["a", "b"], ["b", "c", "d"], ["b", "c", "e", "f"]]
    s, t = gen_hitting(sets)
    print(f"hitting sets for {sets}:")
    for index in (["b"], ["a"], ["a", "c"], ["a", "d"]):
        print(f"  object indexed {index}: {'hits' if member(s, index, t) else 'misses'}")

    for k in range(1, 7):
        chain, ct = gen_chain(k)
        trace = CallTrace()
        qe(Source.build(chain.edges, {"u1": {"o"}, "v1": {"o"}}, chain.terms), ct, trace=trace)
        print(f"chain k={k}: {len(trace)} recursive calls (2**k = {2 ** k})")

    print("\nrandom network, seed 7:")
    print(dump_network(gen_random(7)))


if __name__ == "__main__":
    main()
