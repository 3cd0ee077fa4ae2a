"""Walk through a conjunctive query on the three-peer example network.

Prints every delivered message, then the answer and message counts, and
compares the result with the centralized evaluators.
"""

from taxonet import Query, Simulator, answer, datalog_answer, flatten
from taxonet.fixtures import nstar_network


def main():
    interp = {"b3": {"1"}, "a3": {"1", "2"}, "c2": {"2"}}
    net = nstar_network(interp)
    q = Query.of(["Pa:a2", "Pa:a3"])
    print(f"query {q} at Pa, stored objects {interp}\n")
    sim = Simulator(net, trace=print)
    result, stats = sim.query("Pa", q)
    print(f"\nanswer: {sorted(result)}")
    print(stats.summary())
    flat = flatten(net)
    print(f"centralized: {sorted(answer(flat, q))}, datalog: {sorted(datalog_answer(flat, q))}")


if __name__ == "__main__":
    main()
