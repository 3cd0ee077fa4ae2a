"""Command-line interface.

Exit status: 0 on success, 1 when a check or validation fails, 2 on usage
errors (bad arguments, unreadable files, malformed queries, unknown terms).
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from pathlib import Path

from . import cache as _cache
from .datalog import datalog_answer
from .evaluation import answer, extended_answer, minimal_model, qe
from .gen import Limits, gen_chain, gen_hitting, gen_random, parse_collection, random_query
from .model import Query, TaxonomyError, UnknownTerm, flatten
from .net import Diverged, Simulator
from .parser import (
    ParseError,
    SchemaViolation,
    ValidationFailed,
    dump_network,
    dump_source,
    load_network,
    load_source,
    parse_neg_query,
    parse_query,
    qualify_query,
)
from .validation import validate_relations

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def fmt(objs) -> str:
    return " ".join(sorted(objs))


def _seed(args):
    env = os.environ.get("TAXONET_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"TAXONET_SEED must be an integer, got {env!r}") from None
    return args.seed


def _read(path):
    if not Path(path).is_file():
        raise UsageError(f"no such file: {path}")


# -- subcommands ---------------------------------------------------------------


def cmd_validate(args, out):
    _read(args.file)
    try:
        doc = json.loads(Path(args.file).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        print(f"SyntaxError: invalid JSON: {exc}", file=sys.stderr)
        return EXIT_FAIL
    try:
        from .parser import network_from_dict

        net = network_from_dict(doc)
    except ValidationFailed as exc:
        for v in exc.violations:
            print(v, file=out)
        return EXIT_FAIL
    except SchemaViolation as exc:
        print(f"SchemaViolation: {exc}", file=out)
        return EXIT_FAIL
    warnings = []
    for raw in doc["peers"]:
        rels = [(e["tail"] if isinstance(e["tail"], str) else " & ".join(e["tail"]), e["head"])
                for e in raw.get("edges", [])]
        warnings += [v for v in validate_relations(raw.get("terms", []), rels) if not v.fatal]
    for v in warnings:
        print(f"warning: {v}", file=out)
    n_edges = sum(len(p.all_edges) for p in net.peers)
    print(f"OK: {len(net.peers)} peer(s), {len(net.terms)} terms, {n_edges} hyperedges", file=out)
    return EXIT_OK


def cmd_eval(args, out):
    _read(args.file)
    source = load_source(args.file)
    universe = frozenset(x for x in args.universe.split(",") if x) if args.universe else None
    if args.neg or "!" in args.query:
        q = parse_neg_query(args.query)
        doc = json.loads(Path(args.file).read_text(encoding="utf-8"))
        peers = doc.get("peers", [])
        if len(peers) > 1 or any(p.get("articulations") for p in peers):
            # objects of a network are not enumerable; the universe must be given
            if universe is None and doc.get("universe") is not None:
                universe = frozenset(doc["universe"])
            if universe is None:
                raise UsageError("negation over a network needs --universe or a 'universe' entry in the file")
        result = extended_answer(source, q, universe)
    else:
        result = answer(source, parse_query(args.query))
    print(fmt(result), file=out)
    return EXIT_OK


def _simulator(net, args, trace_out=None):
    seed = _seed(args)
    return Simulator(
        net,
        cache=args.cache,
        scheduler="fifo" if seed is None else "random",
        seed=seed,
        budget=args.budget,
        capacity=args.cache_capacity,
        trace=(lambda line: print(line, file=trace_out)) if trace_out is not None else None,
    )


def cmd_netsim(args, out):
    _read(args.file)
    net = load_network(args.file)
    if args.peer not in net.peer_ids:
        raise UsageError(f"no peer {args.peer!r} in {args.file}")
    q = qualify_query(parse_query(args.query), args.peer)
    sim = _simulator(net, args, out if args.trace else None)
    for _ in range(args.repeat):
        result, stats = sim.query(args.peer, q)
        print(fmt(result), file=out)
        print(stats.summary(), file=out)
    return EXIT_OK


def _triangle(net, term, sim_factory):
    """Every evaluator's answer for ``term``; the first is the reference."""
    flat = flatten(net)
    got = {
        "qe": qe(flat, term),
        "minimal_model": minimal_model(flat)[term],
        "datalog": datalog_answer(flat, Query.of(term)),
    }
    sim = sim_factory()
    got["netsim"] = sim.query(net.owner(term), Query.of(term))[0]
    return got


def cmd_check(args, out):
    _read(args.file)
    net = load_network(args.file)
    failures = 0
    if args.random is None:
        # exhaustive: every term at its owning peer
        for term in sorted(net.terms):
            got = _triangle(net, term, lambda: _simulator(net, args))
            ref = got["qe"]
            bad = {k: v for k, v in got.items() if v != ref}
            if bad:
                failures += 1
                for k, v in bad.items():
                    print(f"FAIL {term} {k}: expected {{{fmt(ref)}}} got {{{fmt(v)}}} ({args.file})", file=out)
            else:
                print(f"PASS {term} {{{fmt(ref)}}}", file=out)
    else:
        seed = _seed(args) or 0
        rng = random.Random(seed)
        flat = flatten(net)
        for i in range(args.random):
            peer = rng.choice(net.peers)
            q = random_query(rng, peer.terms)
            expected = answer(flat, q)
            sim = Simulator(net, cache=args.cache, scheduler="random", seed=rng.randrange(2**32),
                            budget=args.budget, capacity=args.cache_capacity)
            got = sim.query(peer.peer_id, q)[0]
            if got != expected:
                failures += 1
                print(f"FAIL {peer.peer_id} {q}: expected {{{fmt(expected)}}} got {{{fmt(got)}}} ({args.file})",
                      file=out)
            else:
                print(f"PASS {peer.peer_id} {q} {{{fmt(got)}}}", file=out)
    return EXIT_FAIL if failures else EXIT_OK


def _write(text, args, out):
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        out.write(text)


def cmd_gen(args, out):
    if args.kind == "hitting":
        sets = parse_collection(args.sets)
        if not sets:
            raise UsageError("--sets needs at least one set")
        source, _ = gen_hitting(sets)
        _write(dump_source(source), args, out)
    elif args.kind == "chain":
        if args.k < 1:
            raise UsageError("--k must be at least 1")
        source, _ = gen_chain(args.k)
        _write(dump_source(source), args, out)
    else:
        limits = Limits(args.peers, args.terms, args.edges, args.tail, args.objects)
        seed = _seed(args)
        _write(dump_network(gen_random(0 if seed is None else seed, limits)), args, out)
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------------


def _sim_options(p):
    p.add_argument("--cache", default="none", choices=("none",) + _cache.CACHE_MODES)
    p.add_argument("--cache-capacity", type=int, default=None, metavar="N")
    p.add_argument("--seed", type=int, default=None, help="use the seeded random scheduler")
    p.add_argument("--budget", type=int, default=10**6, help="message budget per run")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="taxonet", description="Taxonomy-based sources and peer networks.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a network file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("eval", help="centralized evaluation")
    p.add_argument("file")
    p.add_argument("-q", "--query", required=True)
    p.add_argument("--neg", action="store_true", help="closed-world negation")
    p.add_argument("--universe", default=None, help="comma-separated objects for negation")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("netsim", help="distributed evaluation on the simulated network")
    p.add_argument("file")
    p.add_argument("--peer", required=True)
    p.add_argument("-q", "--query", required=True)
    p.add_argument("--trace", action="store_true", help="print one line per delivered message")
    p.add_argument("--repeat", type=int, default=1, help="run the query this many times")
    _sim_options(p)
    p.set_defaults(func=cmd_netsim)

    p = sub.add_parser("check", help="compare every evaluator against each other")
    p.add_argument("file")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exhaustive", action="store_true", help="every term at its owner (default)")
    mode.add_argument("--random", type=int, default=None, metavar="N", help="N random queries")
    _sim_options(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gen", help="generate instances")
    gsub = p.add_subparsers(dest="kind", required=True)
    g = gsub.add_parser("hitting")
    g.add_argument("--sets", required=True, help='e.g. "a,b;b,c,d;b,c,e,f"')
    g = gsub.add_parser("chain")
    g.add_argument("--k", type=int, required=True)
    g = gsub.add_parser("random")
    g.add_argument("--seed", type=int, default=None)
    d = Limits()
    g.add_argument("--peers", type=int, default=d.peers)
    g.add_argument("--terms", type=int, default=d.terms)
    g.add_argument("--edges", type=int, default=d.edges)
    g.add_argument("--tail", type=int, default=d.tail)
    g.add_argument("--objects", type=int, default=d.objects)
    for g in gsub.choices.values():
        g.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_gen)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args, out)
    except (UsageError, ParseError, UnknownTerm, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationFailed, SchemaViolation, TaxonomyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except Diverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main_exit() -> None:
    raise SystemExit(main())
