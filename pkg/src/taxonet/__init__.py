"""Taxonomy-based information sources, their query evaluation and a simulated
peer-to-peer network of such sources."""

from .cache import CACHE_MODES, CacheStore, CachingPeer, warm_heads
from .datalog import DatalogProgram, datalog_answer, naive_eval, to_datalog
from .evaluation import CallTrace, answer, extended_answer, minimal_model, qe
from .gen import Limits, gen_chain, gen_hitting, gen_random, gen_random_source
from .hypergraph import TRUE, BGraph, b_connected, build_bgraph, decide, object_graph
from .model import (
    ArticulatedSource,
    Hyperedge,
    InvalidNetwork,
    MalformedTaxonomy,
    Network,
    Query,
    Source,
    Taxonomy,
    UnknownTerm,
    embed_query,
    flatten,
    make_peer,
    simplify,
    transitive_reduction,
)
from .net import Ask, Diverged, RunStats, Simulator, Tell, compute_answer, decode, encode
from .parser import (
    NegQuery,
    ParseError,
    SchemaViolation,
    ValidationFailed,
    dump_network,
    load_network,
    load_source,
    parse_neg_query,
    parse_query,
)
from .validation import Violation, validate

__version__ = "0.1.0"
