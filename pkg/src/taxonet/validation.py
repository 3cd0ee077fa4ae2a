"""Static checks on raw (unparsed) taxonomies.

Only negation-free taxonomies whose right-hand sides are conjunctions have a
unique minimal model; anything richer is rejected here rather than evaluated.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .model import SEPARATOR, check_name, split_term
from .parser import ParseError, parse_neg_query

logger = logging.getLogger(__name__)

NEGATION = "NegationInTaxonomy"
DISJUNCTIVE_HEAD = "DisjunctiveHead"
RESERVED_NAME = "ReservedName"
BAD_NAME = "BadTermName"
HEAD_IN_TAIL = "HeadInTail"
UNKNOWN_TERM = "UnknownTerm"
SYNTAX = "SyntaxError"
FOREIGN_TERM = "ForeignTermExpected"


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str
    fatal: bool = True

    def __str__(self):
        return f"{self.kind}: {self.detail}"


def _parse_side(text, where, out):
    try:
        return parse_neg_query(text, allow_reserved=True)
    except ParseError as exc:
        out.append(Violation(SYNTAX, f"{where} {text!r}: {exc}"))
        return None


def validate_relations(terms, relations, *, interp=None, foreign_tails=False) -> list[Violation]:
    """Check ``relations`` (pairs of query strings ``lhs <= rhs``) over ``terms``.

    Never raises. Edges whose head also occurs in the tail are reported as a
    non-fatal violation; the loader drops them.
    """
    out: list[Violation] = []
    termset = set(terms)
    for t in terms:
        reason = check_name(t)
        if reason:
            kind = RESERVED_NAME if t.startswith("__") else BAD_NAME
            out.append(Violation(kind, reason))

    for lhs_text, rhs_text in relations:
        label = f"{lhs_text} <= {rhs_text}"
        lhs = _parse_side(lhs_text, "left side", out)
        rhs = _parse_side(rhs_text, "right side", out)
        if lhs is None or rhs is None:
            continue
        if lhs.has_negation or rhs.has_negation:
            out.append(Violation(NEGATION, f"negated literal in {label}"))
        if len(rhs.disjuncts) > 1:
            out.append(Violation(DISJUNCTIVE_HEAD, f"disjunction on the right of {label}"))
        for t in sorted(lhs.terms):
            if foreign_tails:
                peer, name = split_term(t)
                if SEPARATOR not in t or t in termset:
                    out.append(Violation(FOREIGN_TERM, f"articulation tail term {t!r} must be a qualified foreign term"))
                elif name.startswith("__"):
                    out.append(Violation(RESERVED_NAME, f"{t!r} uses the reserved prefix"))
            elif t not in termset:
                out.append(Violation(UNKNOWN_TERM, f"{t!r} in {label}"))
        for t in sorted(rhs.terms):
            if t not in termset:
                out.append(Violation(UNKNOWN_TERM, f"{t!r} in {label}"))
        if len(rhs.disjuncts) == 1:
            heads = {t for t, _ in rhs.disjuncts[0]}
            for d in lhs.disjuncts:
                tail = {t for t, _ in d}
                for h in sorted(heads & tail):
                    if len(tail) > 1:
                        logger.warning("dropping %s: head %s occurs in its tail", label, h)
                        out.append(Violation(HEAD_IN_TAIL, f"{h!r} in {label}", fatal=False))

    for t in sorted(interp or {}):
        if t not in termset:
            out.append(Violation(UNKNOWN_TERM, f"{t!r} in interpretation"))
    return out


def validate(raw) -> list[Violation]:
    """Validate a raw taxonomy.

    ``raw`` is a mapping with ``terms`` and ``edges``; each edge is either a
    ``(lhs, rhs)`` pair of query strings or a ``{"tail": ..., "head": ...}``
    object as in the file format. Returns an empty list when the taxonomy is
    acceptable.
    """
    relations = []
    for e in raw.get("edges", []):
        if isinstance(e, dict):
            tail = e["tail"]
            relations.append((tail if isinstance(tail, str) else " & ".join(tail), e["head"]))
        else:
            relations.append(tuple(e))
    return validate_relations(raw.get("terms", []), relations, interp=raw.get("interp"))
