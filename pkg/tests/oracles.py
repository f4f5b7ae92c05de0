"""Independent oracles used by the test suite.

These deliberately re-derive behavior from first principles (derivatives,
bounded language sets, outer-negation semantics, a literal reading of the
grouping rule) so they share no code path with the implementations they
check.
"""

from __future__ import annotations

from equix.dtd import (ANY, EMPTY, EMPTY_SYM, PCDATA, Choice, ContentDef,
                       ElementRef, Opt, Plus, Seq, Star)
from equix.query import AbstractQuery, ConcreteQueryNode, eval_matcher
from equix.xmlmodel import Document, NodeId


# ---------------------------------------------------------------------------
# Brzozowski derivatives over content models (EMPTY_SYM and EMPTY read as
# the empty string).


def nullable(cd: ContentDef) -> bool:
    if cd in (EMPTY, EMPTY_SYM, PCDATA, ANY):
        return True
    if isinstance(cd, ElementRef):
        return False
    if isinstance(cd, Seq):
        return all(nullable(i) for i in cd.items)
    if isinstance(cd, Choice):
        return any(nullable(i) for i in cd.items)
    if isinstance(cd, (Opt, Star)):
        return True
    if isinstance(cd, Plus):
        return nullable(cd.item)
    raise TypeError(cd)


# The empty language: an element name no document can carry.
_FAIL = ElementRef("\u0000impossible")


def derivative(cd: ContentDef, symbol: str) -> ContentDef:
    if cd in (EMPTY, EMPTY_SYM, PCDATA):
        return _FAIL
    if cd == ANY:
        return ANY
    if isinstance(cd, ElementRef):
        return EMPTY_SYM if cd.name == symbol else _FAIL
    if isinstance(cd, Seq):
        first, rest = cd.items[0], cd.items[1:]
        tail: ContentDef = rest[0] if len(rest) == 1 else (Seq(rest) if rest else EMPTY_SYM)
        with_first = Seq((derivative(first, symbol), tail)) if rest else derivative(first, symbol)
        if nullable(first) and rest:
            return Choice((with_first, derivative(tail, symbol)))
        return with_first
    if isinstance(cd, Choice):
        return Choice(tuple(derivative(i, symbol) for i in cd.items))
    if isinstance(cd, Opt):
        return derivative(cd.item, symbol)
    if isinstance(cd, Star):
        return Seq((derivative(cd.item, symbol), cd))
    if isinstance(cd, Plus):
        return Seq((derivative(cd.item, symbol), Star(cd.item)))
    raise TypeError(cd)


def derivative_matches(cd: ContentDef, labels: tuple[str, ...]) -> bool:
    cur = cd
    for symbol in labels:
        cur = derivative(cur, symbol)
    return nullable(cur)


from functools import lru_cache


@lru_cache(maxsize=200_000)
def bounded_language(cd: ContentDef, max_len: int) -> frozenset[tuple[str, ...]]:
    """All words of the content model's language up to max_len, computed by
    set composition (EMPTY_SYM and EMPTY read as the empty string)."""
    eps = frozenset({()})

    def concat(a: frozenset, b: frozenset) -> frozenset:
        return frozenset(x + y for x in a for y in b if len(x) + len(y) <= max_len)

    if cd in (EMPTY, EMPTY_SYM, PCDATA):
        return eps
    if isinstance(cd, ElementRef):
        return frozenset({(cd.name,)}) if max_len >= 1 else frozenset()
    if isinstance(cd, Seq):
        out = eps
        for item in cd.items:
            out = concat(out, bounded_language(item, max_len))
        return out
    if isinstance(cd, Choice):
        out: frozenset = frozenset()
        for item in cd.items:
            out |= bounded_language(item, max_len)
        return out
    if isinstance(cd, Opt):
        return bounded_language(cd.item, max_len) | eps
    if isinstance(cd, (Star, Plus)):
        base = bounded_language(cd.item, max_len)
        out = base
        while True:
            grown = out | concat(out, base)
            if grown == out:
                break
            out = grown
        return out | eps if isinstance(cd, Star) else out
    raise TypeError(cd)


# ---------------------------------------------------------------------------
# Concrete-query semantics with quantifier negation applied outermost.


def concrete_satisfies(doc: Document, cq: ConcreteQueryNode) -> bool:
    """Does the document satisfy the concrete query, reading not_exists /
    not_forall as the outer negation of the positive quantifier?"""

    def targets(n_x: NodeId, label: str) -> list[NodeId]:
        return [c for c in doc.children(n_x)
                if not doc.nodes[c].atomic and doc.nodes[c].label == label]

    def holds(node: ConcreteQueryNode, n_x: NodeId) -> bool:
        if not eval_matcher(node.matcher, doc.textual_content(n_x)):
            return False
        for child in node.children:
            sub = [holds(child, c) for c in targets(n_x, child.label)]
            q = child.quantifier or "exists"
            ok = {
                "exists": any(sub),
                "forall": all(sub),
                "not_exists": not any(sub),
                "not_forall": not all(sub),
            }[q]
            if not ok:
                return False
        return True

    return doc.nodes[doc.root].label == cq.label and holds(cq, doc.root)


# ---------------------------------------------------------------------------
# Grouping rule, read literally off its definition.


def grouping_node_direct(q: AbstractQuery, n_q: int) -> int:
    """Lowest node strictly above n_q that is projected or an ancestor of a
    projected node, scanning all nodes and maximizing depth."""
    above = set(q.ancestors(n_q))
    qualifying = []
    for cand in above:
        if cand in q.output:
            qualifying.append(cand)
            continue
        for o in q.output:
            if cand in q.ancestors(o):
                qualifying.append(cand)
                break
    if not qualifying:
        return q.root
    return max(qualifying, key=lambda c: q.depths[c])
