"""Query evaluation: matching semantics, the two-pass table algorithm, and a
brute-force enumeration oracle used to verify it.

The algorithm fills a boolean table over (query node, document node) pairs
bottom-up (deepest query nodes first), then sweeps top-down clearing entries
whose parent entry is false while collecting the output set: images of
projected query nodes plus all their ancestors and descendants.  In child
mode only path-equal pairs are candidates; in descendant mode a query edge
spans one or more document levels, so candidates are label-matched nodes
with a compatible ancestor chain.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

from .query import AbstractQuery, TrueMatch, describable_by, eval_matcher
from .xmlmodel import Document, NodeId

Matching = dict[int, set[NodeId]]


@dataclass
class OutputSet:
    """The document nodes a query run emits: matched output images, their
    ancestors (restoring tree shape) and descendants (restoring text)."""

    out: frozenset[NodeId]
    anc: frozenset[NodeId]
    desc: frozenset[NodeId]

    @property
    def nodes(self) -> frozenset[NodeId]:
        return self.out | self.anc | self.desc

    def __bool__(self) -> bool:
        return bool(self.out)


EMPTY_OUTPUT = OutputSet(frozenset(), frozenset(), frozenset())


@dataclass
class MatchArray:
    """Dense boolean table rows[n_Q][n_X]; entries can only be set on the
    candidate pairs recorded alongside."""

    rows: list[bytearray]
    candidates: list[list[NodeId]]


class TextCache:
    """Per-evaluation memo of textual content, computed lazily per node.

    Documents without IDREF links compose bottom-up; with links every cached
    value is produced by the full traversal so the visited-set semantics are
    preserved (composition would double-count shared value atoms).
    """

    def __init__(self, doc: Document):
        self._doc = doc
        self._memo: dict[NodeId, str] = {}
        self._compose = not doc.idref_links

    def get(self, n: NodeId) -> str:
        memo = self._memo
        val = memo.get(n)
        if val is not None:
            return val
        doc = self._doc
        if not self._compose:
            val = doc.textual_content(n)
            memo[n] = val
            return val
        # Plain tree: join child contents, skipping empty ones (an atom
        # contributes its data, an empty subtree contributes nothing).
        order: list[NodeId] = []
        stack = [n]
        while stack:
            m = stack.pop()
            if m not in memo:
                order.append(m)
                stack.extend(doc.nodes[m].children)
        for m in reversed(order):
            node = doc.nodes[m]
            if node.atomic:
                memo[m] = node.label
            else:
                memo[m] = " ".join(p for p in (memo[c] for c in node.children) if p)
        return memo[n]


def node_matches(doc: Document, n_x: NodeId, q: AbstractQuery, n_q: int) -> bool:
    """Label equality between a complex document node and a query node."""
    node = doc.nodes[n_x]
    return not node.atomic and node.label == q.labels[n_q]


def _candidates(doc: Document, q: AbstractQuery) -> list[list[NodeId]]:
    """Path-compatible document nodes per query node.

    Child mode: path(n_X) = path(n_Q), computed incrementally (label match
    and parent is a candidate of the parent query node).  Descendant mode:
    label match and some proper ancestor is a candidate of the parent.
    """
    by_label: dict[str, list[NodeId]] = {}
    for n in doc.complex_ids():
        by_label.setdefault(doc.nodes[n].label, []).append(n)

    cands: list[list[NodeId]] = [[] for _ in range(len(q))]
    order = sorted(range(len(q)), key=lambda i: q.depths[i])
    for n_q in order:
        label = q.labels[n_q]
        if n_q == q.root:
            if doc.nodes[doc.root].label == label:
                cands[n_q] = [doc.root]
            continue
        parent_set = set(cands[q.parents[n_q]])
        if not parent_set:
            continue
        if q.mode == "child":
            cands[n_q] = [x for x in by_label.get(label, ())
                          if doc.nodes[x].parent in parent_set]
        else:
            picked = []
            for x in by_label.get(label, ()):
                a = doc.nodes[x].parent
                while a is not None:
                    if a in parent_set:
                        picked.append(x)
                        break
                    a = doc.nodes[a].parent
            cands[n_q] = picked
    return cands


def _edge_targets(doc: Document, n_x: NodeId, label: str, mode: str) -> Iterator[NodeId]:
    """Document nodes a query edge can reach from n_x: same-labeled children,
    or same-labeled proper descendants in descendant mode."""
    if mode == "child":
        for c in doc.nodes[n_x].children:
            node = doc.nodes[c]
            if not node.atomic and node.label == label:
                yield c
    else:
        stack = list(doc.nodes[n_x].children)
        while stack:
            c = stack.pop()
            node = doc.nodes[c]
            if node.atomic:
                continue
            if node.label == label:
                yield c
            stack.extend(node.children)


def matches_proc(doc: Document, q: AbstractQuery, n_q: int, n_x: NodeId,
                 array: MatchArray, text: TextCache) -> bool:
    """One table entry: can n_x belong to mu(n_q), judging by the subtrees.

    Requires the rows of all strictly deeper query nodes to be filled.
    An existential edge over an empty target set is false (empty
    disjunction); a universal edge over an empty set is vacuously true.
    """
    matcher = q.matchers[n_q]
    tc = True if isinstance(matcher, TrueMatch) else eval_matcher(matcher, text.get(n_x))
    kids = q.children[n_q]
    if not kids:
        return tc
    or_node = q.ops[n_q] == "or"
    if or_node and tc:
        return True
    if not or_node and not tc:
        return False
    for m_q in kids:
        row = array.rows[m_q]
        if q.quantifiers[m_q] == "exists":
            status = any(row[c] for c in _edge_targets(doc, n_x, q.labels[m_q], q.mode))
        else:
            status = all(row[c] for c in _edge_targets(doc, n_x, q.labels[m_q], q.mode))
        if or_node and status:
            return True
        if not or_node and not status:
            return False
    return not or_node


def evaluate_full(doc: Document, q: AbstractQuery) -> tuple[OutputSet, MatchArray]:
    """Both passes of the evaluation algorithm; returns the output set and
    the final match table (whose true entries form the retrieval matching)."""
    n = len(doc)
    cands = _candidates(doc, q)
    array = MatchArray(rows=[bytearray(n) for _ in range(len(q))], candidates=cands)
    text = TextCache(doc)

    bottom_up = sorted(range(len(q)), key=lambda i: q.depths[i], reverse=True)
    for n_q in bottom_up:
        row = array.rows[n_q]
        for n_x in cands[n_q]:
            if matches_proc(doc, q, n_q, n_x, array, text):
                row[n_x] = 1

    if not array.rows[q.root][doc.root]:
        # The top-down pass would cascade the false root entry over every
        # row; short-circuit to the same final state.
        for row in array.rows:
            row[:] = bytes(n)
        return EMPTY_OUTPUT, array

    out: set[NodeId] = set()
    anc: set[NodeId] = set()
    desc: set[NodeId] = set()
    top_down = sorted(range(len(q)), key=lambda i: q.depths[i])
    descendant_mode = q.mode == "descendant"
    for n_q in top_down:
        row = array.rows[n_q]
        p_q = q.parents[n_q]
        if p_q is not None:
            parent_row = array.rows[p_q]
            for n_x in cands[n_q]:
                if not row[n_x]:
                    continue
                if descendant_mode:
                    ok = False
                    a = doc.nodes[n_x].parent
                    while a is not None:
                        if parent_row[a]:
                            ok = True
                            break
                        a = doc.nodes[a].parent
                else:
                    p_x = doc.nodes[n_x].parent
                    ok = p_x is not None and bool(parent_row[p_x])
                if not ok:
                    row[n_x] = 0
        if n_q in q.output:
            for n_x in cands[n_q]:
                if row[n_x]:
                    out.add(n_x)
                    anc.update(doc.ancestors(n_x))
                    desc.update(doc.descendants(n_x))
    return OutputSet(frozenset(out), frozenset(anc), frozenset(desc)), array


def query_evaluate(doc: Document, q: AbstractQuery) -> OutputSet:
    outset, _ = evaluate_full(doc, q)
    return outset


def evaluate_to_document(doc: Document, q: AbstractQuery) -> Optional[Document]:
    """Projection of the document on the output set; None when it is empty."""
    outset = query_evaluate(doc, q)
    if not outset.nodes:
        return None
    return doc.project(set(outset.nodes))


def evaluate_catalog(documents: Iterable[Document], q: AbstractQuery) -> list[Document]:
    """Evaluate over a catalog's documents in order, dropping empty results.
    In descendant mode only documents describable by the query's ontology are
    queried at all."""
    results = []
    for doc in documents:
        if q.mode == "descendant" and q.ontology is not None:
            if not describable_by(doc, q.ontology):
                continue
        res = evaluate_to_document(doc, q)
        if res is not None:
            results.append(res)
    return results


def retrieval_matching(array: MatchArray) -> Matching:
    """The matching implicitly computed by the algorithm: row n_Q holds every
    document node whose final table entry is true."""
    return {n_q: {x for x in cands if array.rows[n_q][x]}
            for n_q, cands in enumerate(array.candidates)}


def union_matchings(m1: Matching, m2: Matching) -> Matching:
    out: Matching = {}
    for key in set(m1) | set(m2):
        out[key] = set(m1.get(key, ())) | set(m2.get(key, ()))
    return out


# ---------------------------------------------------------------------------
# Definitions-driven checks and enumeration (the verification oracle)


def _connected(doc: Document, n_x: NodeId, parent_row: set[NodeId], mode: str) -> bool:
    if mode == "child":
        p = doc.nodes[n_x].parent
        return p is not None and p in parent_row
    a = doc.nodes[n_x].parent
    while a is not None:
        if a in parent_row:
            return True
        a = doc.nodes[a].parent
    return False


def is_matching(doc: Document, q: AbstractQuery, mu: Matching) -> bool:
    """The three structural clauses: roots match, labels match, and every
    matched node's parent (an ancestor, in descendant mode) is matched to the
    parent query node."""
    if mu.get(q.root) != {doc.root}:
        return False
    for n_q in range(len(q)):
        row = mu.get(n_q, set())
        for n_x in row:
            if not node_matches(doc, n_x, q, n_q):
                return False
            if n_q != q.root:
                if not _connected(doc, n_x, mu.get(q.parents[n_q], set()), q.mode):
                    return False
    return True


def _pair_satisfied(doc: Document, q: AbstractQuery, n_q: int, n_x: NodeId,
                    mu: Matching, text: TextCache) -> bool:
    matcher = q.matchers[n_q]
    tc = True if isinstance(matcher, TrueMatch) else eval_matcher(matcher, text.get(n_x))
    kids = q.children[n_q]
    if not kids:
        return tc
    statuses = []
    for m_q in kids:
        targets = list(_edge_targets(doc, n_x, q.labels[m_q], q.mode))
        member = mu.get(m_q, set())
        if q.quantifiers[m_q] == "exists":
            statuses.append(any(t in member for t in targets))
        else:
            statuses.append(all(t in member for t in targets))
    if q.ops[n_q] == "or":
        return tc or any(statuses)
    return tc and all(statuses)


def is_satisfying_matching(doc: Document, q: AbstractQuery, mu: Matching) -> bool:
    """Checks the matching clauses plus the leaf/or/and satisfaction clauses
    directly from the definitions, independently of the table algorithm."""
    if not is_matching(doc, q, mu):
        return False
    text = TextCache(doc)
    for n_q in range(len(q)):
        for n_x in mu.get(n_q, set()):
            if not _pair_satisfied(doc, q, n_q, n_x, mu, text):
                return False
    return True


def enumerate_satisfying_matchings(doc: Document, q: AbstractQuery,
                                   cap: int = 200_000) -> tuple[list[Matching], bool]:
    """Every satisfying matching, by exhaustive assignment of candidate sets
    with definition checking.  Exponential: intended for small instances.
    Returns (matchings, truncated); when truncated is True the cap was hit.
    """
    text = TextCache(doc)
    by_label: dict[str, list[NodeId]] = {}
    for n in doc.complex_ids():
        by_label.setdefault(doc.nodes[n].label, []).append(n)

    if doc.nodes[doc.root].label != q.labels[q.root]:
        return [], False

    rows: list[set[NodeId]] = [set() for _ in range(len(q))]
    found: list[Matching] = []
    truncated = False

    def subsets(required: list[NodeId], optional: list[NodeId]) -> Iterator[set[NodeId]]:
        base = set(required)
        k = len(optional)
        for mask in range(1 << k):
            yield base | {optional[i] for i in range(k) if mask >> i & 1}

    def row_candidates(n_q: int) -> tuple[list[NodeId], list[NodeId]] | None:
        """(required, optional) candidates for the row, or None when some
        forced node is not even a legal candidate."""
        p_q = q.parents[n_q]
        parent_row = rows[p_q]
        legal = [x for x in by_label.get(q.labels[n_q], ())
                 if _connected(doc, x, parent_row, q.mode)]
        if not q.children[n_q]:
            # Leaves must pass their content constraint to appear in any row.
            matcher = q.matchers[n_q]
            if not isinstance(matcher, TrueMatch):
                legal = [x for x in legal if eval_matcher(matcher, text.get(x))]
        legal_set = set(legal)
        required: set[NodeId] = set()
        if q.quantifiers[n_q] == "forall" and q.ops[p_q] == "and":
            # Sound pruning: an and-node parent's universal edge forces every
            # same-labeled target of every matched parent into this row.
            for px in parent_row:
                for t in _edge_targets(doc, px, q.labels[n_q], q.mode):
                    if t not in legal_set:
                        return None
                    required.add(t)
        return sorted(required), sorted(legal_set - required)

    def solve(n_q: int, after) -> None:
        """Assign the subtree rooted at n_q, then continue with `after`."""
        nonlocal truncated
        if truncated:
            return

        def check_then_after() -> None:
            text_ok = all(
                _pair_satisfied(doc, q, n_q, n_x, {i: rows[i] for i in range(len(q))}, text)
                for n_x in rows[n_q])
            if text_ok:
                after()

        def solve_children(i: int) -> None:
            if truncated:
                return
            kids = q.children[n_q]
            if i == len(kids):
                check_then_after()
                return
            solve(kids[i], lambda: solve_children(i + 1))

        if n_q == q.root:
            rows[n_q] = {doc.root}
            solve_children(0)
            rows[n_q] = set()
            return
        rc = row_candidates(n_q)
        if rc is None:
            return
        required, optional = rc
        for subset in subsets(required, optional):
            if truncated:
                return
            rows[n_q] = subset
            solve_children(0)
        rows[n_q] = set()

    def record() -> None:
        nonlocal truncated
        if len(found) >= cap:
            truncated = True
            return
        found.append({i: set(rows[i]) for i in range(len(q))})

    solve(q.root, record)
    return found, truncated


def oracle_output_set(doc: Document, q: AbstractQuery,
                      matchings: Iterable[Matching]) -> OutputSet:
    """Output set per its definition: the union over satisfying matchings of
    projected-node images, closed with ancestors and descendants."""
    out: set[NodeId] = set()
    for mu in matchings:
        for n_o in q.output:
            out.update(mu.get(n_o, ()))
    anc: set[NodeId] = set()
    desc: set[NodeId] = set()
    for n in out:
        anc.update(doc.ancestors(n))
        desc.update(doc.descendants(n))
    return OutputSet(frozenset(out), frozenset(anc), frozenset(desc))
