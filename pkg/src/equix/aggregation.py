"""Aggregation over matched nodes: grouped values, constraint filtering, and
attachment of computed values to result documents.

Grouping needs no user input: values aggregated at a query node are grouped
by the lowest node above it that is projected or has a projected descendant
(the query root when none qualifies).  Aggregates range over textual content;
sum/avg are undefined unless every input parses as a decimal number.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .evaluator import Matching, OutputSet, TextCache
from .query import AbstractQuery
from .xmlmodel import Document, DocumentBuilder, NodeId

AGG_ELEMENT = "equix-agg"

_NUMBER_RE = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)$")


@dataclass(frozen=True, slots=True)
class AggValue:
    """One computed aggregate: fn over the values matched at a query node,
    within one group.  ``value`` is None when the function is undefined on
    its inputs."""

    fn: str
    node: int
    of_label: str
    group: NodeId
    value: float | str | None


def _as_number(s: str) -> Optional[float]:
    return float(s) if _NUMBER_RE.fullmatch(s.strip()) else None


def grouping_node(q: AbstractQuery, n_q: int) -> int:
    """Lowest proper ancestor of n_q that is projected or an ancestor of a
    projected node; the query root when no ancestor qualifies."""
    output_ancestors: set[int] = set()
    for o in q.output:
        output_ancestors.update(q.ancestors(o))
    for anc in q.ancestors(n_q):  # nearest first
        if anc in q.output or anc in output_ancestors:
            return anc
    return q.root


def _apply_fn(fn: str, values: list[str]) -> float | str | None:
    if fn == "count":
        return float(len(values))
    numbers = [_as_number(v) for v in values]
    numeric = all(x is not None for x in numbers) and bool(values)
    if fn in ("min", "max"):
        if not values:
            return None
        pick = min if fn == "min" else max
        if numeric:
            return pick(x for x in numbers if x is not None)
        return pick(values)
    if fn == "sum":
        if not values:
            return 0.0
        return sum(x for x in numbers if x is not None) if numeric else None
    if fn == "avg":
        if not numeric:
            return None
        return sum(x for x in numbers if x is not None) / len(values)
    raise ValueError(f"unknown aggregation function {fn!r}")


def compute_aggregates(doc: Document, q: AbstractQuery, mu: Matching) -> list[AggValue]:
    """Aggregates for every node carrying aggregation functions or
    constraints, one value per (function, group).  Undefined results are
    values, not errors."""
    text = TextCache(doc)
    values: list[AggValue] = []
    for n_q in range(len(q)):
        fns = tuple(q.aggregates[n_q]) + tuple(a.fn for a in q.agg_constraints[n_q])
        if not fns:
            continue
        seen: list[str] = []
        for fn in fns:
            if fn not in seen:
                seen.append(fn)
        g_q = grouping_node(q, n_q)
        matched = mu.get(n_q, set())
        for g in sorted(mu.get(g_q, set())):
            # Descendants of the group node; equality covers the root
            # grouping on itself (the fallback totalization).
            in_group = [n_x for n_x in sorted(matched)
                        if n_x == g or _is_ancestor(doc, g, n_x)]
            strings = [text.get(n_x) for n_x in in_group]
            for fn in seen:
                values.append(AggValue(fn=fn, node=n_q, of_label=q.labels[n_q],
                                       group=g, value=_apply_fn(fn, strings)))
    return values


def _is_ancestor(doc: Document, anc: NodeId, n: NodeId) -> bool:
    p = doc.nodes[n].parent
    while p is not None:
        if p == anc:
            return True
        p = doc.nodes[p].parent
    return False


def _compare(value: float | str | None, cmp: str, bound: float) -> bool:
    if value is None or isinstance(value, str):
        return False  # undefined fails every comparison
    if cmp == "<":
        return value < bound
    if cmp == "<=":
        return value <= bound
    if cmp == "=":
        return value == bound
    if cmp == "!=":
        return value != bound
    if cmp == ">=":
        return value >= bound
    if cmp == ">":
        return value > bound
    raise ValueError(f"unknown comparator {cmp!r}")


def check_agg_constraints(values: list[AggValue], q: AbstractQuery) -> set[NodeId]:
    """Groups passing every atomic constraint of every constrained node.
    An empty constraint conjunction passes everything."""
    groups = {v.group for v in values}
    failing: set[NodeId] = set()
    by_key = {(v.node, v.fn, v.group): v.value for v in values}
    for n_q in range(len(q)):
        for atom in q.agg_constraints[n_q]:
            for g in groups:
                key = (n_q, atom.fn, g)
                if key in by_key and not _compare(by_key[key], atom.cmp, atom.value):
                    failing.add(g)
    return groups - failing


def filter_output_set(doc: Document, outset: OutputSet,
                      failing_groups: set[NodeId]) -> OutputSet:
    """Excludes failing groups' matched subtrees from the output nodes and
    rebuilds the ancestor/descendant closures."""
    if not failing_groups:
        return outset
    out = {n for n in outset.out
           if not any(n == g or _is_ancestor(doc, g, n) for g in failing_groups)}
    anc: set[NodeId] = set()
    desc: set[NodeId] = set()
    for n in out:
        anc.update(doc.ancestors(n))
        desc.update(doc.descendants(n))
    return OutputSet(frozenset(out), frozenset(anc), frozenset(desc))


def format_agg_value(value: float | str | None) -> str:
    if value is None:
        return "undefined"
    if isinstance(value, str):
        return value
    if value == int(value):
        return str(int(value))
    return repr(value)


def attach_aggregates(result: Document, values: list[AggValue]) -> Document:
    """Appends one marker element per aggregate value under its group's node
    in the result document; group ids must already refer to result-document
    nodes.  Values whose group was projected away are skipped."""
    if not values:
        return result
    by_group: dict[NodeId, list[AggValue]] = {}
    for v in values:
        if 0 <= v.group < len(result.nodes) and not result.nodes[v.group].atomic:
            by_group.setdefault(v.group, []).append(v)
    if not by_group:
        return result

    builder = DocumentBuilder()
    mapping: dict[NodeId, NodeId] = {}
    for old, node in enumerate(result.nodes):
        parent = mapping[node.parent] if node.parent is not None else None
        mapping[old] = builder.add_node(parent, node.label,
                                        atomic=node.atomic, attribute=node.attribute)
    # Marker elements go after the group's original children, matching the
    # result-DTD extension that appends them at the end of the content model.
    for old in sorted(by_group):
        for v in by_group[old]:
            agg = builder.element(mapping[old], AGG_ELEMENT)
            builder.attribute(agg, "fn", v.fn)
            builder.attribute(agg, "of", v.of_label)
            builder.attribute(agg, "value", format_agg_value(v.value))
    new_doc = builder.build()
    for value, elem in result.id_index.items():
        new_doc.id_index[value] = mapping[elem]
    for value, atom in result.id_atoms.items():
        new_doc.id_atoms[value] = mapping[atom]
    for src, tgt in result.idref_links.items():
        new_doc.idref_links[mapping[src]] = mapping[tgt]
    new_doc.atom_class.update({mapping[a]: mapping[r] for a, r in result.atom_class.items()})
    return new_doc
