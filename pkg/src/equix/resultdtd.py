"""Result-DTD synthesis: a compact DTD every result document of a query must
strictly conform to, enabling requerying of results.

Element names survive when an output node carries them or they sit above or
below such a name in the originating DTD.  Content definitions start from the
originating ones: element positions kept by the query become optional, erased
positions become the empty-content placeholder, alternatives from different
query nodes are unioned, and the rewrite rules eliminate the placeholder.
The result is linear in the sizes of the DTD and the query; minimal result
DTDs (which can be factorially large) are deliberately not computed.
"""

from __future__ import annotations

from dataclasses import dataclass

from .aggregation import AGG_ELEMENT, grouping_node
from .dtd import (ANY, EMPTY, EMPTY_SYM, PCDATA, AttDef, Choice, ContentDef, Dtd,
                  ElementRef, Opt, Plus, Seq, Star, element_refs)
from .query import AbstractQuery


def _attribute_owners(d: Dtd, attr_name: str) -> set[str]:
    return {elem for elem, defs in d.attlists.items()
            if any(a.name == attr_name for a in defs)}


def _reach_forward(d: Dtd, seeds: set[str]) -> set[str]:
    """Elements reachable strictly below any seed via content references."""
    out: set[str] = set()
    stack = [r for s in seeds if s in d.elements for r in element_refs(d.elements[s])]
    while stack:
        e = stack.pop()
        if e in out:
            continue
        out.add(e)
        stack.extend(element_refs(d.elements[e]))
    return out


def _reach_backward(d: Dtd, seeds: set[str]) -> set[str]:
    """Elements that can contain (at any depth) one of the seeds."""
    parents: dict[str, set[str]] = {e: set() for e in d.elements}
    for e, cd in d.elements.items():
        for ref in element_refs(cd):
            parents[ref].add(e)
    out: set[str] = set()
    stack = [p for s in seeds if s in parents for p in parents[s]]
    while stack:
        e = stack.pop()
        if e in out:
            continue
        out.add(e)
        stack.extend(parents[e])
    return out


@dataclass
class _Context:
    """Per-synthesis precomputation shared across all element rewrites."""

    covered: set[str]      # elements whose full definition survives
    names: set[str]        # the result element name set
    anc_star: list[bool]   # per query node: projected or above a projected node


def _build_context(q: AbstractQuery, d: Dtd) -> _Context:
    out_labels = {q.labels[o] for o in q.output}
    element_seeds = {l for l in out_labels if l in d.elements}
    attr_seeds = {l for l in out_labels if l not in d.elements}

    covered = set(element_seeds) | _reach_forward(d, element_seeds)

    upward_seeds = set(element_seeds)
    for attr in attr_seeds:
        upward_seeds |= _attribute_owners(d, attr)
    above = _reach_backward(d, upward_seeds)
    owners = set()
    for attr in attr_seeds:
        owners |= _attribute_owners(d, attr)

    names = {d.root_element_name} | covered | above | owners

    flags = [False] * len(q)
    for o in q.output:
        flags[o] = True
        for a in q.ancestors(o):
            flags[a] = True
    return _Context(covered=covered, names=names, anc_star=flags)


def result_element_names(q: AbstractQuery, d: Dtd) -> set[str]:
    """Elements that can appear in any result document: output-node labels
    plus their DTD ancestors and descendants; the root is always included.

    Output nodes labeled with attribute names contribute the elements the
    attribute can be nested in, and everything above those.
    """
    return set(_build_context(q, d).names)


def simplify(cd: ContentDef) -> ContentDef:
    """Eliminates the empty-content placeholder to a fixpoint: sequences drop
    it, choices drop it and become optional, and suffixed placeholders vanish.
    A fully empty definition becomes EMPTY.  Structurally equal alternatives
    are collapsed."""

    def simp_opt(inner: ContentDef) -> ContentDef:
        # (#PCDATA) already admits empty text and ANY admits anything;
        # optionalizing either is not expressible in DTD syntax.
        if inner == PCDATA or inner == ANY:
            return inner
        return Opt(inner)

    def simp(c: ContentDef) -> ContentDef:
        if isinstance(c, Seq):
            items = [simp(i) for i in c.items]
            items = [i for i in items if i != EMPTY_SYM]
            if not items:
                return EMPTY_SYM
            if len(items) == 1:
                return items[0]
            return Seq(tuple(items))
        if isinstance(c, Choice):
            items = [simp(i) for i in c.items]
            had_empty = any(i == EMPTY_SYM for i in items)
            deduped: list[ContentDef] = []
            for i in items:
                if i != EMPTY_SYM and i not in deduped:
                    deduped.append(i)
            if not deduped:
                return EMPTY_SYM
            if any(i == ANY for i in deduped):
                return ANY
            combined = deduped[0] if len(deduped) == 1 else Choice(tuple(deduped))
            return simp_opt(combined) if had_empty else combined
        if isinstance(c, Opt):
            inner = simp(c.item)
            return EMPTY_SYM if inner == EMPTY_SYM else simp_opt(inner)
        if isinstance(c, Star):
            inner = simp(c.item)
            return EMPTY_SYM if inner == EMPTY_SYM else Star(inner)
        if isinstance(c, Plus):
            inner = simp(c.item)
            return EMPTY_SYM if inner == EMPTY_SYM else Plus(inner)
        return c

    result = simp(cd)
    return EMPTY if result == EMPTY_SYM else result


def _substitute(cd: ContentDef, kept_labels: set[str]) -> ContentDef:
    if isinstance(cd, ElementRef):
        return Opt(cd) if cd.name in kept_labels else EMPTY_SYM
    if isinstance(cd, Seq):
        return Seq(tuple(_substitute(i, kept_labels) for i in cd.items))
    if isinstance(cd, Choice):
        return Choice(tuple(_substitute(i, kept_labels) for i in cd.items))
    if isinstance(cd, Opt):
        return Opt(_substitute(cd.item, kept_labels))
    if isinstance(cd, Star):
        return Star(_substitute(cd.item, kept_labels))
    if isinstance(cd, Plus):
        return Plus(_substitute(cd.item, kept_labels))
    if cd == EMPTY:
        return EMPTY_SYM
    return cd  # PCDATA / ANY carry no element positions


def _content_definition(e: str, q: AbstractQuery, d: Dtd, ctx: _Context) -> ContentDef:
    phi_e = d.elements[e]
    # Covered = labeled by an output node or strictly below such a label.
    include_base = e in ctx.covered

    alternatives: list[ContentDef] = []
    base = phi_e if include_base else EMPTY_SYM
    # EMPTY denotes the same (childless) content as the placeholder, so it
    # takes part in the rewriting under that reading.
    alternatives.append(EMPTY_SYM if base == EMPTY else base)

    for n_q in range(len(q)):
        if q.labels[n_q] != e or not ctx.anc_star[n_q]:
            continue
        kept = {q.labels[c] for c in q.children[n_q] if ctx.anc_star[c]}
        phi_nq = _substitute(phi_e, kept)
        alternatives.append(EMPTY_SYM if phi_nq == EMPTY else phi_nq)

    deduped: list[ContentDef] = []
    for alt in alternatives:
        if alt not in deduped:
            deduped.append(alt)
    combined = deduped[0] if len(deduped) == 1 else Choice(tuple(deduped))
    return simplify(combined)


def create_content_definition(e: str, q: AbstractQuery, d: Dtd) -> ContentDef:
    """Content definition of e in the result DTD.

    The originating definition survives verbatim when an output node's label
    is e or a DTD-ancestor of e.  Every query node labeled e that is
    projected or lies above a projected node contributes an alternative in
    which the element names of kept child positions become optional and all
    other element names are erased.
    """
    return _content_definition(e, q, d, _build_context(q, d))


def create_result_dtd(q: AbstractQuery, d: Dtd) -> Dtd:
    """The full result DTD: rewritten content definitions over the surviving
    element names, attribute lists copied with presence relaxed to implied,
    and (for aggregating queries) marker-element declarations appended to
    each grouping element.  Linear in the sizes of the DTD and the query."""
    ctx = _build_context(q, d)
    elements: dict[str, ContentDef] = {}
    for e in d.elements:  # keep declaration order
        if e in ctx.names:
            elements[e] = _content_definition(e, q, d, ctx)

    attlists: dict[str, list[AttDef]] = {}
    for e, defs in d.attlists.items():
        if e in ctx.names:
            # IDREF targets may be projected away, and a dangling reference
            # would break conformance of the very documents this DTD must
            # describe; the value survives as plain character data.
            attlists[e] = [
                AttDef(a.name, "CDATA" if a.type == "IDREF" else a.type,
                       required=False)
                for a in defs]

    agg_groups = {q.labels[grouping_node(q, n_q)]
                  for n_q in range(len(q)) if q.aggregates[n_q]}
    if agg_groups:
        marker = Star(ElementRef(AGG_ELEMENT))
        for g in agg_groups:
            if g not in elements:
                continue
            cd = elements[g]
            if cd == EMPTY:
                elements[g] = marker
            elif cd == ANY:
                pass
            elif cd == PCDATA:
                elements[g] = ANY  # mixed content is not expressible here
            else:
                elements[g] = Seq((cd, marker))
        elements[AGG_ELEMENT] = EMPTY
        attlists[AGG_ELEMENT] = [AttDef("fn", "CDATA", False),
                                 AttDef("of", "CDATA", False),
                                 AttDef("value", "CDATA", False)]

    return Dtd(root_element_name=d.root_element_name, elements=elements, attlists=attlists)
