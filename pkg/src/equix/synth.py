"""Random instance generators: documents, DTDs, conforming documents, and
queries, for property testing and scaling experiments.

Everything takes an explicit random.Random so corpora are reproducible.
"""

from __future__ import annotations

import random
from typing import Sequence

from .dtd import (EMPTY, PCDATA, AttDef, Choice, ContentDef, Dtd, ElementRef,
                  Opt, Plus, Seq, Star, element_refs)
from .query import (AGG_FNS, CMP_OPS, AggAtom, AndMatch, ConcreteQueryNode,
                    NotMatch, OrMatch, PhraseMatch, StringMatcher, TRUE,
                    WordMatch, complement)
from .xmlmodel import Document, DocumentBuilder

DEFAULT_LABELS = ("a", "b", "c")
DEFAULT_WORDS = ("wild", "west", "red", "gold", "fox", "night")


def random_matcher(rng: random.Random, words: Sequence[str] = DEFAULT_WORDS,
                   depth: int = 2) -> StringMatcher:
    roll = rng.random()
    if depth == 0 or roll < 0.35:
        return TRUE
    if roll < 0.60:
        return WordMatch(rng.choice(words))
    if roll < 0.70:
        return PhraseMatch(" ".join(rng.sample(list(words), k=min(2, len(words)))))
    if roll < 0.82:
        # complement() rather than raw Not-wrapping keeps members normalized
        # (no stacked double negations).
        return complement(random_matcher(rng, words, depth - 1))
    parts = tuple(random_matcher(rng, words, depth - 1) for _ in range(2))
    return AndMatch(parts) if roll < 0.91 else OrMatch(parts)


def random_document(rng: random.Random, max_nodes: int = 12,
                    labels: Sequence[str] = DEFAULT_LABELS,
                    words: Sequence[str] = DEFAULT_WORDS,
                    sibling_repeat_p: float = 0.5,
                    min_nodes: int = 2) -> Document:
    """Small random tree of elements, occasional attributes, and text atoms.
    Sibling labels repeat with the given probability so same-path node groups
    (the interesting case for quantified edges) actually occur."""
    builder = DocumentBuilder()
    budget = rng.randint(min_nodes, max_nodes)
    used = [0]

    def new_element(parent, label: str) -> int:
        # Attributes go in at creation so document order keeps them first,
        # exactly as parsed XML would; names stay unique per element.
        node = builder.element(parent, label)
        used[0] += 1
        available = list(labels)
        while available and rng.random() < 0.2 and used[0] + 2 <= budget:
            name = available.pop(rng.randrange(len(available)))
            builder.attribute(node, name, rng.choice(words))
            used[0] += 2
        return node

    elements = [new_element(None, rng.choice(labels))]
    frontier = list(elements)
    tail_text: dict[int, bool] = {}  # adjacent text runs coalesce on reparse
    while used[0] < budget:
        if not frontier:
            frontier.append(rng.choice(elements))
        parent = frontier.pop(rng.randrange(len(frontier)))
        prev_label = None
        for _ in range(rng.randint(0, 3)):
            if used[0] >= budget:
                break
            if rng.random() < 0.25 and not tail_text.get(parent, False):
                builder.text(parent, " ".join(
                    rng.choice(words) for _ in range(rng.randint(1, 2))))
                used[0] += 1
                tail_text[parent] = True
            else:
                if prev_label is not None and rng.random() < sibling_repeat_p:
                    label = prev_label
                else:
                    label = rng.choice(labels)
                child = new_element(parent, label)
                elements.append(child)
                frontier.append(child)
                prev_label = label
                tail_text[parent] = False
    return builder.build()


def random_query_for(rng: random.Random, doc: Document, max_nodes: int = 6,
                     quantifiers: Sequence[str] = ("exists", "forall"),
                     words: Sequence[str] = DEFAULT_WORDS,
                     labels: Sequence[str] = DEFAULT_LABELS,
                     mutate_p: float = 0.15,
                     output_p: float = 0.45,
                     max_depth: int | None = None) -> ConcreteQueryNode:
    """A query patterned on the document so matchings actually arise; labels
    occasionally mutate to exercise failures."""
    budget = rng.randint(2, max_nodes)
    counter = [0]

    def label_of(doc_node: int) -> str:
        if rng.random() < mutate_p:
            return rng.choice(labels)
        return doc.nodes[doc_node].label

    def grow(doc_node: int, is_root: bool, depth: int) -> ConcreteQueryNode:
        counter[0] += 1
        node = ConcreteQueryNode(
            label=doc.nodes[doc_node].label if is_root and rng.random() > mutate_p / 2
            else label_of(doc_node),
            matcher=TRUE if rng.random() < 0.45 else random_matcher(rng, words),
            quantifier=None if is_root else rng.choice(quantifiers),
            output=rng.random() < output_p,
        )
        if max_depth is not None and depth >= max_depth:
            return node
        kids = [c for c in doc.children(doc_node) if not doc.nodes[c].atomic]
        rng.shuffle(kids)
        if kids and rng.random() > 0.15:
            for child in kids[: rng.randint(1, 2)]:
                if counter[0] >= budget:
                    break
                node.children.append(grow(child, False, depth + 1))
        return node

    return grow(doc.root, True, 1)


def candidate_weight(doc: Document, cq: ConcreteQueryNode) -> int:
    """Sum over query nodes of same-labeled complex document nodes; a proxy
    for the enumeration oracle's cost used to resample oversized instances."""
    tally: dict[str, int] = {}
    for n in doc.complex_ids():
        tally[doc.nodes[n].label] = tally.get(doc.nodes[n].label, 0) + 1

    def walk(node: ConcreteQueryNode) -> int:
        return tally.get(node.label, 0) + sum(walk(c) for c in node.children)

    return walk(cq)


def oracle_instance(rng: random.Random, max_doc_nodes: int = 12,
                    max_query_nodes: int = 6,
                    quantifiers: Sequence[str] = ("exists", "forall"),
                    max_weight: int = 26,
                    max_depth: int | None = None) -> tuple[Document, ConcreteQueryNode]:
    """A (document, query) pair small enough for exhaustive enumeration."""
    while True:
        doc = random_document(rng, max_doc_nodes, min_nodes=min(7, max_doc_nodes))
        cq = random_query_for(rng, doc, max_query_nodes, quantifiers,
                              max_depth=max_depth)
        if candidate_weight(doc, cq) <= max_weight:
            return doc, cq


# ---------------------------------------------------------------------------
# DTD-driven generation


def random_dtd(rng: random.Random, n_elements: int = 6,
               attr_p: float = 0.4, reference_p: float = 0.2) -> Dtd:
    names = [f"e{i}" for i in range(n_elements)]
    children: dict[str, list[str]] = {n: [] for n in names}
    for i in range(1, n_elements):
        parent = names[rng.randrange(i)]
        children[parent].append(names[i])

    def model_for(kids: list[str]) -> ContentDef:
        if not kids:
            return rng.choice((EMPTY, PCDATA))
        wrapped = []
        for k in kids:
            ref: ContentDef = ElementRef(k)
            roll = rng.random()
            if roll < 0.25:
                ref = Opt(ref)
            elif roll < 0.45:
                ref = Star(ref)
            elif roll < 0.60:
                ref = Plus(ref)
            wrapped.append(ref)
        if len(wrapped) == 1:
            return wrapped[0]
        if rng.random() < 0.3:
            return Choice(tuple(wrapped))
        return Seq(tuple(wrapped))

    elements = {n: model_for(children[n]) for n in names}
    attlists: dict[str, list[AttDef]] = {}
    for n in names:
        defs: list[AttDef] = []
        if rng.random() < attr_p:
            defs.extend(AttDef(f"x{j}", "CDATA", required=rng.random() < 0.5)
                        for j in range(rng.randint(1, 2)))
        if rng.random() < reference_p:
            defs.append(AttDef("key", "ID", required=rng.random() < 0.5))
        if rng.random() < reference_p:
            # always optional: a document may legitimately have no IDs to point at
            defs.append(AttDef("ref", "IDREF", required=False))
        if defs:
            attlists[n] = defs
    return Dtd(root_element_name=names[0], elements=elements, attlists=attlists)


def random_conforming_document(rng: random.Random, d: Dtd,
                               words: Sequence[str] = DEFAULT_WORDS,
                               max_elements: int = 40) -> Document:
    """Samples a document from the DTD's language (strictly conforming by
    construction; validated in tests, not assumed)."""
    builder = DocumentBuilder()
    count = [0]
    id_values: list[str] = []

    def sample_labels(cd: ContentDef) -> list[str]:
        if cd == EMPTY or cd == PCDATA:
            return []
        if isinstance(cd, ElementRef):
            return [cd.name]
        if isinstance(cd, Seq):
            out: list[str] = []
            for item in cd.items:
                out.extend(sample_labels(item))
            return out
        if isinstance(cd, Choice):
            return sample_labels(rng.choice(cd.items))
        if isinstance(cd, Opt):
            if count[0] >= max_elements or rng.random() < 0.4:
                return []
            return sample_labels(cd.item)
        if isinstance(cd, Star):
            reps = 0 if count[0] >= max_elements else rng.randint(0, 2)
            out = []
            for _ in range(reps):
                out.extend(sample_labels(cd.item))
            return out
        if isinstance(cd, Plus):
            reps = 1 if count[0] >= max_elements else rng.randint(1, 2)
            out = []
            for _ in range(reps):
                out.extend(sample_labels(cd.item))
            return out
        raise ValueError(f"cannot sample from {cd!r}")

    def emit(label: str, parent) -> None:
        count[0] += 1
        node = builder.element(parent, label)
        for att in d.attlists.get(label, ()):
            if att.type == "ID":
                if att.required or rng.random() < 0.5:
                    value = f"id{len(id_values)}"
                    id_values.append(value)
                    attr = builder.attribute(node, att.name, value)
                    builder.declare_id(node, attr, value)
            elif att.type == "IDREF":
                # resolvable by construction: only point at ids already emitted
                if id_values and rng.random() < 0.6:
                    value = rng.choice(id_values)
                    attr = builder.attribute(node, att.name, value)
                    builder.declare_idref(attr, value)
            elif att.required or rng.random() < 0.5:
                builder.attribute(node, att.name, rng.choice(words))
        cd = d.elements[label]
        if cd == PCDATA:
            if rng.random() < 0.9:
                builder.text(node, " ".join(
                    rng.choice(words) for _ in range(rng.randint(1, 3))))
            return
        for child_label in sample_labels(cd):
            emit(child_label, node)

    emit(d.root_element_name, None)
    return builder.build()


def random_query_from_dtd(rng: random.Random, d: Dtd, max_nodes: int = 6,
                          quantifiers: Sequence[str] = ("exists", "not_exists",
                                                        "forall", "not_forall"),
                          words: Sequence[str] = DEFAULT_WORDS,
                          with_aggregates: bool = False) -> ConcreteQueryNode:
    """A query realizable in the DTD: children are drawn from the parent's
    content model and attribute list, the root is the designated root."""
    budget = rng.randint(1, max_nodes)
    counter = [0]

    def grow(label: str, is_root: bool) -> ConcreteQueryNode:
        counter[0] += 1
        node = ConcreteQueryNode(
            label=label,
            matcher=random_matcher(rng, words),
            quantifier=None if is_root else rng.choice(quantifiers),
            output=rng.random() < 0.45,
        )
        if with_aggregates and not is_root and rng.random() < 0.3:
            node.aggregates = (rng.choice(AGG_FNS),)
            if rng.random() < 0.5:
                node.agg_constraints = (AggAtom(
                    fn=rng.choice(AGG_FNS), cmp=rng.choice(CMP_OPS),
                    value=float(rng.randint(0, 3))),)
        if label in d.elements:
            options = sorted(element_refs(d.elements[label])) + d.attribute_names(label)
            rng.shuffle(options)
            for child_label in options[: rng.randint(0, 2)]:
                if counter[0] >= budget:
                    break
                node.children.append(grow(child_label, False))
        return node

    return grow(d.root_element_name, True)


# ---------------------------------------------------------------------------
# Scaling family for the complexity envelope


def scaling_query() -> ConcreteQueryNode:
    """Fixed ten-node query used by the complexity measurements."""
    def n(label, quantifier=None, matcher=TRUE, output=False, children=()):
        return ConcreteQueryNode(label=label, matcher=matcher, quantifier=quantifier,
                                 output=output, children=list(children))

    return n("library", children=[
        n("meta", "exists", WordMatch("catalogued")),
        n("section", "exists", children=[
            n("item", "forall", children=[
                n("kind", "exists", NotMatch(WordMatch("forbidden"))),
            ]),
            n("item", "exists", children=[
                n("name", "exists", WordMatch("alpha"), output=True),
                n("kind", "exists"),
            ]),
        ]),
        n("section", "forall", children=[
            n("name", "exists"),
        ]),
    ])


def scaling_document(rng: random.Random, approx_nodes: int) -> Document:
    """A document shaped for scaling_query(), with about the requested total
    node count (elements, attributes and atoms included)."""
    builder = DocumentBuilder()
    root = builder.element(None, "library")
    meta = builder.element(root, "meta")
    builder.text(meta, "catalogued collection")
    per_section = 1 + 1 + 10 * 7  # section + name + items
    sections = max(1, (approx_nodes - 3) // per_section)
    words = ("alpha", "beta", "gamma", "delta")
    kinds = ("book", "map", "print")
    for _ in range(sections):
        section = builder.element(root, "section")
        name = builder.element(section, "name")
        builder.text(name, rng.choice(words))
        for _ in range(10):
            item = builder.element(section, "item")
            kind = builder.element(item, "kind")
            builder.text(kind, rng.choice(kinds))
            iname = builder.element(item, "name")
            builder.text(iname, f"{rng.choice(words)} {rng.randrange(10_000)}")
            builder.attribute(item, "shelf", str(rng.randrange(100)))
    return builder.build()
