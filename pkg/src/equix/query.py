"""Concrete and abstract search queries, string matchers, and translation.

Users author concrete queries: trees of element/attribute names with content
constraints, one of four quantifiers per edge (exists, not exists, for all,
not for all), output flags, and optional aggregation blocks.  Translation
propagates every negation downward, producing an abstract query that uses
only existential/universal edges and and/or nodes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Union

from .dtd import Dtd, element_refs
from .xmlmodel import Document


class QueryFormatError(ValueError):
    """Interchange text that does not follow the query schema."""


# ---------------------------------------------------------------------------
# String matchers: a complement-closed family containing the constant truth.


@dataclass(frozen=True, slots=True)
class TrueMatch:
    pass


@dataclass(frozen=True, slots=True)
class WordMatch:
    word: str


@dataclass(frozen=True, slots=True)
class PhraseMatch:
    phrase: str


@dataclass(frozen=True, slots=True)
class AndMatch:
    parts: tuple["StringMatcher", ...]


@dataclass(frozen=True, slots=True)
class OrMatch:
    parts: tuple["StringMatcher", ...]


@dataclass(frozen=True, slots=True)
class NotMatch:
    inner: "StringMatcher"


StringMatcher = Union[TrueMatch, WordMatch, PhraseMatch, AndMatch, OrMatch, NotMatch]

TRUE = TrueMatch()


def eval_matcher(m: StringMatcher, s: str) -> bool:
    """Word matching is case-insensitive over whitespace tokens; phrase
    matching is a contiguous token-sequence test."""
    return _eval(m, tuple(s.lower().split()))


def _eval(m: StringMatcher, tokens: tuple[str, ...]) -> bool:
    if isinstance(m, TrueMatch):
        return True
    if isinstance(m, WordMatch):
        return m.word.lower() in tokens
    if isinstance(m, PhraseMatch):
        needle = tuple(m.phrase.lower().split())
        if not needle:
            return True
        k = len(needle)
        return any(tokens[i:i + k] == needle for i in range(len(tokens) - k + 1))
    if isinstance(m, AndMatch):
        return all(_eval(p, tokens) for p in m.parts)
    if isinstance(m, OrMatch):
        return any(_eval(p, tokens) for p in m.parts)
    if isinstance(m, NotMatch):
        return not _eval(m.inner, tokens)
    raise TypeError(f"not a matcher: {m!r}")


def complement(m: StringMatcher) -> StringMatcher:
    """Pointwise negation; double negations collapse structurally."""
    if isinstance(m, NotMatch):
        return m.inner
    return NotMatch(m)


def matcher_size(m: StringMatcher) -> int:
    if isinstance(m, (AndMatch, OrMatch)):
        return 1 + sum(matcher_size(p) for p in m.parts)
    if isinstance(m, NotMatch):
        return 1 + matcher_size(m.inner)
    return 1


# ---------------------------------------------------------------------------
# Aggregation atoms

AGG_FNS = ("count", "min", "max", "sum", "avg")
CMP_OPS = ("<", "<=", "=", "!=", ">=", ">")


@dataclass(frozen=True, slots=True)
class AggAtom:
    """One atomic aggregation constraint: fn cmp value."""

    fn: str
    cmp: str
    value: float

    def __post_init__(self):
        if self.fn not in AGG_FNS:
            raise QueryFormatError(f"unknown aggregation function {self.fn!r}")
        if self.cmp not in CMP_OPS:
            raise QueryFormatError(f"unknown comparator {self.cmp!r}")


# ---------------------------------------------------------------------------
# Concrete queries

QUANTIFIERS = ("exists", "not_exists", "forall", "not_forall")


@dataclass
class ConcreteQueryNode:
    """A node of the user-facing query tree; all nodes are implicitly
    and-nodes.  ``quantifier`` sits on the edge from the parent and is None
    exactly on the root."""

    label: str
    matcher: StringMatcher = TRUE
    quantifier: Optional[str] = None
    output: bool = False
    children: list["ConcreteQueryNode"] = field(default_factory=list)
    aggregates: tuple[str, ...] = ()
    agg_constraints: tuple[AggAtom, ...] = ()


@dataclass
class QueryDocument:
    """Top-level interchange wrapper around one concrete query."""

    query: ConcreteQueryNode
    catalog: Optional[str] = None
    mode: str = "child"
    ontology: Optional[frozenset[str]] = None


# ---------------------------------------------------------------------------
# Abstract queries


@dataclass(eq=True)
class AbstractQuery:
    """Rooted query tree after negation propagation.

    Nodes carry dense pre-order ids (0 is the root).  ``quantifiers[i]`` is
    the quantifier on the edge into node i ("exists"/"forall", None at the
    root); ``ops[i]`` is "and" or "or".  ``output`` is the projected node
    set and may be empty (the query is then a pure satisfiability test).
    """

    labels: tuple[str, ...]
    matchers: tuple[StringMatcher, ...]
    ops: tuple[str, ...]
    parents: tuple[Optional[int], ...]
    quantifiers: tuple[Optional[str], ...]
    output: frozenset[int]
    aggregates: tuple[tuple[str, ...], ...] = ()
    agg_constraints: tuple[tuple[AggAtom, ...], ...] = ()
    mode: str = "child"
    ontology: Optional[frozenset[str]] = None

    def __post_init__(self):
        if not self.aggregates:
            self.aggregates = tuple(() for _ in self.labels)
        if not self.agg_constraints:
            self.agg_constraints = tuple(() for _ in self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def root(self) -> int:
        return 0

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        kids: list[list[int]] = [[] for _ in self.labels]
        for i, p in enumerate(self.parents):
            if p is not None:
                kids[p].append(i)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def depths(self) -> tuple[int, ...]:
        d = [0] * len(self.labels)
        for i, p in enumerate(self.parents):
            if p is not None:
                d[i] = d[p] + 1
        return tuple(d)

    def ancestors(self, n: int) -> list[int]:
        out = []
        p = self.parents[n]
        while p is not None:
            out.append(p)
            p = self.parents[p]
        return out

    def has_aggregation(self) -> bool:
        return any(self.aggregates) or any(self.agg_constraints)


def translate(cq: ConcreteQueryNode, mode: str = "child",
              ontology: Optional[frozenset[str]] = None) -> AbstractQuery:
    """Concrete -> abstract translation with downward negation propagation.

    A negated quantifier flips the edge quantifier and pushes a negation into
    the child: the child's operator flips between and/or, its matcher is
    complemented, and the negation keeps propagating through its edges.
    """
    labels: list[str] = []
    matchers: list[StringMatcher] = []
    ops: list[str] = []
    parents: list[Optional[int]] = []
    quants: list[Optional[str]] = []
    output: set[int] = set()
    aggs: list[tuple[str, ...]] = []
    agg_cs: list[tuple[AggAtom, ...]] = []

    def walk(node: ConcreteQueryNode, parent: Optional[int],
             quant: Optional[str], negated: bool) -> None:
        idx = len(labels)
        labels.append(node.label)
        matchers.append(complement(node.matcher) if negated else node.matcher)
        ops.append("or" if negated else "and")
        parents.append(parent)
        quants.append(quant)
        if node.output:
            output.add(idx)
        aggs.append(tuple(node.aggregates))
        agg_cs.append(tuple(node.agg_constraints))
        for child in node.children:
            uq = child.quantifier or "exists"
            if uq not in QUANTIFIERS:
                raise QueryFormatError(f"unknown quantifier {uq!r}")
            base = "exists" if uq in ("exists", "not_exists") else "forall"
            flip = negated ^ (uq in ("not_exists", "not_forall"))
            if flip:
                base = "forall" if base == "exists" else "exists"
            walk(child, idx, base, flip)

    walk(cq, None, None, False)
    return AbstractQuery(
        labels=tuple(labels), matchers=tuple(matchers), ops=tuple(ops),
        parents=tuple(parents), quantifiers=tuple(quants),
        output=frozenset(output), aggregates=tuple(aggs),
        agg_constraints=tuple(agg_cs), mode=mode, ontology=ontology,
    )


# ---------------------------------------------------------------------------
# Interchange format (JSON)

_MATCHER_OPS = ("true", "word", "phrase", "and", "or", "not")


def _matcher_from_obj(obj) -> StringMatcher:
    if obj is None:
        return TRUE
    if not isinstance(obj, dict) or "op" not in obj:
        raise QueryFormatError(f"constraint must be an object with an 'op' key, got {obj!r}")
    op = obj["op"]
    if op == "true":
        return TRUE
    if op == "word":
        return WordMatch(str(obj["value"]))
    if op == "phrase":
        return PhraseMatch(str(obj["value"]))
    if op in ("and", "or"):
        parts = tuple(_matcher_from_obj(a) for a in obj.get("args", []))
        if not parts:
            raise QueryFormatError(f"'{op}' constraint needs at least one argument")
        return AndMatch(parts) if op == "and" else OrMatch(parts)
    if op == "not":
        args = obj.get("args", [])
        if len(args) != 1:
            raise QueryFormatError("'not' constraint takes exactly one argument")
        return NotMatch(_matcher_from_obj(args[0]))
    raise QueryFormatError(f"unknown matcher operator {op!r}")


def _matcher_to_obj(m: StringMatcher):
    if isinstance(m, TrueMatch):
        return {"op": "true"}
    if isinstance(m, WordMatch):
        return {"op": "word", "value": m.word}
    if isinstance(m, PhraseMatch):
        return {"op": "phrase", "value": m.phrase}
    if isinstance(m, AndMatch):
        return {"op": "and", "args": [_matcher_to_obj(p) for p in m.parts]}
    if isinstance(m, OrMatch):
        return {"op": "or", "args": [_matcher_to_obj(p) for p in m.parts]}
    if isinstance(m, NotMatch):
        return {"op": "not", "args": [_matcher_to_obj(m.inner)]}
    raise TypeError(f"not a matcher: {m!r}")


def _node_from_obj(obj, is_root: bool) -> ConcreteQueryNode:
    if not isinstance(obj, dict) or "element" not in obj:
        raise QueryFormatError("query node must be an object with an 'element' key")
    quant = obj.get("quantifier")
    if is_root:
        if quant is not None:
            raise QueryFormatError("the root node takes no quantifier")
    else:
        quant = quant or "exists"
        if quant not in QUANTIFIERS:
            raise QueryFormatError(f"unknown quantifier {quant!r}")
    aggs = tuple(a["fn"] if isinstance(a, dict) else str(a) for a in obj.get("agg", []))
    for fn in aggs:
        if fn not in AGG_FNS:
            raise QueryFormatError(f"unknown aggregation function {fn!r}")
    atoms = tuple(
        AggAtom(fn=c["fn"], cmp=c["cmp"], value=float(c["value"]))
        for c in obj.get("aggConstraints", [])
    )
    return ConcreteQueryNode(
        label=str(obj["element"]),
        matcher=_matcher_from_obj(obj.get("constraint")),
        quantifier=quant,
        output=bool(obj.get("output", False)),
        children=[_node_from_obj(c, False) for c in obj.get("children", [])],
        aggregates=aggs,
        agg_constraints=atoms,
    )


def _node_to_obj(node: ConcreteQueryNode) -> dict:
    obj: dict = {"element": node.label}
    if not isinstance(node.matcher, TrueMatch):
        obj["constraint"] = _matcher_to_obj(node.matcher)
    if node.quantifier is not None:
        obj["quantifier"] = node.quantifier
    if node.output:
        obj["output"] = True
    if node.children:
        obj["children"] = [_node_to_obj(c) for c in node.children]
    if node.aggregates:
        obj["agg"] = [{"fn": fn} for fn in node.aggregates]
    if node.agg_constraints:
        obj["aggConstraints"] = [
            {"fn": a.fn, "cmp": a.cmp, "value": a.value} for a in node.agg_constraints]
    return obj


def parse_query(text: str) -> ConcreteQueryNode:
    """Parse a query node (or a full wrapper, from which the node is taken)."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise QueryFormatError(f"query is not valid JSON: {exc}") from None
    if isinstance(obj, dict) and "query" in obj:
        obj = obj["query"]
    return _node_from_obj(obj, is_root=True)


def serialize_query(cq: ConcreteQueryNode) -> str:
    return json.dumps(_node_to_obj(cq), indent=2)


def parse_query_document(text: str) -> QueryDocument:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise QueryFormatError(f"query is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise QueryFormatError("query document must be a JSON object")
    if "query" not in obj:
        # Bare node form: wrap with defaults.
        return QueryDocument(query=_node_from_obj(obj, True))
    mode = obj.get("mode", "child")
    if mode not in ("child", "descendant"):
        raise QueryFormatError(f"unknown mode {mode!r}")
    ontology = obj.get("ontology")
    return QueryDocument(
        query=_node_from_obj(obj["query"], True),
        catalog=obj.get("catalog"),
        mode=mode,
        ontology=frozenset(ontology) if ontology is not None else None,
    )


def serialize_query_document(qd: QueryDocument) -> str:
    obj: dict = {"mode": qd.mode, "query": _node_to_obj(qd.query)}
    if qd.catalog is not None:
        obj["catalog"] = qd.catalog
    if qd.ontology is not None:
        obj["ontology"] = sorted(qd.ontology)
    return json.dumps(obj, indent=2)


# ---------------------------------------------------------------------------
# Validation against a DTD and ontology coverage


def validate_query_against_dtd(cq: ConcreteQueryNode, d: Dtd) -> list[str]:
    """Every edge must be realizable in the DTD (child label appears in the
    parent's content model or attribute list) and the root label must be the
    DTD's designated root element name."""
    diags: list[str] = []
    if cq.label != d.root_element_name:
        diags.append(
            f"query root {cq.label!r} does not match the DTD root {d.root_element_name!r}")

    def walk(node: ConcreteQueryNode) -> None:
        if node.label in d.elements:
            allowed = element_refs(d.elements[node.label]) | set(d.attribute_names(node.label))
        else:
            allowed = set()
        for child in node.children:
            if node.label not in d.elements:
                diags.append(f"element {node.label!r} is not defined in the DTD")
            elif child.label not in allowed:
                diags.append(
                    f"{child.label!r} cannot occur under {node.label!r} in this DTD")
            walk(child)

    walk(cq)
    return diags


def describable_by(doc: Document, ontology: frozenset[str] | set[str]) -> bool:
    """True when at least one element or attribute name of the document is an
    ontology term."""
    return any(doc.nodes[n].label in ontology for n in doc.complex_ids())


def query_size(q: AbstractQuery) -> int:
    return len(q)
