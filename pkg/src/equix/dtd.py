"""DTD subset: parsing, conformance checking, and structural relations.

The supported subset covers ELEMENT and ATTLIST declarations with CDATA/ID/
IDREF attribute types and #REQUIRED/#IMPLIED presence.  Content models are
the usual regular expressions over element names plus EMPTY, ANY and
(#PCDATA); general mixed models parse but validate as ANY.  An extra
EMPTY_SYM marker (the empty content placeholder) exists only transiently
while result DTDs are rewritten and never appears in parsed DTDs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence, Union

from .xmlmodel import Document, NodeId


class DtdParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


@dataclass(frozen=True, slots=True)
class ElementRef:
    name: str


@dataclass(frozen=True, slots=True)
class Seq:
    items: tuple["ContentDef", ...]

    def __post_init__(self):
        if not self.items:
            raise ValueError("Seq needs at least one operand")


@dataclass(frozen=True, slots=True)
class Choice:
    items: tuple["ContentDef", ...]

    def __post_init__(self):
        if not self.items:
            raise ValueError("Choice needs at least one operand")


@dataclass(frozen=True, slots=True)
class Opt:
    item: "ContentDef"


@dataclass(frozen=True, slots=True)
class Star:
    item: "ContentDef"


@dataclass(frozen=True, slots=True)
class Plus:
    item: "ContentDef"


@dataclass(frozen=True, slots=True)
class Marker:
    kind: str


PCDATA = Marker("#PCDATA")
EMPTY = Marker("EMPTY")
ANY = Marker("ANY")
EMPTY_SYM = Marker("EMPTY_SYM")

ContentDef = Union[ElementRef, Seq, Choice, Opt, Star, Plus, Marker]


@dataclass(frozen=True, slots=True)
class AttDef:
    name: str
    type: str  # CDATA | ID | IDREF
    required: bool


@dataclass
class Dtd:
    root_element_name: str
    elements: dict[str, ContentDef]
    attlists: dict[str, list[AttDef]] = field(default_factory=dict)

    def __post_init__(self):
        if self.root_element_name not in self.elements:
            raise DtdParseError(f"root element {self.root_element_name!r} is not defined")
        for name, cd in self.elements.items():
            for ref in element_refs(cd):
                if ref not in self.elements:
                    raise DtdParseError(f"element {name!r} references undefined element {ref!r}")
        for name, defs in self.attlists.items():
            ids = [a for a in defs if a.type == "ID"]
            if len(ids) > 1:
                raise DtdParseError(f"element {name!r} declares more than one ID attribute")

    def attribute_names(self, element: str) -> list[str]:
        return [a.name for a in self.attlists.get(element, [])]


def element_refs(cd: ContentDef) -> set[str]:
    """Element names occurring anywhere in a content definition."""
    return set(ordered_element_refs(cd))


def ordered_element_refs(cd: ContentDef) -> list[str]:
    """Distinct element names in left-to-right content-definition order."""
    out: list[str] = []
    seen: set[str] = set()

    def walk(c: ContentDef) -> None:
        if isinstance(c, ElementRef):
            if c.name not in seen:
                seen.add(c.name)
                out.append(c.name)
        elif isinstance(c, (Seq, Choice)):
            for item in c.items:
                walk(item)
        elif isinstance(c, (Opt, Star, Plus)):
            walk(c.item)

    walk(cd)
    return out


def content_size(cd: ContentDef) -> int:
    """Expression-tree node count, the size measure for the linearity bound."""
    if isinstance(cd, (Seq, Choice)):
        return 1 + sum(content_size(i) for i in cd.items)
    if isinstance(cd, (Opt, Star, Plus)):
        return 1 + content_size(cd.item)
    return 1


def dtd_size(d: Dtd) -> int:
    return (len(d.elements)
            + sum(content_size(cd) for cd in d.elements.values())
            + sum(len(defs) for defs in d.attlists.values()))


# ---------------------------------------------------------------------------
# Parsing

_NAME_RE = re.compile(r"[A-Za-z_:][\w.\-:]*")


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def line_col(self) -> tuple[int, int]:
        upto = self.text[: self.pos]
        line = upto.count("\n") + 1
        col = self.pos - (upto.rfind("\n") + 1) + 1
        return line, col

    def error(self, message: str) -> DtdParseError:
        line, col = self.line_col()
        return DtdParseError(message, line, col)

    def skip_space(self) -> None:
        while True:
            while self.pos < len(self.text) and self.text[self.pos].isspace():
                self.pos += 1
            if self.text.startswith("<!--", self.pos):
                end = self.text.find("-->", self.pos)
                if end < 0:
                    raise self.error("unterminated comment")
                self.pos = end + 3
            else:
                return

    def eof(self) -> bool:
        return self.pos >= len(self.text)

    def take(self, literal: str) -> bool:
        if self.text.startswith(literal, self.pos):
            self.pos += len(literal)
            return True
        return False

    def expect(self, literal: str) -> None:
        if not self.take(literal):
            raise self.error(f"expected {literal!r}")

    def name(self) -> str:
        m = _NAME_RE.match(self.text, self.pos)
        if not m:
            raise self.error("expected a name")
        self.pos = m.end()
        return m.group()

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""


def _parse_cp(sc: _Scanner) -> ContentDef:
    sc.skip_space()
    if sc.take("("):
        item = _parse_group(sc)
    else:
        item = ElementRef(sc.name())
    return _apply_suffix(sc, item)


def _apply_suffix(sc: _Scanner, item: ContentDef) -> ContentDef:
    if sc.take("?"):
        return Opt(item)
    if sc.take("*"):
        return Star(item)
    if sc.take("+"):
        return Plus(item)
    return item


def _parse_group(sc: _Scanner) -> ContentDef:
    # Opening '(' already consumed.
    items = [_parse_cp(sc)]
    sc.skip_space()
    sep = ""
    while sc.peek() in ",|":
        ch = sc.peek()
        if sep and ch != sep:
            raise sc.error("cannot mix ',' and '|' in one group")
        sep = ch
        sc.pos += 1
        items.append(_parse_cp(sc))
        sc.skip_space()
    sc.expect(")")
    if len(items) == 1:
        return items[0]
    return Seq(tuple(items)) if sep == "," else Choice(tuple(items))


def _parse_contentspec(sc: _Scanner) -> ContentDef:
    sc.skip_space()
    if sc.take("EMPTY"):
        return EMPTY
    if sc.take("ANY"):
        return ANY
    if sc.peek() != "(":
        raise sc.error("expected EMPTY, ANY or a parenthesized content model")
    mark = sc.pos
    sc.pos += 1
    sc.skip_space()
    if sc.take("#PCDATA"):
        sc.skip_space()
        names = []
        while sc.take("|"):
            sc.skip_space()
            names.append(sc.name())
            sc.skip_space()
        sc.expect(")")
        sc.take("*")
        # Mixed models with names validate as ANY; plain (#PCDATA) stays exact.
        return ANY if names else PCDATA
    sc.pos = mark
    sc.expect("(")
    return _apply_suffix(sc, _parse_group(sc))


def parse_dtd(text: str, root_name: str | None = None) -> Dtd:
    """Parse ELEMENT/ATTLIST declarations.

    The designated root element name defaults to the first declared element,
    since DTD syntax itself has no slot for it.
    """
    sc = _Scanner(text)
    elements: dict[str, ContentDef] = {}
    attlists: dict[str, list[AttDef]] = {}
    while True:
        sc.skip_space()
        if sc.eof():
            break
        if sc.take("<!ELEMENT"):
            sc.skip_space()
            name = sc.name()
            if name in elements:
                raise sc.error(f"duplicate element definition {name!r}")
            elements[name] = _parse_contentspec(sc)
            sc.skip_space()
            sc.expect(">")
        elif sc.take("<!ATTLIST"):
            sc.skip_space()
            elem = sc.name()
            defs = attlists.setdefault(elem, [])
            while True:
                sc.skip_space()
                if sc.take(">"):
                    break
                aname = sc.name()
                sc.skip_space()
                atype = sc.name()
                if atype not in ("CDATA", "ID", "IDREF"):
                    raise sc.error(f"unsupported attribute type {atype!r}")
                sc.skip_space()
                sc.expect("#")
                presence = sc.name()
                if presence not in ("REQUIRED", "IMPLIED"):
                    raise sc.error(f"unsupported attribute presence #{presence}")
                defs.append(AttDef(aname, atype, presence == "REQUIRED"))
        else:
            raise sc.error("expected <!ELEMENT or <!ATTLIST")

    if not elements:
        raise DtdParseError("no element declarations found")
    root = root_name if root_name is not None else next(iter(elements))
    for elem in attlists:
        if elem not in elements:
            raise DtdParseError(f"ATTLIST for undefined element {elem!r}")
    return Dtd(root_element_name=root, elements=elements, attlists=attlists)


# ---------------------------------------------------------------------------
# Content-model matching (epsilon-NFA simulation)


@lru_cache(maxsize=4096)
def _compile_nfa(cd: ContentDef) -> tuple[int, int, tuple[tuple[int, str | None, int], ...]]:
    """Thompson construction: returns (start, accept, transitions); a label of
    None marks an epsilon edge."""
    transitions: list[tuple[int, str | None, int]] = []
    counter = [0]

    def fresh() -> int:
        counter[0] += 1
        return counter[0] - 1

    def build(c: ContentDef) -> tuple[int, int]:
        if isinstance(c, ElementRef):
            s, a = fresh(), fresh()
            transitions.append((s, c.name, a))
            return s, a
        if isinstance(c, Seq):
            s, a = build(c.items[0])
            for item in c.items[1:]:
                s2, a2 = build(item)
                transitions.append((a, None, s2))
                a = a2
            return s, a
        if isinstance(c, Choice):
            s, a = fresh(), fresh()
            for item in c.items:
                si, ai = build(item)
                transitions.append((s, None, si))
                transitions.append((ai, None, a))
            return s, a
        if isinstance(c, Opt):
            s, a = build(c.item)
            transitions.append((s, None, a))
            return s, a
        if isinstance(c, Star):
            si, ai = build(c.item)
            s, a = fresh(), fresh()
            transitions.extend([(s, None, si), (ai, None, a), (s, None, a), (ai, None, si)])
            return s, a
        if isinstance(c, Plus):
            si, ai = build(c.item)
            s, a = fresh(), fresh()
            transitions.extend([(s, None, si), (ai, None, a), (ai, None, si)])
            return s, a
        raise ValueError(f"cannot compile content marker {c!r}")

    start, accept = build(cd)
    return start, accept, tuple(transitions)


def content_model_matches(cd: ContentDef, child_labels: Sequence[str], has_text: bool = False) -> bool:
    """Language membership of the child-element sequence in the content model.

    Matching simulates a nondeterministic automaton; the 1-unambiguity rule of
    real DTDs is deliberately not enforced.
    """
    if cd == EMPTY_SYM:
        raise ValueError("content model still contains the empty-content placeholder")
    if cd == ANY:
        return True
    if cd == EMPTY:
        return not child_labels and not has_text
    if cd == PCDATA:
        return not child_labels
    if has_text:
        return False

    start, accept, transitions = _compile_nfa(cd)
    eps: dict[int, list[int]] = {}
    byname: dict[tuple[int, str], list[int]] = {}
    for s, lbl, t in transitions:
        if lbl is None:
            eps.setdefault(s, []).append(t)
        else:
            byname.setdefault((s, lbl), []).append(t)

    def closure(states: set[int]) -> set[int]:
        stack = list(states)
        seen = set(states)
        while stack:
            s = stack.pop()
            for t in eps.get(s, ()):
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return seen

    current = closure({start})
    for label in child_labels:
        nxt: set[int] = set()
        for s in current:
            nxt.update(byname.get((s, label), ()))
        if not nxt:
            return False
        current = closure(nxt)
    return accept in current


# ---------------------------------------------------------------------------
# Conformance


def validate_document(doc: Document, d: Dtd, strict: bool = False) -> list[str]:
    """All conformance violations; empty list means the document conforms.

    Strict mode additionally requires the root to carry the DTD's designated
    root element name.
    """
    diags: list[str] = []

    def where(n: NodeId) -> str:
        return "/" + "/".join(doc.path_of(n))

    if strict and doc.label(doc.root) != d.root_element_name:
        diags.append(
            f"root element is {doc.label(doc.root)!r}, expected {d.root_element_name!r}")

    id_values: set[str] = set()
    idref_uses: list[tuple[NodeId, str]] = []
    for n in doc.complex_ids():
        node = doc.nodes[n]
        if node.attribute:
            continue
        label = node.label
        if label not in d.elements:
            diags.append(f"undeclared element {label!r} at {where(n)}")
            continue
        declared = {a.name: a for a in d.attlists.get(label, [])}
        seen: set[str] = set()
        for attr in doc.attribute_children(n):
            aname = doc.label(attr)
            seen.add(aname)
            decl = declared.get(aname)
            if decl is None:
                diags.append(f"undeclared attribute {aname!r} on {where(n)}")
                continue
            value = doc.attribute_value(attr)
            if decl.type == "ID":
                if value in id_values:
                    diags.append(f"duplicate ID value {value!r} at {where(n)}")
                id_values.add(value)
            elif decl.type == "IDREF":
                idref_uses.append((n, value))
        for aname, decl in declared.items():
            if decl.required and aname not in seen:
                diags.append(f"required attribute {aname!r} missing on {where(n)}")
        child_labels = [doc.label(c) for c in doc.element_children(n)]
        has_text = any(doc.is_atomic(c) for c in doc.children(n))
        if not content_model_matches(d.elements[label], child_labels, has_text):
            diags.append(
                f"content of {where(n)} does not match the model for {label!r}: "
                f"[{', '.join(child_labels)}]{' + text' if has_text else ''}")

    for n, value in idref_uses:
        if value not in id_values:
            diags.append(f"IDREF value {value!r} at {where(n)} matches no ID")
    return diags


def conforms(doc: Document, d: Dtd) -> bool:
    return not validate_document(doc, d, strict=False)


def strictly_conforms(doc: Document, d: Dtd) -> bool:
    return not validate_document(doc, d, strict=True)


# ---------------------------------------------------------------------------
# Structural relations


def descendant_map(d: Dtd) -> dict[str, set[str]]:
    """Strict element-name descendant relation, as a fixpoint over content
    definition references (reached in at most |elements| rounds)."""
    direct = {name: element_refs(cd) for name, cd in d.elements.items()}
    desc = {name: set(refs) for name, refs in direct.items()}
    changed = True
    while changed:
        changed = False
        for name in desc:
            extra: set[str] = set()
            for child in desc[name]:
                extra |= direct.get(child, set())
            before = len(desc[name])
            desc[name] |= extra
            if len(desc[name]) != before:
                changed = True
    return desc


def dtd_descendant(d: Dtd, e: str, e2: str) -> bool:
    """True when e2 can be nested (strictly) inside an element named e."""
    if e not in d.elements or e2 not in d.elements:
        raise ValueError("dtd_descendant is defined over declared element names")
    return e2 in descendant_map(d)[e]


# ---------------------------------------------------------------------------
# Serialization


def _render_content(cd: ContentDef, top: bool = False) -> str:
    if cd == EMPTY_SYM:
        raise ValueError("cannot serialize a content model containing the empty-content placeholder")
    if cd == EMPTY or cd == ANY:
        return cd.kind
    if cd == PCDATA:
        return "(#PCDATA)"
    if isinstance(cd, ElementRef):
        return f"({cd.name})" if top else cd.name
    if isinstance(cd, Seq):
        return "(" + ",".join(_render_content(i) for i in cd.items) + ")"
    if isinstance(cd, Choice):
        return "(" + "|".join(_render_content(i) for i in cd.items) + ")"
    suffix = {"Opt": "?", "Star": "*", "Plus": "+"}[type(cd).__name__]
    inner = cd.item
    body = _render_content(inner)
    if isinstance(inner, (Opt, Star, Plus)) or (inner == PCDATA):
        body = f"({body})"
    rendered = body + suffix
    if top and not body.startswith("("):
        rendered = f"({body}{suffix})"
    return rendered


def serialize_dtd(d: Dtd) -> str:
    lines = []
    for name, cd in d.elements.items():
        lines.append(f"<!ELEMENT {name} {_render_content(cd, top=True)}>")
    for name, defs in d.attlists.items():
        parts = " ".join(
            f"{a.name} {a.type} {'#REQUIRED' if a.required else '#IMPLIED'}" for a in defs)
        lines.append(f"<!ATTLIST {name} {parts}>")
    return "\n".join(lines) + "\n"
