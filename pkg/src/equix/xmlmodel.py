"""XML documents as rooted labeled trees with ID/IDREF indirection.

A document is a tree of complex nodes (elements and attributes) and atomic
nodes (character data).  Attributes are modeled uniformly as complex child
nodes carrying a single atomic value child, so queries can constrain them
exactly like elements.  IDREF attributes additionally link to the element
owning the matching ID; those links are navigated only by textual content,
never by the tree relations.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Iterator, Optional

NodeId = int


class XmlParseError(ValueError):
    """Malformed XML input; carries 1-based line/column when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class XmlValidationError(ValueError):
    """Document-level constraint violation found while building a tree."""


class ProjectionError(ValueError):
    """The keep set handed to project() is not closed under ancestors."""


@dataclass(slots=True)
class XmlNode:
    """One tree node.  ``label`` holds the element/attribute name for complex
    nodes and the character data itself for atomic ones."""

    label: str
    atomic: bool = False
    attribute: bool = False
    parent: Optional[NodeId] = None
    children: list[NodeId] = field(default_factory=list)


@dataclass
class Document:
    """Immutable-by-convention parse tree.

    Node ids are dense integers in document (pre-order) position, so they can
    index arrays directly.  ``id_index`` maps each ID value to the element
    owning it, ``id_atoms`` to the atomic node holding the value, and
    ``idref_links`` maps every resolved IDREF attribute node to its target
    element.  ``atom_class`` identifies the value atoms of an ID and of the
    IDREFs pointing at it: the source drew them as one shared value node, and
    textual content must count that shared node once.
    """

    nodes: list[XmlNode]
    root: NodeId = 0
    id_index: dict[str, NodeId] = field(default_factory=dict)
    id_atoms: dict[str, NodeId] = field(default_factory=dict)
    idref_links: dict[NodeId, NodeId] = field(default_factory=dict)
    atom_class: dict[NodeId, NodeId] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.nodes)

    def label(self, n: NodeId) -> str:
        return self.nodes[n].label

    def is_atomic(self, n: NodeId) -> bool:
        return self.nodes[n].atomic

    def parent(self, n: NodeId) -> Optional[NodeId]:
        return self.nodes[n].parent

    def children(self, n: NodeId) -> list[NodeId]:
        return self.nodes[n].children

    def element_children(self, n: NodeId) -> list[NodeId]:
        """Complex non-attribute children, i.e. subelements."""
        return [c for c in self.nodes[n].children
                if not self.nodes[c].atomic and not self.nodes[c].attribute]

    def attribute_children(self, n: NodeId) -> list[NodeId]:
        return [c for c in self.nodes[n].children if self.nodes[c].attribute]

    def complex_ids(self) -> Iterator[NodeId]:
        for i, node in enumerate(self.nodes):
            if not node.atomic:
                yield i

    def attribute_value(self, attr: NodeId) -> str:
        """Value of an attribute node: its single atomic child, or ''."""
        for c in self.nodes[attr].children:
            if self.nodes[c].atomic:
                return self.nodes[c].label
        return ""

    def textual_content(self, n: NodeId) -> str:
        """Space-joined data below ``n``, following IDREF links, each node
        counted at most once per call."""
        parts: list[str] = []
        visited: set[NodeId] = set()

        # Direct children first, indirect (IDREF target) last.
        def walk(m: NodeId) -> None:
            rep = self.atom_class.get(m, m)
            if rep in visited:
                return
            visited.add(rep)
            node = self.nodes[m]
            if node.atomic:
                if node.label:
                    parts.append(node.label)
                return
            for c in node.children:
                walk(c)
            target = self.idref_links.get(m)
            if target is not None:
                walk(target)

        walk(n)
        return " ".join(parts)

    def path_of(self, n: NodeId) -> tuple[str, ...]:
        """Labels from the root down to ``n`` inclusive."""
        if self.nodes[n].atomic:
            raise ValueError("path_of is defined for complex nodes only")
        labels: list[str] = []
        cur: Optional[NodeId] = n
        while cur is not None:
            labels.append(self.nodes[cur].label)
            cur = self.nodes[cur].parent
        labels.reverse()
        return tuple(labels)

    def ancestors(self, n: NodeId) -> set[NodeId]:
        out: set[NodeId] = set()
        cur = self.nodes[n].parent
        while cur is not None:
            out.add(cur)
            cur = self.nodes[cur].parent
        return out

    def descendants(self, n: NodeId) -> set[NodeId]:
        out: set[NodeId] = set()
        stack = list(self.nodes[n].children)
        while stack:
            m = stack.pop()
            out.add(m)
            stack.extend(self.nodes[m].children)
        return out

    def project(self, keep: set[NodeId]) -> Optional["Document"]:
        doc, _ = self.project_with_map(keep)
        return doc

    def project_with_map(self, keep: set[NodeId]) -> tuple[Optional["Document"], dict[NodeId, NodeId]]:
        """Like project() but also returns the old-id -> new-id mapping."""
        if not keep:
            return None, {}
        for n in keep:
            p = self.nodes[n].parent
            if p is not None and p not in keep:
                raise ProjectionError(f"keep set is not ancestor-closed: node {n} kept without its parent")
        if self.root not in keep:
            raise ProjectionError("keep set is not ancestor-closed: root missing")

        builder = DocumentBuilder()
        mapping: dict[NodeId, NodeId] = {}
        for old in sorted(keep):  # ascending ids = parents before children
            node = self.nodes[old]
            new_parent = mapping[node.parent] if node.parent is not None else None
            mapping[old] = builder.add_node(new_parent, node.label,
                                            atomic=node.atomic, attribute=node.attribute)
        new_doc = builder.build()
        for value, elem in self.id_index.items():
            atom = self.id_atoms.get(value)
            if elem in keep and atom in keep:
                new_doc.id_index[value] = mapping[elem]
                new_doc.id_atoms[value] = mapping[atom]
        for source, target in self.idref_links.items():
            if source in keep and target in keep:
                new_doc.idref_links[mapping[source]] = mapping[target]
        _link_value_atoms(new_doc)
        return new_doc, mapping


class DocumentBuilder:
    """Grows a Document top-down; ids come out in pre-order."""

    def __init__(self) -> None:
        self._nodes: list[XmlNode] = []
        self._id_index: dict[str, NodeId] = {}
        self._id_atoms: dict[str, NodeId] = {}
        self._idref_values: list[tuple[NodeId, str]] = []

    def add_node(self, parent: Optional[NodeId], label: str,
                 atomic: bool = False, attribute: bool = False) -> NodeId:
        nid = len(self._nodes)
        if parent is None:
            if nid != 0:
                raise XmlValidationError("document already has a root")
        else:
            if self._nodes[parent].atomic:
                raise XmlValidationError("atomic nodes cannot have children")
            self._nodes[parent].children.append(nid)
        self._nodes.append(XmlNode(label=label, atomic=atomic, attribute=attribute, parent=parent))
        return nid

    def element(self, parent: Optional[NodeId], label: str) -> NodeId:
        return self.add_node(parent, label)

    def text(self, parent: NodeId, data: str) -> NodeId:
        return self.add_node(parent, data, atomic=True)

    def attribute(self, parent: NodeId, name: str, value: str) -> NodeId:
        attr = self.add_node(parent, name, attribute=True)
        self.add_node(attr, value, atomic=True)
        return attr

    def declare_id(self, element: NodeId, attr: NodeId, value: str) -> None:
        if value in self._id_index:
            raise XmlValidationError(f"duplicate ID value {value!r}")
        self._id_index[value] = element
        for c in self._nodes[attr].children:
            if self._nodes[c].atomic:
                self._id_atoms[value] = c

    def declare_idref(self, attr: NodeId, value: str) -> None:
        self._idref_values.append((attr, value))

    def build(self) -> Document:
        if not self._nodes:
            raise XmlValidationError("empty document")
        doc = Document(nodes=self._nodes, root=0,
                       id_index=self._id_index, id_atoms=self._id_atoms)
        for attr, value in self._idref_values:
            target = self._id_index.get(value)
            if target is not None:  # dangling IDREFs are tolerated here
                doc.idref_links[attr] = target
        _link_value_atoms(doc)
        return doc


def _link_value_atoms(doc: Document) -> None:
    """Join each IDREF's value atom with the ID's value atom: both stand for
    the single shared value node of the underlying graph."""
    doc.atom_class.clear()
    for source in doc.idref_links:
        src_atom = None
        for c in doc.nodes[source].children:
            if doc.nodes[c].atomic:
                src_atom = c
        if src_atom is None:
            continue
        id_atom = doc.id_atoms.get(doc.nodes[src_atom].label)
        if id_atom is not None:
            doc.atom_class[src_atom] = id_atom
            doc.atom_class[id_atom] = id_atom


def parse_document(text: str, dtd=None) -> Document:
    """Parse XML source into a Document.

    When a Dtd is supplied its attribute declarations drive ID/IDREF
    resolution; without one no links are recorded.  Dangling IDREFs are
    tolerated (conformance checking reports them); duplicate ID values are
    an error.
    """
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        line, col = exc.position if exc.position else (None, None)
        raise XmlParseError(str(exc.msg if hasattr(exc, "msg") else exc), line, col) from None

    builder = DocumentBuilder()
    attr_types: dict[str, dict[str, str]] = {}
    if dtd is not None:
        attr_types = {elem: {a.name: a.type for a in defs}
                      for elem, defs in dtd.attlists.items()}

    def walk(elem: ET.Element, parent: Optional[NodeId]) -> None:
        nid = builder.element(parent, elem.tag)
        types = attr_types.get(elem.tag, {})
        for name, value in elem.attrib.items():
            attr = builder.attribute(nid, name, value)
            kind = types.get(name)
            if kind == "ID":
                builder.declare_id(nid, attr, value)
            elif kind == "IDREF":
                builder.declare_idref(attr, value)
        if elem.text and elem.text.strip():
            builder.text(nid, elem.text)
        for child in elem:
            walk(child, nid)
            if child.tail and child.tail.strip():
                builder.text(nid, child.tail)

    walk(root, None)
    return builder.build()


_TEXT_ESCAPES = {"&": "&amp;", "<": "&lt;", ">": "&gt;"}
_ATTR_ESCAPES = {**_TEXT_ESCAPES, '"': "&quot;"}


def _escape(s: str, table: dict[str, str]) -> str:
    for raw, rep in table.items():
        s = s.replace(raw, rep)
    return s


def serialize_document(doc: Document) -> str:
    """Emit well-formed XML; attribute nodes become attributes again."""

    def render(n: NodeId) -> str:
        node = doc.nodes[n]
        if node.atomic:
            return _escape(node.label, _TEXT_ESCAPES)
        attrs = "".join(
            f' {doc.nodes[c].label}="{_escape(doc.attribute_value(c), _ATTR_ESCAPES)}"'
            for c in node.children if doc.nodes[c].attribute
        )
        content = "".join(render(c) for c in node.children if not doc.nodes[c].attribute)
        if not content:
            return f"<{node.label}{attrs}/>"
        return f"<{node.label}{attrs}>{content}</{node.label}>"

    return render(doc.root)


def structurally_equal(a: Document, b: Document) -> bool:
    """Tree equality on labels/kinds/order, ignoring node ids."""

    def eq(n: NodeId, m: NodeId) -> bool:
        na, nb = a.nodes[n], b.nodes[m]
        if (na.label, na.atomic, na.attribute) != (nb.label, nb.atomic, nb.attribute):
            return False
        if len(na.children) != len(nb.children):
            return False
        return all(eq(c, d) for c, d in zip(na.children, nb.children))

    return eq(a.root, b.root)
