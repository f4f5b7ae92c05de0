"""On-disk catalogs and query runs.

A catalog pairs a DTD with documents that strictly conform to it; the store
is a set of catalogs (one directory each: ``catalog.dtd``, ``docs/*.xml``,
``meta.json``, and ``runs/<run-id>/``).  Every query run materializes its
results as a new first-class catalog whose DTD is the synthesized result
DTD, so requerying previous results needs no special code path.  Writes are
serialized by a store-wide lock; readers need no coordination.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace as dc_replace
from pathlib import Path
from typing import Optional

from filelock import FileLock

from . import dtd as dtdmod
from .aggregation import (attach_aggregates, check_agg_constraints,
                          compute_aggregates, filter_output_set)
from .dtd import ANY, AttDef, Dtd, parse_dtd, serialize_dtd
from .evaluator import evaluate_full, retrieval_matching
from .query import (AbstractQuery, ConcreteQueryNode, QueryDocument,
                    describable_by, serialize_query_document, translate,
                    validate_query_against_dtd)
from .resultdtd import create_result_dtd
from .xmlmodel import Document, XmlParseError, XmlValidationError, \
    parse_document, serialize_document


class StoreError(ValueError):
    pass


class UnknownCatalogError(StoreError):
    pass


class QueryValidationError(StoreError):
    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = diagnostics


@dataclass
class Catalog:
    id: str
    dtd: Dtd
    documents: list[Document]
    origin: dict
    doc_names: list[str] = field(default_factory=list)


@dataclass
class Rejection:
    name: str
    diagnostics: list[str]


@dataclass
class QueryRun:
    id: str
    catalog_id: str
    query: QueryDocument
    abstract: AbstractQuery
    results: list[Document]
    result_dtd: Dtd
    derived_catalog_id: str


def _safe_name(name: str) -> str:
    if not re.fullmatch(r"[\w.\-]+", name):
        raise StoreError(f"catalog name {name!r} may use only word characters, dots and dashes")
    return name


def _wrap_text(root_label: str, text: str) -> str:
    body = re.sub(r"^\s*<\?xml[^>]*\?>", "", text, count=1)
    return f"<{root_label}>{body}</{root_label}>"


class CatalogStore:
    """File-backed database of catalogs."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = FileLock(str(self.root / ".lock"))

    # -- catalog access ----------------------------------------------------

    def catalog_ids(self) -> list[str]:
        return sorted(p.name for p in self.root.iterdir()
                      if p.is_dir() and (p / "meta.json").exists())

    def _catalog_dir(self, catalog_id: str) -> Path:
        path = self.root / catalog_id
        if not (path / "meta.json").exists():
            raise UnknownCatalogError(f"unknown catalog {catalog_id!r}")
        return path

    def load_catalog(self, catalog_id: str) -> Catalog:
        path = self._catalog_dir(catalog_id)
        meta = json.loads((path / "meta.json").read_text())
        d = parse_dtd((path / "catalog.dtd").read_text(),
                      root_name=meta.get("rootElement"))
        documents, names = [], []
        for name in meta["documents"]:
            documents.append(parse_document((path / "docs" / name).read_text(), d))
            names.append(name)
        return Catalog(id=catalog_id, dtd=d, documents=documents,
                       origin=meta.get("origin", {"kind": "ingested"}), doc_names=names)

    def catalog_summaries(self) -> list[dict]:
        out = []
        for cid in self.catalog_ids():
            meta = json.loads((self.root / cid / "meta.json").read_text())
            out.append({"id": cid, "origin": meta.get("origin"),
                        "documentCount": len(meta["documents"]),
                        "rootElement": meta.get("rootElement")})
        return out

    def get_dtd_tree(self, catalog_id: str) -> dict:
        """Per element: attribute names and the element names reachable one
        step through its content definition; what a form builder needs to
        expand a node."""
        catalog = self.load_catalog(catalog_id)
        d = catalog.dtd
        elements = {}
        for name, cd in d.elements.items():
            if cd == ANY:
                children = sorted(d.elements)
            else:
                children = dtdmod.ordered_element_refs(cd)
            elements[name] = {
                "children": children,
                "attributes": d.attribute_names(name),
                "pcdata": cd == dtdmod.PCDATA,
            }
        return {"root": d.root_element_name, "elements": elements}

    def validate_catalog(self, catalog_id: str) -> dict[str, list[str]]:
        catalog = self.load_catalog(catalog_id)
        report = {}
        for name, doc in zip(catalog.doc_names, catalog.documents):
            diags = dtdmod.validate_document(doc, catalog.dtd, strict=True)
            if diags:
                report[name] = diags
        return report

    # -- ingest ------------------------------------------------------------

    def ingest_catalog(self, name: str, dtd_text: str,
                       documents: list[tuple[str, str]],
                       wrap_root: Optional[str] = None) -> tuple[Catalog, list[Rejection]]:
        """Creates a catalog from DTD text and (name, xml) pairs, rejecting
        documents that fail strict conformance.  With ``wrap_root`` every
        document is first wrapped in a new root element and the DTD gains a
        matching definition (the rooting transformation)."""
        _safe_name(name)
        with self._lock:
            if (self.root / name).exists():
                raise StoreError(f"catalog {name!r} already exists")
            base = parse_dtd(dtd_text)
            rejections: list[Rejection] = []

            if wrap_root is not None:
                texts = []
                root_labels: list[str] = []
                for doc_name, text in documents:
                    wrapped = _wrap_text(wrap_root, text)
                    texts.append((doc_name, wrapped))
                    m = re.search(r"<([\w.\-:]+)", text)
                    if m and m.group(1) in base.elements and m.group(1) not in root_labels:
                        root_labels.append(m.group(1))
                if wrap_root in base.elements:
                    raise StoreError(f"wrap root {wrap_root!r} is already defined in the DTD")
                refs = tuple(dtdmod.ElementRef(r) for r in root_labels)
                wrap_cd = (refs[0] if len(refs) == 1
                           else dtdmod.Choice(refs) if refs else dtdmod.EMPTY)
                elements = {wrap_root: wrap_cd, **base.elements}
                d = Dtd(root_element_name=wrap_root, elements=elements,
                        attlists=dict(base.attlists))
                documents = texts
            else:
                d = base

            accepted: list[tuple[str, Document, str]] = []
            for doc_name, text in documents:
                try:
                    doc = parse_document(text, d)
                except (XmlParseError, XmlValidationError) as exc:
                    rejections.append(Rejection(doc_name, [str(exc)]))
                    continue
                diags = dtdmod.validate_document(doc, d, strict=True)
                if diags:
                    rejections.append(Rejection(doc_name, diags))
                else:
                    accepted.append((doc_name, doc, text))

            catalog = self._persist_catalog(name, d, accepted, {"kind": "ingested"})
            return catalog, rejections

    def _persist_catalog(self, name: str, d: Dtd,
                         accepted: list[tuple[str, Document, str]],
                         origin: dict) -> Catalog:
        path = self.root / name
        (path / "docs").mkdir(parents=True)
        (path / "catalog.dtd").write_text(serialize_dtd(d))
        for doc_name, _, text in accepted:
            (path / "docs" / doc_name).write_text(text)
        meta = {"id": name, "origin": origin, "rootElement": d.root_element_name,
                "documents": [doc_name for doc_name, _, _ in accepted]}
        (path / "meta.json").write_text(json.dumps(meta, indent=2))
        return Catalog(id=name, dtd=d, documents=[doc for _, doc, _ in accepted],
                       origin=origin, doc_names=[n for n, _, _ in accepted])

    # -- query runs ----------------------------------------------------------

    def run_query(self, catalog_id: str, query: QueryDocument | ConcreteQueryNode) -> QueryRun:
        """Translate, evaluate over the catalog, filter/attach aggregates,
        synthesize the result DTD and materialize the derived catalog."""
        if isinstance(query, ConcreteQueryNode):
            query = QueryDocument(query=query)
        catalog = self.load_catalog(catalog_id)

        if query.mode == "child":
            diags = validate_query_against_dtd(query.query, catalog.dtd)
            if diags:
                raise QueryValidationError(diags)
            documents = catalog.documents
        else:
            if not query.ontology:
                raise QueryValidationError(
                    ["descendant-mode queries must carry a non-empty ontology"])
            documents = []
            for cid in self.catalog_ids():
                cat = catalog if cid == catalog_id else self.load_catalog(cid)
                documents.extend(doc for doc in cat.documents
                                 if describable_by(doc, query.ontology))

        aq = translate(query.query, mode=query.mode, ontology=query.ontology)
        results: list[Document] = []
        for doc in documents:
            result = self._evaluate_one(doc, aq)
            if result is not None:
                results.append(result)

        if query.mode == "child":
            result_dtd = create_result_dtd(aq, catalog.dtd)
        else:
            result_dtd = _any_stub_dtd(aq, results)

        for res in results:
            # The conformance theorem, enforced: a failure here is an engine
            # bug, not a user error.
            residual = dtdmod.validate_document(res, result_dtd, strict=True)
            if residual:
                raise AssertionError(
                    f"result document does not conform to the result DTD: {residual}")

        with self._lock:
            run_n = len(self._run_dirs(catalog_id)) + 1
            run_id = f"{catalog_id}-run{run_n:03d}"
            derived_id = f"{run_id}-results"
            run_dir = self.root / catalog_id / "runs" / run_id
            (run_dir / "results").mkdir(parents=True)
            serialized = [serialize_document(r) for r in results]
            accepted = [(f"result{i:03d}.xml", doc, text)
                        for i, (doc, text) in enumerate(zip(results, serialized))]
            self._persist_catalog(derived_id, result_dtd, accepted,
                                  {"kind": "derived", "run": run_id, "from": catalog_id})
            (run_dir / "meta.json").write_text(json.dumps({
                "id": run_id, "catalog": catalog_id,
                "derivedCatalog": derived_id, "resultCount": len(results)}, indent=2))
            (run_dir / "query.json").write_text(serialize_query_document(query))
            (run_dir / "result.dtd").write_text(serialize_dtd(result_dtd))
            for (fname, _, text) in accepted:
                (run_dir / "results" / fname).write_text(text)

        return QueryRun(id=run_id, catalog_id=catalog_id, query=query, abstract=aq,
                        results=results, result_dtd=result_dtd,
                        derived_catalog_id=derived_id)

    def _evaluate_one(self, doc: Document, aq: AbstractQuery) -> Optional[Document]:
        outset, array = evaluate_full(doc, aq)
        if not aq.has_aggregation():
            if not outset.nodes:
                return None
            return doc.project(set(outset.nodes))
        mu = retrieval_matching(array)
        values = compute_aggregates(doc, aq, mu)
        passing = check_agg_constraints(values, aq)
        failing = {v.group for v in values} - passing
        outset = filter_output_set(doc, outset, failing)
        if not outset.nodes:
            return None
        projected, mapping = doc.project_with_map(set(outset.nodes))
        assert projected is not None
        render = [dc_replace(v, group=mapping[v.group])
                  for v in values
                  if v.group in mapping and v.group in passing
                  and v.fn in aq.aggregates[v.node]]
        return attach_aggregates(projected, render)

    def _run_dirs(self, catalog_id: str) -> list[Path]:
        runs = self.root / catalog_id / "runs"
        if not runs.exists():
            return []
        return sorted(p for p in runs.iterdir() if p.is_dir())

    def get_run(self, run_id: str) -> dict:
        for cid in self.catalog_ids():
            run_dir = self.root / cid / "runs" / run_id
            if (run_dir / "meta.json").exists():
                meta = json.loads((run_dir / "meta.json").read_text())
                results = sorted((run_dir / "results").glob("*.xml"))
                return {
                    "runId": meta["id"],
                    "catalogId": meta["catalog"],
                    "resultCount": meta["resultCount"],
                    "derivedCatalogId": meta["derivedCatalog"],
                    "query": json.loads((run_dir / "query.json").read_text()),
                    "resultDtd": (run_dir / "result.dtd").read_text(),
                    "results": [p.read_text() for p in results],
                }
        raise UnknownCatalogError(f"unknown run {run_id!r}")


def _any_stub_dtd(aq: AbstractQuery, results: list[Document]) -> Dtd:
    """Descendant-mode runs span heterogeneous DTDs, so only an ANY-based
    stub can describe the results; it still enables requerying."""
    root = aq.labels[aq.root]
    elements: dict[str, dtdmod.ContentDef] = {root: ANY}
    attlists: dict[str, list[AttDef]] = {}
    for doc in results:
        for n in doc.complex_ids():
            node = doc.nodes[n]
            if node.attribute:
                parent = doc.nodes[node.parent]
                attlists.setdefault(parent.label, [])
                if node.label not in [a.name for a in attlists[parent.label]]:
                    attlists[parent.label].append(AttDef(node.label, "CDATA", False))
            else:
                elements.setdefault(node.label, ANY)
    attlists = {e: defs for e, defs in attlists.items() if e in elements}
    return Dtd(root_element_name=root, elements=elements, attlists=attlists)
