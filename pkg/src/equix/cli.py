"""Command-line front end: ingest catalogs, validate them, run queries, and
serve the HTTP API.

Exit codes: 0 success, 1 validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .dtd import DtdParseError, serialize_dtd
from .query import QueryFormatError, parse_query_document
from .store import CatalogStore, QueryValidationError, StoreError
from .xmlmodel import XmlParseError, serialize_document

DEFAULT_STORE = "equix-store"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="equix",
                                     description="Search processor for XML catalogs")
    parser.add_argument("--store", default=DEFAULT_STORE,
                        help=f"store directory (default: {DEFAULT_STORE})")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, **kwargs) -> argparse.ArgumentParser:
        p = sub.add_parser(name, **kwargs)
        # accepted in either position: `equix --store D cmd` or `equix cmd --store D`
        p.add_argument("--store", default=argparse.SUPPRESS)
        return p

    p = add("ingest", help="create a catalog from a DTD and documents")
    p.add_argument("--name", required=True)
    p.add_argument("--dtd", required=True, type=Path)
    p.add_argument("--docs", required=True, type=Path, help="directory of .xml files")
    p.add_argument("--wrap-root", default=None,
                   help="wrap every document in this new root element")

    p = add("validate", help="re-validate a catalog against its DTD")
    p.add_argument("--catalog", required=True)

    p = add("query", help="run a query file against a catalog")
    p.add_argument("--catalog", required=True)
    p.add_argument("--query", required=True, type=Path)
    p.add_argument("--out", type=Path, default=None, help="write result documents here")
    p.add_argument("--emit-dtd", type=Path, default=None, help="write the result DTD here")

    add("catalogs", help="list catalogs")

    p = add("serve", help="serve the HTTP API")
    p.add_argument("--port", type=int, default=8410)
    p.add_argument("--host", default="127.0.0.1")

    return parser


def _cmd_ingest(store: CatalogStore, args) -> int:
    docs = sorted(args.docs.glob("*.xml"))
    documents = [(p.name, p.read_text()) for p in docs]
    try:
        catalog, rejections = store.ingest_catalog(
            args.name, args.dtd.read_text(), documents, wrap_root=args.wrap_root)
    except (StoreError, DtdParseError, XmlParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"catalog {catalog.id}: {len(catalog.documents)} document(s) ingested")
    for r in rejections:
        print(f"rejected {r.name}:", file=sys.stderr)
        for d in r.diagnostics:
            print(f"  - {d}", file=sys.stderr)
    return 1 if rejections else 0


def _cmd_validate(store: CatalogStore, args) -> int:
    try:
        report = store.validate_catalog(args.catalog)
    except StoreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not report:
        print("ok")
        return 0
    for name, diags in report.items():
        print(f"{name}:", file=sys.stderr)
        for d in diags:
            print(f"  - {d}", file=sys.stderr)
    return 1


def _cmd_query(store: CatalogStore, args) -> int:
    try:
        qdoc = parse_query_document(args.query.read_text())
        run = store.run_query(args.catalog, qdoc)
    except (QueryFormatError, QueryValidationError, StoreError) as exc:
        if isinstance(exc, QueryValidationError):
            for d in exc.diagnostics:
                print(f"invalid query: {d}", file=sys.stderr)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"run {run.id}: {len(run.results)} result(s); derived catalog {run.derived_catalog_id}")
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        for i, doc in enumerate(run.results):
            (args.out / f"result{i:03d}.xml").write_text(serialize_document(doc))
        print(f"results written to {args.out}")
    if args.emit_dtd:
        args.emit_dtd.write_text(serialize_dtd(run.result_dtd))
        print(f"result DTD written to {args.emit_dtd}")
    return 0


def _cmd_catalogs(store: CatalogStore, args) -> int:
    for summary in store.catalog_summaries():
        origin = summary["origin"] or {}
        kind = origin.get("kind", "ingested")
        extra = f" (run {origin['run']})" if kind == "derived" else ""
        print(f"{summary['id']}: {summary['documentCount']} doc(s), "
              f"root {summary['rootElement']}, {kind}{extra}")
    return 0


def _cmd_serve(store: CatalogStore, args) -> int:
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(store.root), host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    store = CatalogStore(args.store)
    handlers = {
        "ingest": _cmd_ingest,
        "validate": _cmd_validate,
        "query": _cmd_query,
        "catalogs": _cmd_catalogs,
        "serve": _cmd_serve,
    }
    return handlers[args.command](store, args)


if __name__ == "__main__":
    sys.exit(main())
