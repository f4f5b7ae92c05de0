#!/usr/bin/env python3
"""End-to-end walkthrough on the movie catalog: ingest, query, inspect the
result DTD, then requery the derived catalog.

Usage: python scripts/run_paper_query.py [store-dir]
"""

import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from equix.dtd import serialize_dtd
from equix.query import ConcreteQueryNode, QueryDocument, parse_query_document
from equix.store import CatalogStore
from equix.xmlmodel import serialize_document

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def main() -> int:
    store_dir = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="equix-")
    store = CatalogStore(store_dir)

    catalog, rejections = store.ingest_catalog(
        "movies",
        (FIXTURES / "movies.dtd").read_text(),
        [("movies.xml", (FIXTURES / "movies.xml").read_text())],
    )
    print(f"ingested catalog {catalog.id!r}: {len(catalog.documents)} document(s), "
          f"{len(rejections)} rejected")

    qdoc = parse_query_document((FIXTURES / "paper_query.json").read_text())
    run = store.run_query("movies", qdoc)
    print(f"\nrun {run.id}: {len(run.results)} result document(s)")
    for doc in run.results:
        print(" ", serialize_document(doc))
    print("\nresult DTD:")
    print(serialize_dtd(run.result_dtd))

    followup = QueryDocument(query=ConcreteQueryNode(label="movieInfo", children=[
        ConcreteQueryNode(label="movie", quantifier="exists", children=[
            ConcreteQueryNode(label="title", quantifier="exists", output=True)])]))
    run2 = store.run_query(run.derived_catalog_id, followup)
    print(f"requery on {run.derived_catalog_id}: {len(run2.results)} result(s)")
    for doc in run2.results:
        print(" ", serialize_document(doc))
    print(f"\nstore kept at {store_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
