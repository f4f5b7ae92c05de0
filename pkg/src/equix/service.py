"""HTTP API over the catalog store, consumed by the query-builder client.

All bodies are JSON except catalog ingest, which is multipart (a DTD file
plus any number of documents).  Unknown ids give 404; domain validation
failures give 422 with a structured diagnostics list.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, File, Form, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .dtd import DtdParseError, serialize_dtd
from .query import QueryFormatError, parse_query_document
from .store import CatalogStore, QueryValidationError, StoreError, UnknownCatalogError
from .xmlmodel import serialize_document


def _diagnostics(status: int, messages: list[str]) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"diagnostics": [{"message": m} for m in messages]})


def create_app(store_path: str | Path) -> FastAPI:
    store = CatalogStore(store_path)
    app = FastAPI(title="equix", version="0.1.0")
    # The query builder is served statically from another origin.
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    @app.get("/catalogs")
    def list_catalogs():
        return store.catalog_summaries()

    @app.get("/catalogs/{catalog_id}/dtd")
    def dtd_tree(catalog_id: str):
        try:
            return store.get_dtd_tree(catalog_id)
        except UnknownCatalogError as exc:
            return _diagnostics(404, [str(exc)])

    @app.post("/catalogs", status_code=201)
    async def ingest(name: str = Form(...),
                     wrapRoot: Optional[str] = Form(None),
                     dtd: UploadFile = File(...),
                     docs: list[UploadFile] = File(default=[])):
        try:
            dtd_text = (await dtd.read()).decode("utf-8")
            documents = [(d.filename or f"doc{i}.xml", (await d.read()).decode("utf-8"))
                         for i, d in enumerate(docs)]
            catalog, rejections = store.ingest_catalog(
                name, dtd_text, documents, wrap_root=wrapRoot)
        except (StoreError, DtdParseError) as exc:
            return _diagnostics(422, [str(exc)])
        return {
            "id": catalog.id,
            "documentCount": len(catalog.documents),
            "rejected": [{"name": r.name, "diagnostics": r.diagnostics}
                         for r in rejections],
        }

    @app.post("/catalogs/{catalog_id}/query")
    async def run_query(catalog_id: str, body: dict):
        try:
            qdoc = parse_query_document(json.dumps(body))
        except QueryFormatError as exc:
            return _diagnostics(422, [str(exc)])
        try:
            run = store.run_query(catalog_id, qdoc)
        except UnknownCatalogError as exc:
            return _diagnostics(404, [str(exc)])
        except QueryValidationError as exc:
            return _diagnostics(422, exc.diagnostics)
        return {
            "runId": run.id,
            "resultCount": len(run.results),
            "resultDtd": serialize_dtd(run.result_dtd),
            "derivedCatalogId": run.derived_catalog_id,
            "results": [serialize_document(doc) for doc in run.results],
        }

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        try:
            return store.get_run(run_id)
        except UnknownCatalogError as exc:
            return _diagnostics(404, [str(exc)])

    return app
