/** Typed client for the catalog service; the fetch implementation is
 * injectable so tests can stub or point it at a spawned server. */

import type {
  CatalogSummary, Diagnostics, DtdTree, IngestResponse, QueryDocumentJson,
  RunResponse, StoredRun,
} from "./types.js";

export class ApiError extends Error {
  status: number;
  diagnostics: string[];

  constructor(status: number, diagnostics: string[]) {
    super(diagnostics.length ? diagnostics.join("; ") : `HTTP ${status}`);
    this.status = status;
    this.diagnostics = diagnostics;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class EquixClient {
  private baseUrl: string;
  private fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let diagnostics: string[] = [];
      try {
        const body = (await response.json()) as Diagnostics;
        diagnostics = (body.diagnostics ?? []).map((d) => d.message);
      } catch {
        // non-JSON error body: fall back to the status line
      }
      throw new ApiError(response.status, diagnostics);
    }
    return (await response.json()) as T;
  }

  listCatalogs(): Promise<CatalogSummary[]> {
    return this.request<CatalogSummary[]>("/catalogs");
  }

  getDtdTree(catalogId: string): Promise<DtdTree> {
    return this.request<DtdTree>(`/catalogs/${encodeURIComponent(catalogId)}/dtd`);
  }

  runQuery(catalogId: string, query: QueryDocumentJson): Promise<RunResponse> {
    return this.request<RunResponse>(
      `/catalogs/${encodeURIComponent(catalogId)}/query`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(query),
      },
    );
  }

  getRun(runId: string): Promise<StoredRun> {
    return this.request<StoredRun>(`/runs/${encodeURIComponent(runId)}`);
  }

  ingestCatalog(name: string, dtdText: string,
                docs: { name: string; text: string }[],
                wrapRoot?: string): Promise<IngestResponse> {
    const form = new FormData();
    form.append("name", name);
    if (wrapRoot) form.append("wrapRoot", wrapRoot);
    form.append("dtd", new Blob([dtdText], { type: "text/plain" }), "catalog.dtd");
    for (const doc of docs) {
      form.append("docs", new Blob([doc.text], { type: "application/xml" }), doc.name);
    }
    return this.request<IngestResponse>("/catalogs", { method: "POST", body: form });
  }
}
