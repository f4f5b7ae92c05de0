/** Payload types of the catalog service API and the query interchange format. */

export interface CatalogSummary {
  id: string;
  origin: { kind: string; run?: string; from?: string } | null;
  documentCount: number;
  rootElement: string;
}

export interface DtdElementView {
  children: string[];
  attributes: string[];
  pcdata: boolean;
}

export interface DtdTree {
  root: string;
  elements: { [name: string]: DtdElementView };
}

export type MatcherJson =
  | { op: "true" }
  | { op: "word"; value: string }
  | { op: "phrase"; value: string }
  | { op: "and"; args: MatcherJson[] }
  | { op: "or"; args: MatcherJson[] }
  | { op: "not"; args: MatcherJson[] };

export type Quantifier = "exists" | "not_exists" | "forall" | "not_forall";

export type AggFn = "count" | "min" | "max" | "sum" | "avg";

export type CmpOp = "<" | "<=" | "=" | "!=" | ">=" | ">";

export interface AggConstraintJson {
  fn: AggFn;
  cmp: CmpOp;
  value: number;
}

export interface QueryNodeJson {
  element: string;
  constraint?: MatcherJson;
  quantifier?: Quantifier;
  output?: boolean;
  children?: QueryNodeJson[];
  agg?: { fn: AggFn }[];
  aggConstraints?: AggConstraintJson[];
}

export interface QueryDocumentJson {
  catalog?: string;
  mode?: "child" | "descendant";
  ontology?: string[];
  query: QueryNodeJson;
}

export interface RunResponse {
  runId: string;
  resultCount: number;
  resultDtd: string;
  derivedCatalogId: string;
  results: string[];
}

export interface StoredRun extends RunResponse {
  catalogId: string;
  query: QueryDocumentJson;
}

export interface IngestResponse {
  id: string;
  documentCount: number;
  rejected: { name: string; diagnostics: string[] }[];
}

export interface Diagnostics {
  diagnostics: { message: string }[];
}
