/** Builder state: a form tree mirroring the catalog DTD.
 *
 * The tree starts as the minimal query (just the DTD root) and grows only by
 * expanding nodes with children taken from the DTD view, so whatever the
 * form serializes to is valid against the catalog's DTD by construction.
 */

import type {
  AggConstraintJson, AggFn, DtdTree, MatcherJson, QueryDocumentJson,
  QueryNodeJson, Quantifier,
} from "./types.js";

export const QUANTIFIER_LABELS: Record<Quantifier, string> = {
  exists: "must have",
  not_exists: "must not have",
  forall: "every one must match",
  not_forall: "not every one must match",
};

export interface FormNode {
  id: number;
  label: string;
  isAttribute: boolean;
  pcdata: boolean;
  expandable: boolean;
  expanded: boolean;
  constraint: string;
  quantifier: Quantifier | null; // null exactly at the root
  output: boolean;
  aggregates: AggFn[];
  aggConstraints: AggConstraintJson[];
  children: FormNode[];
}

export interface BuilderState {
  catalog: string;
  tree: DtdTree;
  root: FormNode;
  nextId: number;
}

export interface Row {
  id: number;
  depth: number;
  label: string;
  isAttribute: boolean;
  pcdata: boolean;
  expandable: boolean;
  expanded: boolean;
  constraint: string;
  quantifier: Quantifier | null;
  quantifierLabel: string | null;
  output: boolean;
  aggregates: AggFn[];
  aggConstraints: AggConstraintJson[];
}

function makeNode(state: { nextId: number }, tree: DtdTree, label: string,
                  isAttribute: boolean, quantifier: Quantifier | null): FormNode {
  const view = tree.elements[label];
  const expandable = !isAttribute && view !== undefined
    && (view.children.length > 0 || view.attributes.length > 0);
  return {
    id: state.nextId++,
    label,
    isAttribute,
    pcdata: !isAttribute && (view?.pcdata ?? false),
    expandable,
    expanded: false,
    constraint: "",
    quantifier,
    output: false,
    aggregates: [],
    aggConstraints: [],
    children: [],
  };
}

/** The minimal query for a catalog: a single row naming the DTD root. */
export function minimalQuery(catalog: string, tree: DtdTree): BuilderState {
  const state = { nextId: 0 };
  const root = makeNode(state, tree, tree.root, false, null);
  return { catalog, tree, root, nextId: state.nextId };
}

export function findNode(state: BuilderState, id: number): FormNode | null {
  const stack = [state.root];
  while (stack.length) {
    const node = stack.pop()!;
    if (node.id === id) return node;
    stack.push(...node.children);
  }
  return null;
}

/** Expanding a node displays its subelements and attributes as defined in
 * the DTD; each enters the query as an existential structural constraint
 * until edited. */
export function expandNode(state: BuilderState, id: number): void {
  const node = findNode(state, id);
  if (!node || node.expanded || !node.expandable || node.isAttribute) return;
  const view = state.tree.elements[node.label];
  if (!view) return;
  const counter = { nextId: state.nextId };
  const seen = new Set<string>();
  for (const child of view.children) {
    if (seen.has(child)) continue; // one row per distinct name
    seen.add(child);
    node.children.push(makeNode(counter, state.tree, child, false, "exists"));
  }
  for (const attr of view.attributes) {
    node.children.push(makeNode(counter, state.tree, attr, true, "exists"));
  }
  state.nextId = counter.nextId;
  node.expanded = true;
}

/** Collapsing discards the subtree: the view returns to what it was before
 * the node was expanded. */
export function collapseNode(state: BuilderState, id: number): void {
  const node = findNode(state, id);
  if (!node || !node.expanded) return;
  node.children = [];
  node.expanded = false;
}

export function setConstraint(state: BuilderState, id: number, text: string): void {
  const node = findNode(state, id);
  if (node) node.constraint = text;
}

export function setQuantifier(state: BuilderState, id: number, q: Quantifier): void {
  const node = findNode(state, id);
  if (node && node.quantifier !== null) node.quantifier = q;
}

export function setOutput(state: BuilderState, id: number, output: boolean): void {
  const node = findNode(state, id);
  if (node) node.output = output;
}

export function toggleAggregate(state: BuilderState, id: number, fn: AggFn): void {
  const node = findNode(state, id);
  if (!node) return;
  const at = node.aggregates.indexOf(fn);
  if (at >= 0) node.aggregates.splice(at, 1);
  else node.aggregates.push(fn);
}

export function addAggConstraint(state: BuilderState, id: number,
                                 atom: AggConstraintJson): void {
  const node = findNode(state, id);
  if (node) node.aggConstraints.push(atom);
}

/** Visible rows in document order, for rendering and assertions. */
export function rows(state: BuilderState): Row[] {
  const out: Row[] = [];
  const walk = (node: FormNode, depth: number) => {
    out.push({
      id: node.id,
      depth,
      label: node.label,
      isAttribute: node.isAttribute,
      pcdata: node.pcdata,
      expandable: node.expandable,
      expanded: node.expanded,
      constraint: node.constraint,
      quantifier: node.quantifier,
      quantifierLabel: node.quantifier ? QUANTIFIER_LABELS[node.quantifier] : null,
      output: node.output,
      aggregates: [...node.aggregates],
      aggConstraints: [...node.aggConstraints],
    });
    for (const child of node.children) walk(child, depth + 1);
  };
  walk(state.root, 0);
  return out;
}

/** Constraint text to matcher: bare tokens are required words, quoted runs
 * are phrases, and a leading minus negates one term; everything is ANDed. */
export function parseConstraint(text: string): MatcherJson {
  const terms: MatcherJson[] = [];
  const pattern = /(-)?"([^"]*)"|(-)?(\S+)/g;
  let match: RegExpExecArray | null;
  while ((match = pattern.exec(text)) !== null) {
    let term: MatcherJson;
    let negated: boolean;
    if (match[2] !== undefined) {
      negated = match[1] === "-";
      term = { op: "phrase", value: match[2] };
    } else {
      negated = match[3] === "-";
      const word = match[4];
      if (word === "-" || word === "") continue;
      term = { op: "word", value: word };
    }
    terms.push(negated ? { op: "not", args: [term] } : term);
  }
  if (terms.length === 0) return { op: "true" };
  if (terms.length === 1) return terms[0];
  return { op: "and", args: terms };
}

function nodeToJson(node: FormNode): QueryNodeJson {
  const json: QueryNodeJson = { element: node.label };
  const matcher = parseConstraint(node.constraint);
  if (matcher.op !== "true") json.constraint = matcher;
  if (node.quantifier !== null) json.quantifier = node.quantifier;
  if (node.output) json.output = true;
  if (node.children.length) json.children = node.children.map(nodeToJson);
  if (node.aggregates.length) json.agg = node.aggregates.map((fn) => ({ fn }));
  if (node.aggConstraints.length) json.aggConstraints = [...node.aggConstraints];
  return json;
}

export function toQueryDocument(state: BuilderState): QueryDocumentJson {
  return { catalog: state.catalog, mode: "child", query: nodeToJson(state.root) };
}
