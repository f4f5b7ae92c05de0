/** DOM shell: catalog picker, form-tree builder, results pane, requery loop.
 * All state lives in the model; this file only renders rows and forwards
 * events. */

import { EquixClient } from "./api.js";
import {
  BuilderState, QUANTIFIER_LABELS, collapseNode, expandNode, minimalQuery,
  rows, setConstraint, setOutput, setQuantifier, toQueryDocument, toggleAggregate,
} from "./model.js";
import type { AggFn, Quantifier, RunResponse } from "./types.js";

const AGG_FNS: AggFn[] = ["count", "min", "max", "sum", "avg"];

export class App {
  private client: EquixClient;
  private state: BuilderState | null = null;
  private advanced = false;
  private rootEl: HTMLElement;

  constructor(client: EquixClient, rootEl: HTMLElement) {
    this.client = client;
    this.rootEl = rootEl;
  }

  async start(): Promise<void> {
    this.rootEl.innerHTML = `
      <header>
        <h1>equix</h1>
        <label>Catalog <select id="catalog-picker"></select></label>
        <label><input type="checkbox" id="advanced-toggle"> aggregation controls</label>
      </header>
      <section id="builder"></section>
      <section id="actions">
        <button id="submit" disabled>Search</button>
        <span id="status"></span>
      </section>
      <section id="results" hidden>
        <h2>Results <span id="result-count"></span></h2>
        <div id="result-docs"></div>
        <h2>Result DTD</h2>
        <pre id="result-dtd"></pre>
        <button id="requery">Requery these results</button>
      </section>`;
    this.el("#advanced-toggle").addEventListener("change", (e) => {
      this.advanced = (e.target as HTMLInputElement).checked;
      this.renderBuilder();
    });
    this.el("#submit").addEventListener("click", () => void this.submit());
    await this.refreshCatalogs();
  }

  private el<T extends HTMLElement = HTMLElement>(selector: string): T {
    const found = this.rootEl.querySelector<T>(selector);
    if (!found) throw new Error(`missing element ${selector}`);
    return found;
  }

  private async refreshCatalogs(selected?: string): Promise<void> {
    const catalogs = await this.client.listCatalogs();
    const picker = this.el<HTMLSelectElement>("#catalog-picker");
    picker.innerHTML = "";
    for (const catalog of catalogs) {
      const option = document.createElement("option");
      option.value = catalog.id;
      option.textContent = `${catalog.id} (${catalog.documentCount})`;
      picker.appendChild(option);
    }
    picker.onchange = () => void this.openBuilder(picker.value);
    const target = selected ?? catalogs[0]?.id;
    if (target) {
      picker.value = target;
      await this.openBuilder(target);
    }
  }

  /** Opens the builder on a catalog: the minimal query, one root row. */
  async openBuilder(catalogId: string): Promise<void> {
    const tree = await this.client.getDtdTree(catalogId);
    this.state = minimalQuery(catalogId, tree);
    this.el<HTMLButtonElement>("#submit").disabled = false;
    this.el("#results").hidden = true;
    this.renderBuilder();
  }

  private renderBuilder(): void {
    const builder = this.el("#builder");
    builder.innerHTML = "";
    if (!this.state) return;
    for (const row of rows(this.state)) {
      const div = document.createElement("div");
      div.className = "row" + (row.isAttribute ? " attribute" : "");
      div.style.marginLeft = `${row.depth * 1.6}em`;
      div.dataset.nodeId = String(row.id);

      if (row.expandable) {
        const toggle = document.createElement("button");
        toggle.textContent = row.expanded ? "−" : "+";
        toggle.title = row.expanded ? "collapse" : "expand";
        toggle.onclick = () => {
          if (!this.state) return;
          (row.expanded ? collapseNode : expandNode)(this.state, row.id);
          this.renderBuilder();
        };
        div.appendChild(toggle);
      }

      const name = document.createElement("span");
      name.className = "label";
      name.textContent = row.isAttribute ? `@${row.label}` : row.label;
      div.appendChild(name);

      if (row.quantifier !== null) {
        const select = document.createElement("select");
        for (const [value, text] of Object.entries(QUANTIFIER_LABELS)) {
          const option = document.createElement("option");
          option.value = value;
          option.textContent = text;
          select.appendChild(option);
        }
        select.value = row.quantifier;
        select.onchange = () => {
          if (this.state) setQuantifier(this.state, row.id, select.value as Quantifier);
        };
        div.appendChild(select);
      }

      const constraint = document.createElement("input");
      constraint.type = "text";
      constraint.placeholder = 'words or "a phrase"; -word to forbid';
      constraint.value = row.constraint;
      constraint.oninput = () => {
        if (this.state) setConstraint(this.state, row.id, constraint.value);
      };
      div.appendChild(constraint);

      const outputLabel = document.createElement("label");
      const output = document.createElement("input");
      output.type = "checkbox";
      output.checked = row.output;
      output.onchange = () => {
        if (this.state) setOutput(this.state, row.id, output.checked);
      };
      outputLabel.append(output, " output");
      div.appendChild(outputLabel);

      if (this.advanced && row.quantifier !== null) {
        for (const fn of AGG_FNS) {
          const aggLabel = document.createElement("label");
          const box = document.createElement("input");
          box.type = "checkbox";
          box.checked = row.aggregates.includes(fn);
          box.onchange = () => {
            if (this.state) toggleAggregate(this.state, row.id, fn);
          };
          aggLabel.append(box, ` ${fn}`);
          div.appendChild(aggLabel);
        }
      }

      builder.appendChild(div);
    }
  }

  private async submit(): Promise<void> {
    if (!this.state) return;
    const status = this.el("#status");
    status.textContent = "searching…";
    try {
      const run = await this.client.runQuery(
        this.state.catalog, toQueryDocument(this.state));
      status.textContent = `run ${run.runId}`;
      this.renderResults(run);
    } catch (err) {
      status.textContent = String(err);
    }
  }

  private renderResults(run: RunResponse): void {
    const section = this.el("#results");
    section.hidden = false;
    this.el("#result-count").textContent =
      run.resultCount === 0 ? "(none matched)" : `(${run.resultCount})`;
    const docs = this.el("#result-docs");
    docs.innerHTML = "";
    if (run.results.length === 0) {
      const empty = document.createElement("p");
      empty.textContent = "No documents matched this query.";
      docs.appendChild(empty);
    }
    for (const xml of run.results) {
      const pre = document.createElement("pre");
      pre.textContent = xml;
      docs.appendChild(pre);
    }
    this.el("#result-dtd").textContent = run.resultDtd;
    const requery = this.el<HTMLButtonElement>("#requery");
    requery.onclick = () => void this.refreshCatalogs(run.derivedCatalogId);
  }
}

export function bootstrap(): void {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("api") ?? "http://127.0.0.1:8410";
  const app = new App(new EquixClient(base), document.getElementById("app")!);
  void app.start();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  bootstrap();
}
