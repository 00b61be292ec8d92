import type { NodeDetailDoc } from "./types.js";

/** Floating table: one row per selected node, all metric columns. */
export class DetailTable {
  readonly root: HTMLDivElement;

  constructor() {
    this.root = document.createElement("div");
    this.root.className = "detail-table";
    this.root.style.display = "none";
  }

  update(details: NodeDetailDoc[]): void {
    if (!details.length) {
      this.root.style.display = "none";
      this.root.replaceChildren();
      return;
    }
    const metricNames = Object.keys(details[0].metrics);
    const table = document.createElement("table");
    const head = document.createElement("tr");
    for (const column of ["name", "depth", ...metricNames]) {
      const th = document.createElement("th");
      th.textContent = column;
      head.appendChild(th);
    }
    table.appendChild(head);
    for (const detail of details) {
      const row = document.createElement("tr");
      const name = document.createElement("td");
      name.textContent = detail.frame.name;
      row.appendChild(name);
      const depth = document.createElement("td");
      depth.textContent = String(detail.depth);
      row.appendChild(depth);
      for (const metric of metricNames) {
        const cell = document.createElement("td");
        cell.textContent = detail.metrics[metric].toPrecision(6);
        row.appendChild(cell);
      }
      table.appendChild(row);
    }
    this.root.replaceChildren(table);
    this.root.style.display = "block";
  }
}
