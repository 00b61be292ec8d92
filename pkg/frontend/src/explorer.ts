import { ApiClient } from "./api.js";
import { Camera } from "./camera.js";
import { DetailTable } from "./detail.js";
import { MassPrunePanel } from "./histogram.js";
import { errorBanner, renderScene, Scene } from "./render.js";
import type { LayoutDoc, ViewStateDoc } from "./types.js";

/**
 * The interactive explorer. It renders the most recently received layout and
 * forwards every semantic intent to the session service; no tree logic runs
 * locally. Double-click toggles a subtree collapse, click and shift-click
 * (or a shift-drag brush) select nodes for the detail table, the menu
 * re-binds encodings, the mass-prune popup drives the range, and the query
 * export popup shows the service's query text verbatim.
 */
export class Explorer {
  sessionId = "";
  lastLayout: LayoutDoc | null = null;
  viewState: ViewStateDoc | null = null;
  scene: Scene | null = null;
  camera: Camera | null = null;
  selection = new Set<string>();
  lastQueryRaw = "";

  readonly detail = new DetailTable();
  readonly prunePanel: MassPrunePanel;
  private menu: HTMLDivElement;
  private stage: HTMLDivElement;

  constructor(private container: HTMLElement, readonly api: ApiClient) {
    this.menu = document.createElement("div");
    this.menu.className = "menu-bar";
    this.stage = document.createElement("div");
    this.stage.className = "stage";
    container.append(this.menu, this.stage);
    this.prunePanel = new MassPrunePanel(
      (lo, hi) => void this.applyRange(lo, hi),
      (bins, lo, hi) => void this.refreshHistogram(bins, lo, hi),
    );
    container.appendChild(this.prunePanel.root);
    container.appendChild(this.detail.root);
    this.buildMenu();
  }

  async start(sessionBody: Record<string, unknown> = {}): Promise<void> {
    this.sessionId = await this.api.createSession(sessionBody);
    this.viewState = await this.api.viewState(this.sessionId);
    this.applyLayout(await this.api.layout(this.sessionId));
  }

  applyLayout(layout: LayoutDoc): void {
    try {
      const colorMap = this.viewState?.colorMap ?? "diverging";
      const previous = this.camera?.transform;
      this.scene = renderScene(this.stage, layout, colorMap);
      this.lastLayout = layout;
      this.camera = new Camera(this.scene.camera);
      if (previous) {
        this.camera.transform = previous;
        this.camera.apply();
      }
      this.camera.attach(this.scene.svg);
      this.wireNodeEvents();
      this.pruneSelection();
    } catch (error) {
      errorBanner(this.stage, (error as Error).message);
    }
  }

  displayedNodeCount(): number {
    return this.scene ? this.scene.nodeCount : 0;
  }

  // ------------------------------------------------------------------
  // interactions

  private wireNodeEvents(): void {
    if (!this.scene) return;
    this.scene.svg.addEventListener("dblclick", (event) => {
      const path = (event.target as SVGElement).dataset?.path;
      if (path) void this.toggleCollapse(path);
    });
    this.scene.svg.addEventListener("click", (event) => {
      const path = (event.target as SVGElement).dataset?.path;
      if (!path) return;
      if (!(event as MouseEvent).shiftKey) this.selection.clear();
      if (this.selection.has(path)) this.selection.delete(path);
      else this.selection.add(path);
      this.markSelection();
      void this.refreshDetail();
    });
    this.attachBrush();
  }

  private attachBrush(): void {
    const scene = this.scene;
    if (!scene) return;
    let origin: { x: number; y: number } | null = null;
    let rect: SVGRectElement | null = null;
    scene.svg.addEventListener("mousedown", (event) => {
      if (!event.shiftKey) return;
      if ((event.target as Element).classList?.contains("node")) return;
      origin = { x: event.offsetX, y: event.offsetY };
      rect = document.createElementNS("http://www.w3.org/2000/svg", "rect");
      rect.setAttribute("class", "brush");
      rect.setAttribute("fill", "rgba(100,140,220,0.15)");
      rect.setAttribute("stroke", "#4a6fbf");
      scene.svg.appendChild(rect);
      event.stopPropagation();
    });
    scene.svg.addEventListener("mousemove", (event) => {
      if (!origin || !rect) return;
      const x = Math.min(origin.x, event.offsetX);
      const y = Math.min(origin.y, event.offsetY);
      rect.setAttribute("x", String(x));
      rect.setAttribute("y", String(y));
      rect.setAttribute("width", String(Math.abs(event.offsetX - origin.x)));
      rect.setAttribute("height", String(Math.abs(event.offsetY - origin.y)));
    });
    scene.svg.addEventListener("mouseup", (event) => {
      if (!origin || !rect) return;
      const x0 = Math.min(origin.x, event.offsetX);
      const x1 = Math.max(origin.x, event.offsetX);
      const y0 = Math.min(origin.y, event.offsetY);
      const y1 = Math.max(origin.y, event.offsetY);
      rect.remove();
      origin = null;
      rect = null;
      this.brushSelect(x0, y0, x1, y1);
    });
  }

  /** Select visible nodes whose transformed centers fall in the rectangle. */
  brushSelect(x0: number, y0: number, x1: number, y1: number): void {
    if (!this.scene || !this.camera || !this.lastLayout) return;
    const { x, y, k } = this.camera.transform;
    this.selection.clear();
    for (const node of this.lastLayout.nodes) {
      const sx = node.x * k + x;
      const sy = node.y * k + y;
      if (sx >= x0 && sx <= x1 && sy >= y0 && sy <= y1) {
        this.selection.add(node.path);
      }
    }
    this.markSelection();
    void this.refreshDetail();
  }

  private markSelection(): void {
    if (!this.scene) return;
    for (const [path, circle] of this.scene.circles) {
      if (this.selection.has(path)) {
        circle.setAttribute("stroke", "#222");
        circle.setAttribute("stroke-width", "3");
      } else {
        circle.removeAttribute("stroke");
        circle.removeAttribute("stroke-width");
      }
    }
  }

  private pruneSelection(): void {
    if (!this.scene) return;
    for (const path of [...this.selection]) {
      if (!this.scene.circles.has(path)) this.selection.delete(path);
    }
    this.markSelection();
  }

  private async refreshDetail(): Promise<void> {
    const paths = [...this.selection].sort();
    try {
      const details = await Promise.all(
        paths.map((p) => this.api.nodeDetail(this.sessionId, p)),
      );
      this.detail.update(details);
    } catch (error) {
      this.toast((error as Error).message);
    }
  }

  async toggleCollapse(path: string): Promise<void> {
    try {
      this.applyLayout(await this.api.collapse(this.sessionId, path));
    } catch (error) {
      this.toast((error as Error).message);
    }
  }

  async applyRange(lo: number, hi: number): Promise<void> {
    try {
      this.applyLayout(await this.api.setRange(this.sessionId, lo, hi));
    } catch (error) {
      this.toast((error as Error).message);
    }
  }

  async refreshHistogram(bins?: number, lo?: number, hi?: number): Promise<void> {
    try {
      const hist = await this.api.histogram(this.sessionId, bins, lo, hi);
      const range = this.viewState?.range ?? undefined;
      this.prunePanel.show(hist, range?.[0], range?.[1]);
      this.prunePanel.toggle(true);
    } catch (error) {
      this.toast((error as Error).message);
    }
  }

  async applyEncoding(encoding: {
    primary?: string;
    secondary?: string;
    colorMap?: string;
    inverted?: boolean;
  }): Promise<void> {
    try {
      const layout = await this.api.setEncoding(this.sessionId, encoding);
      this.viewState = await this.api.viewState(this.sessionId);
      this.applyLayout(layout);
    } catch (error) {
      this.toast((error as Error).message);
    }
  }

  async exportQuery(): Promise<string> {
    this.lastQueryRaw = await this.api.exportQueryRaw(this.sessionId);
    const text = (JSON.parse(this.lastQueryRaw) as { query: string }).query;
    let popup = this.container.querySelector<HTMLDivElement>(".query-popup");
    popup?.remove();
    popup = document.createElement("div");
    popup.className = "query-popup";
    const label = document.createElement("div");
    label.textContent = "Query for the current view (copy into scripts):";
    const area = document.createElement("textarea");
    area.className = "query-text";
    area.readOnly = true;
    area.value = text;
    const close = document.createElement("button");
    close.textContent = "Close";
    close.addEventListener("click", () => popup?.remove());
    popup.append(label, area, close);
    this.container.appendChild(popup);
    return text;
  }

  // ------------------------------------------------------------------
  // chrome

  private buildMenu(): void {
    const primary = document.createElement("input");
    primary.className = "primary-input";
    primary.placeholder = "primary metric";
    const secondary = document.createElement("input");
    secondary.className = "secondary-input";
    secondary.placeholder = "secondary metric";
    const colorMap = document.createElement("select");
    colorMap.className = "colormap-select";
    for (const option of ["diverging", "single-hue"]) {
      const el = document.createElement("option");
      el.value = option;
      el.textContent = option;
      colorMap.appendChild(el);
    }
    const inverted = document.createElement("input");
    inverted.type = "checkbox";
    inverted.className = "inverted-toggle";
    const applyButton = document.createElement("button");
    applyButton.className = "encoding-apply";
    applyButton.textContent = "Apply encoding";
    applyButton.addEventListener("click", () =>
      void this.applyEncoding({
        primary: primary.value || undefined,
        secondary: secondary.value || undefined,
        colorMap: colorMap.value,
        inverted: inverted.checked,
      }),
    );
    const pruneButton = document.createElement("button");
    pruneButton.className = "mass-prune-open";
    pruneButton.textContent = "Mass prune";
    pruneButton.addEventListener("click", () => {
      if (this.prunePanel.visible) this.prunePanel.toggle(false);
      else void this.refreshHistogram();
    });
    const exportButton = document.createElement("button");
    exportButton.className = "export-query";
    exportButton.textContent = "Export query";
    exportButton.addEventListener("click", () => void this.exportQuery());
    this.menu.append(
      primary,
      secondary,
      colorMap,
      inverted,
      applyButton,
      pruneButton,
      exportButton,
    );
  }

  toast(message: string): void {
    const el = document.createElement("div");
    el.className = "toast";
    el.textContent = message;
    this.container.appendChild(el);
    setTimeout(() => el.remove(), 4000);
  }
}
