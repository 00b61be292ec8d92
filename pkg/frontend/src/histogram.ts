import type { HistogramDoc } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 380;
const HALF = 70;
const PAD = 14;

/**
 * Butterfly histogram popup: prunable counts grow upward (violet), protected
 * counts downward (gray). Two pink handles pick the kept range; a single
 * range callback fires when a handle is released.
 */
export class MassPrunePanel {
  readonly root: HTMLDivElement;
  private hist: HistogramDoc | null = null;
  private lo = 0;
  private hi = 1;
  private svg: SVGSVGElement;
  private dragging: "lo" | "hi" | null = null;
  private moved = false;

  constructor(
    private onRelease: (lo: number, hi: number) => void,
    private onRebin: (bins: number, lo?: number, hi?: number) => void,
  ) {
    this.root = document.createElement("div");
    this.root.className = "mass-prune-popup";
    this.root.style.display = "none";
    const title = document.createElement("div");
    title.className = "popup-title";
    title.textContent = "Mass prune";
    this.root.appendChild(title);
    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.setAttribute("width", String(WIDTH));
    this.svg.setAttribute("height", String(2 * HALF + 2 * PAD));
    this.root.appendChild(this.svg);

    const controls = document.createElement("div");
    controls.className = "popup-controls";
    const binsInput = document.createElement("input");
    binsInput.type = "number";
    binsInput.value = "20";
    binsInput.min = "1";
    binsInput.className = "bins-input";
    const rebin = document.createElement("button");
    rebin.textContent = "Re-bin";
    rebin.className = "rebin-button";
    rebin.addEventListener("click", () => this.onRebin(Number(binsInput.value) || 20));
    const zoom = document.createElement("button");
    zoom.textContent = "Zoom to handles";
    zoom.className = "zoom-button";
    zoom.addEventListener("click", () =>
      this.onRebin(Number(binsInput.value) || 20, this.lo, this.hi),
    );
    controls.append(binsInput, rebin, zoom);
    this.root.appendChild(controls);

    document.addEventListener("mousemove", (event) => this.drag(event));
    document.addEventListener("mouseup", () => this.release());
  }

  get visible(): boolean {
    return this.root.style.display !== "none";
  }

  toggle(show?: boolean): void {
    const next = show ?? !this.visible;
    this.root.style.display = next ? "block" : "none";
  }

  private edgeLo(): number {
    return this.hist ? this.hist.binEdges[0] : 0;
  }

  private edgeHi(): number {
    return this.hist ? this.hist.binEdges[this.hist.binEdges.length - 1] : 1;
  }

  private toX(value: number): number {
    const lo = this.edgeLo();
    const hi = this.edgeHi();
    const t = hi === lo ? 0 : (value - lo) / (hi - lo);
    return PAD + t * (WIDTH - 2 * PAD);
  }

  private toValue(x: number): number {
    const t = Math.max(0, Math.min(1, (x - PAD) / (WIDTH - 2 * PAD)));
    return this.edgeLo() + t * (this.edgeHi() - this.edgeLo());
  }

  show(hist: HistogramDoc, lo?: number, hi?: number): void {
    this.hist = hist;
    // Handles always live within the histogram's edge span.
    this.lo = Math.max(this.edgeLo(), lo ?? this.edgeLo());
    this.hi = Math.min(this.edgeHi(), hi ?? this.edgeHi());
    this.draw();
  }

  private draw(): void {
    const hist = this.hist;
    if (!hist) return;
    this.svg.replaceChildren();
    const maxCount = Math.max(1, ...hist.prunableCounts, ...hist.protectedCounts);
    const mid = PAD + HALF;
    const axis = document.createElementNS(SVG_NS, "line");
    axis.setAttribute("x1", String(PAD));
    axis.setAttribute("x2", String(WIDTH - PAD));
    axis.setAttribute("y1", String(mid));
    axis.setAttribute("y2", String(mid));
    axis.setAttribute("stroke", "#444");
    this.svg.appendChild(axis);

    for (let i = 0; i < hist.binCount; i++) {
      const x0 = this.toX(hist.binEdges[i]);
      const x1 = this.toX(hist.binEdges[i + 1]);
      const up = (hist.prunableCounts[i] / maxCount) * HALF;
      const down = (hist.protectedCounts[i] / maxCount) * HALF;
      const bar = document.createElementNS(SVG_NS, "rect");
      bar.setAttribute("class", "bar-prunable");
      bar.setAttribute("x", String(x0));
      bar.setAttribute("width", String(Math.max(1, x1 - x0 - 1)));
      bar.setAttribute("y", String(mid - up));
      bar.setAttribute("height", String(up));
      bar.setAttribute("fill", "#7b5ea7");
      this.svg.appendChild(bar);
      const barDown = document.createElementNS(SVG_NS, "rect");
      barDown.setAttribute("class", "bar-protected");
      barDown.setAttribute("x", String(x0));
      barDown.setAttribute("width", String(Math.max(1, x1 - x0 - 1)));
      barDown.setAttribute("y", String(mid));
      barDown.setAttribute("height", String(down));
      barDown.setAttribute("fill", "#9a9a9a");
      this.svg.appendChild(barDown);
    }

    for (const which of ["lo", "hi"] as const) {
      const value = which === "lo" ? this.lo : this.hi;
      const handle = document.createElementNS(SVG_NS, "rect");
      handle.setAttribute("class", `handle handle-${which}`);
      handle.setAttribute("x", String(this.toX(value) - 4));
      handle.setAttribute("y", String(PAD));
      handle.setAttribute("width", "8");
      handle.setAttribute("height", String(2 * HALF));
      handle.setAttribute("fill", "#e75480");
      handle.addEventListener("mousedown", (event) => {
        event.preventDefault();
        this.dragging = which;
        this.moved = false;
      });
      this.svg.appendChild(handle);
    }
  }

  private drag(event: MouseEvent): void {
    if (!this.dragging || !this.hist) return;
    const bounds = this.svg.getBoundingClientRect();
    const value = this.toValue(event.clientX - bounds.left);
    if (this.dragging === "lo") this.lo = Math.min(value, this.hi);
    else this.hi = Math.max(value, this.lo);
    this.moved = true;
    this.draw();
  }

  private release(): void {
    if (!this.dragging) return;
    const fire = this.moved;
    this.dragging = null;
    this.moved = false;
    if (fire) this.onRelease(this.lo, this.hi);
  }
}
