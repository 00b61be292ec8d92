import { fillFor } from "./palette.js";
import type { LayoutDoc, LayoutNodeDoc } from "./types.js";
import { nodeName, validateLayout } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface Scene {
  svg: SVGSVGElement;
  camera: SVGGElement;
  circles: Map<string, SVGCircleElement>;
  nodeCount: number;
  surrogateCount: number;
  labelCount: number;
}

function svgEl<K extends keyof SVGElementTagNameMap>(tag: K): SVGElementTagNameMap[K] {
  return document.createElementNS(SVG_NS, tag);
}

function edgePath(a: LayoutNodeDoc, b: LayoutNodeDoc): string {
  const midX = (a.x + b.x) / 2;
  return `M${a.x},${a.y}C${midX},${a.y} ${midX},${b.y} ${b.x},${b.y}`;
}

function drawLegends(layout: LayoutDoc, colorMap: string): SVGGElement {
  const legend = svgEl("g");
  legend.setAttribute("class", "legend");
  const edges = layout.legend.color;
  for (let i = 0; i < edges.length - 1; i++) {
    const swatch = svgEl("rect");
    swatch.setAttribute("class", "legend-color");
    swatch.setAttribute("x", String(10 + i * 26));
    swatch.setAttribute("y", "10");
    swatch.setAttribute("width", "24");
    swatch.setAttribute("height", "12");
    swatch.setAttribute("fill", fillFor(colorMap, i));
    const title = svgEl("title");
    title.textContent = `${edges[i].toPrecision(4)} to ${edges[i + 1].toPrecision(4)}`;
    swatch.appendChild(title);
    legend.appendChild(swatch);
  }
  const [sizeLo, sizeHi] = layout.legend.size;
  for (const [offset, value, radius] of [
    [0, sizeLo, 4],
    [1, sizeHi, 12],
  ] as const) {
    const circle = svgEl("circle");
    circle.setAttribute("class", "legend-size");
    circle.setAttribute("cx", String(24 + offset * 40));
    circle.setAttribute("cy", "44");
    circle.setAttribute("r", String(radius));
    circle.setAttribute("fill", "#999");
    const title = svgEl("title");
    title.textContent = String(value);
    circle.appendChild(title);
    legend.appendChild(circle);
  }
  return legend;
}

export function errorBanner(container: HTMLElement, message: string): void {
  const banner = document.createElement("div");
  banner.className = "error-banner";
  banner.textContent = `Cannot render: ${message}`;
  container.prepend(banner);
}

/**
 * Build the SVG scene for a layout payload: edges as curves, one circle per
 * node on the server's color and size scales, labels only where the server
 * kept them, an arrow glyph on surrogates, and the two legends. Throws on a
 * malformed payload (callers show the error banner).
 */
export function renderScene(
  container: HTMLElement,
  layoutDoc: LayoutDoc,
  colorMap: string,
): Scene {
  const layout = validateLayout(layoutDoc);
  container.querySelector("svg.cct")?.remove();
  container.querySelector(".error-banner")?.remove();

  const svg = svgEl("svg");
  svg.setAttribute("class", "cct");
  svg.setAttribute("width", "100%");
  svg.setAttribute("height", "100%");

  const camera = svgEl("g");
  camera.setAttribute("class", "camera");
  svg.appendChild(camera);

  const byId = new Map<number, LayoutNodeDoc>();
  for (const node of layout.nodes) byId.set(node.id, node);

  const edgeGroup = svgEl("g");
  edgeGroup.setAttribute("class", "edges");
  for (const [parent, child] of layout.edges) {
    const a = byId.get(parent);
    const b = byId.get(child);
    if (!a || !b) continue;
    const path = svgEl("path");
    path.setAttribute("class", "edge");
    path.setAttribute("d", edgePath(a, b));
    path.setAttribute("fill", "none");
    path.setAttribute("stroke", "#bbb");
    edgeGroup.appendChild(path);
  }
  camera.appendChild(edgeGroup);

  const nodeGroup = svgEl("g");
  nodeGroup.setAttribute("class", "nodes");
  const circles = new Map<string, SVGCircleElement>();
  let surrogateCount = 0;
  for (const node of layout.nodes) {
    const circle = svgEl("circle");
    circle.setAttribute("class", node.surrogate ? "node surrogate" : "node");
    circle.setAttribute("cx", String(node.x));
    circle.setAttribute("cy", String(node.y));
    circle.setAttribute("r", String(node.r));
    circle.setAttribute("fill", fillFor(colorMap, node.color));
    circle.dataset.path = node.path;
    circle.dataset.id = String(node.id);
    const title = svgEl("title");
    title.textContent = nodeName(node.path);
    circle.appendChild(title);
    nodeGroup.appendChild(circle);
    circles.set(node.path, circle);
    if (node.surrogate) {
      surrogateCount += 1;
      const arrow = svgEl("path");
      arrow.setAttribute("class", "surrogate-arrow");
      const ax = node.x + node.r + 3;
      arrow.setAttribute(
        "d",
        `M${ax},${node.y - 6}L${ax + 9},${node.y}L${ax},${node.y + 6}Z`,
      );
      arrow.setAttribute("fill", "#111");
      arrow.dataset.path = node.path;
      nodeGroup.appendChild(arrow);
    }
  }
  camera.appendChild(nodeGroup);

  const labelGroup = svgEl("g");
  labelGroup.setAttribute("class", "labels");
  let labelCount = 0;
  for (const node of layout.nodes) {
    if (node.label === undefined) continue;
    labelCount += 1;
    const text = svgEl("text");
    text.setAttribute("class", "label");
    text.setAttribute("x", String(node.x + node.r + 16));
    text.setAttribute("y", String(node.y + layout.constants.boxHeight / 4));
    text.textContent = node.label;
    labelGroup.appendChild(text);
  }
  camera.appendChild(labelGroup);

  svg.appendChild(drawLegends(layout, colorMap));
  container.appendChild(svg);

  return {
    svg,
    camera,
    circles,
    nodeCount: layout.nodes.length,
    surrogateCount,
    labelCount,
  };
}
