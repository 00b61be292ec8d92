import { readFileSync } from "node:fs";
import { join, dirname } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { errorBanner, renderScene } from "../src/render.js";
import type { LayoutDoc } from "../src/types.js";
import { nodeName } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));
const fixture = JSON.parse(
  readFileSync(join(here, "fixtures", "layout_2700.json"), "utf-8"),
) as LayoutDoc;

function container(): HTMLElement {
  const el = document.createElement("div");
  document.body.appendChild(el);
  return el;
}

describe("renderScene", () => {
  it("renders the 2700-node fixture completely", () => {
    const el = container();
    const scene = renderScene(el, fixture, "diverging");
    expect(scene.nodeCount).toBe(2700);
    expect(el.querySelectorAll("circle.node").length).toBe(2700);
    expect(el.querySelectorAll("path.edge").length).toBe(2699);
    const expectedLabels = fixture.nodes.filter((n) => n.label !== undefined).length;
    expect(el.querySelectorAll("text.label").length).toBe(expectedLabels);
    expect(scene.labelCount).toBe(expectedLabels);
    // legends reflect the scale breakpoints
    expect(el.querySelectorAll("rect.legend-color").length).toBe(6);
    expect(el.querySelectorAll("circle.legend-size").length).toBe(2);
  });

  it("draws one circle and one legend pair for a single-node layout", () => {
    const el = container();
    const doc: LayoutDoc = {
      version: 1,
      nodes: [
        { id: 0, path: "a@0", x: 0, y: 0, r: 4, color: 0, surrogate: false, elided: 0 },
      ],
      edges: [],
      legend: { color: [0, 1, 2, 3, 4, 5, 6], size: [1, 1] },
      constants: { dx: 120, minSep: 28, boxHeight: 14 },
    };
    const scene = renderScene(el, doc, "diverging");
    expect(scene.nodeCount).toBe(1);
    expect(el.querySelectorAll("circle.node").length).toBe(1);
    expect(el.querySelectorAll("rect.legend-color").length).toBe(6);
  });

  it("marks surrogates with exactly one arrow glyph each", () => {
    const el = container();
    const doc: LayoutDoc = {
      version: 1,
      nodes: [
        { id: 0, path: "a@0", x: 0, y: 0, r: 5, color: 0, surrogate: false, elided: 0 },
        { id: 1, path: "a@0/b@0", x: 120, y: 0, r: 8, color: 3, surrogate: true, elided: 7 },
      ],
      edges: [[0, 1]],
      legend: { color: [0, 1, 2, 3, 4, 5, 6], size: [0, 9] },
      constants: { dx: 120, minSep: 28, boxHeight: 14 },
    };
    const scene = renderScene(el, doc, "diverging");
    expect(scene.surrogateCount).toBe(1);
    expect(el.querySelectorAll("path.surrogate-arrow").length).toBe(1);
  });

  it("exposes node names for hover tooltips", () => {
    const el = container();
    renderScene(el, fixture, "diverging");
    const first = el.querySelector("circle.node title");
    expect(first?.textContent).toBe(nodeName(fixture.nodes[0].path));
  });

  it("rejects malformed payloads so callers can show the banner", () => {
    const el = container();
    expect(() =>
      renderScene(el, { nodes: "nope" } as unknown as LayoutDoc, "diverging"),
    ).toThrow(/nodes/);
    errorBanner(el, "nodes missing");
    expect(el.querySelector(".error-banner")?.textContent).toContain("nodes missing");
  });

  it("decodes escaped names from wire paths", () => {
    expect(nodeName("a~1b~2c~0d@3")).toBe("a/b@c~d");
    expect(nodeName("root@0/leaf@12")).toBe("leaf");
  });
});
