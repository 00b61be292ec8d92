// Wire documents served by the session service. The layout payload is the
// complete render model; the explorer never computes tree semantics locally.

export interface LayoutNodeDoc {
  id: number;
  path: string;
  x: number;
  y: number;
  r: number;
  color: number;
  label?: string;
  surrogate: boolean;
  elided: number;
}

export interface LayoutDoc {
  version: number;
  nodes: LayoutNodeDoc[];
  edges: [number, number][];
  legend: { color: number[]; size: [number, number] };
  constants: { dx: number; minSep: number; boxHeight: number };
}

export interface HistogramDoc {
  version: number;
  metric: string;
  binCount: number;
  binEdges: number[];
  prunableCounts: number[];
  protectedCounts: number[];
}

export interface ViewStateDoc {
  version: number;
  primary: string;
  secondary: string;
  colorMap: string;
  inverted: boolean;
  collapsed: string[];
  range: [number, number] | null;
}

export interface NodeDetailDoc {
  version: number;
  path: string;
  frame: { name: string; file: string | null; line: number | null };
  depth: number;
  metrics: Record<string, number>;
}

export function validateLayout(doc: unknown): LayoutDoc {
  const d = doc as LayoutDoc;
  if (!d || typeof d !== "object") throw new Error("layout payload is not an object");
  if (!Array.isArray(d.nodes)) throw new Error("layout payload has no nodes array");
  if (!Array.isArray(d.edges)) throw new Error("layout payload has no edges array");
  if (!d.legend || !Array.isArray(d.legend.color) || !Array.isArray(d.legend.size))
    throw new Error("layout payload has no legend");
  if (!d.constants || typeof d.constants.dx !== "number")
    throw new Error("layout payload has no constants");
  for (const n of d.nodes) {
    if (
      typeof n.id !== "number" ||
      typeof n.path !== "string" ||
      typeof n.x !== "number" ||
      typeof n.y !== "number" ||
      typeof n.r !== "number" ||
      typeof n.color !== "number"
    )
      throw new Error("malformed layout node");
  }
  return d;
}

/** Frame name of a node, decoded from the last wire path segment. */
export function nodeName(path: string): string {
  const segment = path.split("/").pop() ?? path;
  const at = segment.lastIndexOf("@");
  const raw = at >= 0 ? segment.slice(0, at) : segment;
  return raw.replace(/~2/g, "@").replace(/~1/g, "/").replace(/~0/g, "~");
}
