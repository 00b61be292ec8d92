"""Render model for the visible tree: tidy node positions, bivariate
encoding scales, and collision-thinned leaf labels.

Positions grow rightward with depth (x = depth * dx) and spread vertically
with a tidy layout in the Walker/Buchheim style: siblings keep their order,
parents sit within the vertical span of their children, and no two nodes at
the same depth come closer than the separation constant. Multiple trees are
stacked vertically without overlap. The resulting :class:`LayoutResult` is
the only contract a front end needs.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import MissingMetric
from .model import GraphFrame, NodeId
from .paths import _escape
from .prune import ViewState, surrogate, visible

DX = 120.0
MIN_SEP = 28.0
BOX_HEIGHT = 14.0
R_MIN = 4.0
R_MAX = 25.0
COLOR_STEPS = 6
TREE_GAP = MIN_SEP
LAYOUT_VERSION = 1


# ---------------------------------------------------------------------------
# encoding scales


@dataclass(frozen=True)
class EncodingScales:
    """Quantized color scale for the primary metric and a linear radius scale
    for the secondary metric. Inversion flips the color ramp only."""

    primary_metric: str
    secondary_metric: str
    color_map: str
    inverted: bool
    color_edges: tuple[float, ...]
    color_domain: tuple[float, float]
    size_domain: tuple[float, float]
    r_min: float = R_MIN
    r_max: float = R_MAX

    def color_index(self, value: float) -> int:
        lo, hi = self.color_domain
        if lo == hi:
            idx = 0
        else:
            idx = bisect_right(self.color_edges, value, 1, COLOR_STEPS) - 1
            idx = max(0, min(COLOR_STEPS - 1, idx))
        return COLOR_STEPS - 1 - idx if self.inverted else idx

    def radius(self, value: float) -> float:
        lo, hi = self.size_domain
        if lo == hi:
            return self.r_min
        t = (value - lo) / (hi - lo)
        return self.r_min + max(0.0, min(1.0, t)) * (self.r_max - self.r_min)


def _color_edges(lo: float, hi: float, pivot: float | None) -> tuple[float, ...]:
    if lo == hi:
        return tuple(lo - 0.5 + i / COLOR_STEPS for i in range(COLOR_STEPS + 1))
    if pivot is not None and lo < pivot < hi:
        half = COLOR_STEPS // 2
        left = [lo + (pivot - lo) * i / half for i in range(half)]
        right = [pivot + (hi - pivot) * i / half for i in range(half)]
        return tuple(left + right + [hi])
    return tuple(lo + (hi - lo) * i / COLOR_STEPS for i in range(COLOR_STEPS + 1))


def _displayed_values(
    gf: GraphFrame,
    metric: str,
    vis: frozenset[NodeId],
    aggregates: dict[NodeId, dict[str, float]],
) -> dict[NodeId, float]:
    col = gf.metrics.column(metric)
    return {
        nid: aggregates[nid][metric] if nid in aggregates else col[nid]
        for nid in vis
    }


def _scales(
    vs: ViewState,
    primary_values: Iterable[float],
    secondary_values: Iterable[float],
    pivot: float | None,
) -> EncodingScales:
    primary = list(primary_values)
    secondary = list(secondary_values)
    return EncodingScales(
        primary_metric=vs.primary_metric,
        secondary_metric=vs.secondary_metric,
        color_map=vs.color_map,
        inverted=vs.inverted,
        color_edges=_color_edges(min(primary), max(primary), pivot),
        color_domain=(min(primary), max(primary)),
        size_domain=(min(secondary), max(secondary)),
    )


def encode(gf: GraphFrame, vs: ViewState, pivot: float | None = None) -> EncodingScales:
    """Scales over the displayed values of the visible nodes (collapse roots
    contribute their surrogate aggregates)."""
    for metric in (vs.primary_metric, vs.secondary_metric):
        if metric not in gf.metrics:
            raise MissingMetric(metric, "encoding")
    vis = visible(gf, vs)
    aggregates = {
        nid: surrogate(gf, nid).aggregated_metrics
        for nid in vs.collapsed
        if nid in vis
    }
    return _scales(
        vs,
        _displayed_values(gf, vs.primary_metric, vis, aggregates).values(),
        _displayed_values(gf, vs.secondary_metric, vis, aggregates).values(),
        pivot,
    )


# ---------------------------------------------------------------------------
# label thinning


def thin_labels(
    candidates: Sequence[tuple[NodeId, float, str, float, float, float]]
) -> set[NodeId]:
    """Drop overlapping labels from (id, y, text, box_height, primary, depth)
    candidates and return the ids to keep.

    Boxes occupy [y, y + box_height). A single pass over the y-sorted array
    compares each box against the following boxes within one box height; on
    overlap the shallower node's label goes, at equal depth the one with the
    smaller primary metric, and if still tied the later one in sort order.
    A label that overlaps nothing is never removed.
    """
    order = sorted(range(len(candidates)), key=lambda i: candidates[i][1])
    ys = [candidates[i][1] for i in order]
    heights = [candidates[i][3] for i in order]
    metrics = [candidates[i][4] for i in order]
    depths = [candidates[i][5] for i in order]
    alive = [True] * len(order)

    for i in range(len(order)):
        if not alive[i]:
            continue
        j = i + 1
        while j < len(order) and ys[j] - ys[i] < heights[i]:
            if alive[j]:
                if depths[i] != depths[j]:
                    loser = i if depths[i] < depths[j] else j
                elif metrics[i] != metrics[j]:
                    loser = i if metrics[i] < metrics[j] else j
                else:
                    loser = j
                alive[loser] = False
                if loser == i:
                    break
            j += 1

    return {candidates[order[i]][0] for i in range(len(order)) if alive[i]}


# ---------------------------------------------------------------------------
# tidy positions


class _TidyNode:
    __slots__ = (
        "nid", "parent", "children", "number",
        "prelim", "mod", "shift", "change", "thread", "anc", "pos",
    )

    def __init__(self, nid: NodeId, parent: "_TidyNode | None", number: int):
        self.nid = nid
        self.parent = parent
        self.children: list[_TidyNode] = []
        self.number = number
        self.prelim = 0.0
        self.mod = 0.0
        self.shift = 0.0
        self.change = 0.0
        self.thread: _TidyNode | None = None
        self.anc: _TidyNode = self
        self.pos = 0.0


def _next_left(v: _TidyNode) -> "_TidyNode | None":
    return v.children[0] if v.children else v.thread

def _next_right(v: _TidyNode) -> "_TidyNode | None":
    return v.children[-1] if v.children else v.thread


def _move_subtree(wl: _TidyNode, wr: _TidyNode, shift: float) -> None:
    subtrees = wr.number - wl.number
    wr.change -= shift / subtrees
    wr.shift += shift
    wl.change += shift / subtrees
    wr.prelim += shift
    wr.mod += shift


def _execute_shifts(v: _TidyNode) -> None:
    shift = 0.0
    change = 0.0
    for w in reversed(v.children):
        w.prelim += shift
        w.mod += shift
        change += w.change
        shift += w.shift + change


def _ancestor(vil: _TidyNode, v: _TidyNode, default: _TidyNode) -> _TidyNode:
    return vil.anc if vil.anc.parent is v.parent else default


def _apportion(v: _TidyNode, default: _TidyNode, sep: float) -> _TidyNode:
    if v.number == 0:
        return default
    w = v.parent.children[v.number - 1]
    vir = vor = v
    vil = w
    vol = v.parent.children[0]
    sir = vir.mod
    sor = vor.mod
    sil = vil.mod
    sol = vol.mod
    while _next_right(vil) is not None and _next_left(vir) is not None:
        vil = _next_right(vil)
        vir = _next_left(vir)
        vol = _next_left(vol)
        vor = _next_right(vor)
        vor.anc = v
        shift = (vil.prelim + sil) - (vir.prelim + sir) + sep
        if shift > 0.0:
            _move_subtree(_ancestor(vil, v, default), v, shift)
            sir += shift
            sor += shift
        sil += vil.mod
        sir += vir.mod
        sol += vol.mod
        sor += vor.mod
    if _next_right(vil) is not None and _next_right(vor) is None:
        vor.thread = _next_right(vil)
        vor.mod += sil - sor
    if _next_left(vir) is not None and _next_left(vol) is None:
        vol.thread = _next_left(vir)
        vol.mod += sir - sol
        default = v
    return default


def _first_walk(root: _TidyNode, sep: float) -> None:
    # Iterative post-order: a (node, resume-index) frame per node; a resume
    # index of k means child k-1 just finished and must be apportioned.
    default_anc: dict[int, _TidyNode] = {}
    stack: list[tuple[_TidyNode, int]] = [(root, 0)]
    while stack:
        v, ci = stack.pop()
        if ci > 0:
            default_anc[id(v)] = _apportion(v.children[ci - 1], default_anc[id(v)], sep)
        elif v.children:
            default_anc[id(v)] = v.children[0]
        if ci < len(v.children):
            stack.append((v, ci + 1))
            stack.append((v.children[ci], 0))
            continue
        if not v.children:
            v.prelim = v.parent.children[v.number - 1].prelim + sep if v.number > 0 else 0.0
        else:
            _execute_shifts(v)
            midpoint = (v.children[0].prelim + v.children[-1].prelim) / 2.0
            if v.number > 0:
                v.prelim = v.parent.children[v.number - 1].prelim + sep
                v.mod = v.prelim - midpoint
            else:
                v.prelim = midpoint


def _second_walk(root: _TidyNode) -> None:
    stack: list[tuple[_TidyNode, float]] = [(root, 0.0)]
    while stack:
        v, mod_sum = stack.pop()
        v.pos = v.prelim + mod_sum
        for w in v.children:
            stack.append((w, mod_sum + v.mod))


def tidy_positions(
    gf: GraphFrame, vis: frozenset[NodeId], sep: float = MIN_SEP, gap: float = TREE_GAP
) -> tuple[dict[NodeId, float], list[float]]:
    """Vertical position per visible node, one tidy tree per root, trees
    stacked with non-overlapping extents. Returns (positions, per-root offsets)."""
    positions: dict[NodeId, float] = {}
    offsets: list[float] = []
    base = 0.0
    for root in gf.roots:
        shadow: dict[NodeId, _TidyNode] = {}
        order: list[_TidyNode] = []
        stack = [root]
        while stack:
            nid = stack.pop()
            parent = gf.parent(nid)
            tparent = shadow.get(parent) if parent is not None else None
            tnode = _TidyNode(nid, tparent, len(tparent.children) if tparent else 0)
            if tparent is not None:
                tparent.children.append(tnode)
            shadow[nid] = tnode
            order.append(tnode)
            stack.extend(c for c in reversed(gf.children(nid)) if c in vis)
        troot = shadow[root]
        _first_walk(troot, sep)
        _second_walk(troot)
        low = min(t.pos for t in order)
        high = max(t.pos for t in order)
        offsets.append(base - low)
        for t in order:
            positions[t.nid] = t.pos - low + base
        base += (high - low) + gap
    return positions, offsets


# ---------------------------------------------------------------------------
# full layout


@dataclass(frozen=True)
class LayoutNode:
    id: NodeId
    path: str
    x: float
    y: float
    radius: float
    color_index: int
    label: str | None
    is_surrogate: bool
    elided_count: int


@dataclass(frozen=True)
class LayoutResult:
    nodes: tuple[LayoutNode, ...]
    edges: tuple[tuple[NodeId, NodeId], ...]
    tree_offsets: tuple[float, ...]
    scales: EncodingScales

    def to_doc(self) -> dict:
        nodes = []
        for n in self.nodes:
            doc = {
                "id": n.id,
                "path": n.path,
                "x": round(n.x, 4),
                "y": round(n.y, 4),
                "r": round(n.radius, 4),
                "color": n.color_index,
            }
            if n.label is not None:
                doc["label"] = n.label
            doc["surrogate"] = n.is_surrogate
            doc["elided"] = n.elided_count
            nodes.append(doc)
        return {
            "version": LAYOUT_VERSION,
            "nodes": nodes,
            "edges": [[p, c] for p, c in self.edges],
            "legend": {
                "color": [round(e, 6) for e in self.scales.color_edges],
                "size": [round(e, 6) for e in self.scales.size_domain],
            },
            "constants": {"dx": DX, "minSep": MIN_SEP, "boxHeight": BOX_HEIGHT},
        }


def layout(gf: GraphFrame, vs: ViewState, pivot: float | None = None) -> LayoutResult:
    """Compute the full render model for the view's visible tree."""
    for metric in (vs.primary_metric, vs.secondary_metric):
        if metric not in gf.metrics:
            raise MissingMetric(metric, "layout encoding")
    vis = visible(gf, vs)
    aggregates = {
        nid: surrogate(gf, nid).aggregated_metrics
        for nid in vs.collapsed
        if nid in vis
    }
    elided_counts = {
        nid: len(list(gf.subtree_ids(nid))) for nid in aggregates
    }
    primary = _displayed_values(gf, vs.primary_metric, vis, aggregates)
    secondary = _displayed_values(gf, vs.secondary_metric, vis, aggregates)
    scales = _scales(vs, primary.values(), secondary.values(), pivot)
    positions, offsets = tidy_positions(gf, vis)

    # Wire paths built top-down so each node extends its parent's path.
    wire: dict[NodeId, str] = {}
    child_pos: dict[NodeId, int] = {}
    for i, r in enumerate(gf.roots):
        child_pos[r] = i
    visible_children: dict[NodeId, list[NodeId]] = {}

    order: list[NodeId] = []
    stack = list(reversed(gf.roots))
    while stack:
        nid = stack.pop()
        if nid not in vis:
            continue
        order.append(nid)
        parent = gf.parent(nid)
        segment = f"{_escape(gf.frame(nid).name)}@{child_pos[nid]}"
        wire[nid] = segment if parent is None else f"{wire[parent]}/{segment}"
        visible_children[nid] = []
        if parent is not None:
            visible_children[parent].append(nid)
        children = gf.children(nid)
        for i, c in enumerate(children):
            child_pos[c] = i
        stack.extend(reversed(children))

    candidates = []
    for nid in order:
        if not visible_children[nid]:
            candidates.append(
                (nid, positions[nid], gf.frame(nid).name, BOX_HEIGHT,
                 primary[nid], float(gf.depth(nid)))
            )
    retained = thin_labels(candidates)

    nodes = tuple(
        LayoutNode(
            id=nid,
            path=wire[nid],
            x=gf.depth(nid) * DX,
            y=positions[nid],
            radius=scales.radius(secondary[nid]),
            color_index=scales.color_index(primary[nid]),
            label=gf.frame(nid).name if nid in retained else None,
            is_surrogate=nid in aggregates,
            elided_count=elided_counts.get(nid, 0),
        )
        for nid in order
    )
    edges = tuple(
        (gf.parent(nid), nid) for nid in order if gf.parent(nid) is not None
    )
    return LayoutResult(
        nodes=nodes,
        edges=edges,
        tree_offsets=tuple(offsets),
        scales=scales,
    )
