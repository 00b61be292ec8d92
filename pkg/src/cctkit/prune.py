"""Interactive tree-reduction state: manual collapse with surrogate
aggregates, and metric-range mass pruning backed by a butterfly histogram.

Pruning removes nodes only from the leaves toward the root: the visible set
is always ancestor-closed and roots are always shown. A node with a zero
primary metric that still has a nonzero descendant is *protected* (eliding it
would orphan that descendant); every other node is *prunable*. A fresh view
applies the default rule of hiding prunable nodes whose primary metric is
exactly 0.0; an explicit range replaces that rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .errors import (
    InvertedRange,
    MissingMetric,
    NestedCollapse,
    StaleView,
    UnknownNode,
)
from .model import (
    EXCLUSIVE_TIME,
    INCLUSIVE_TIME,
    GraphFrame,
    NodeId,
    ancestor_closure,
    descendants,
)
from .paths import node_path, resolve_node_path

COLOR_MAP_DIVERGING = "diverging"
COLOR_MAP_SINGLE_HUE = "single-hue"
DEFAULT_BIN_COUNT = 20
VIEWSTATE_VERSION = 1


@dataclass(frozen=True)
class ViewState:
    """The full reproducible visualization state for one GraphFrame."""

    primary_metric: str
    secondary_metric: str
    color_map: str = COLOR_MAP_DIVERGING
    inverted: bool = False
    collapsed: frozenset[NodeId] = frozenset()
    mass_prune_range: tuple[float, float] | None = None
    selection: frozenset[NodeId] = frozenset()

    def __post_init__(self):
        if self.color_map not in (COLOR_MAP_DIVERGING, COLOR_MAP_SINGLE_HUE):
            raise ValueError(f"unknown color map {self.color_map!r}")
        if self.mass_prune_range is not None:
            lo, hi = self.mass_prune_range
            if lo > hi:
                raise InvertedRange(f"range lo {lo} > hi {hi}")


def default_view_state(gf: GraphFrame) -> ViewState:
    """Initial state: exclusive time on color, inclusive time on size, the
    zero-metric elision rule active, nothing collapsed."""
    names = gf.metrics.names
    if not names:
        raise MissingMetric("<any>", "cannot view a frame with no metrics")
    primary = EXCLUSIVE_TIME if EXCLUSIVE_TIME in gf.metrics else names[0]
    secondary = INCLUSIVE_TIME if INCLUSIVE_TIME in gf.metrics else primary
    return ViewState(primary_metric=primary, secondary_metric=secondary)


def validate_view(gf: GraphFrame, vs: ViewState) -> None:
    """Raise :class:`StaleView` when `vs` does not fit `gf`."""
    for metric in (vs.primary_metric, vs.secondary_metric):
        if metric not in gf.metrics:
            raise StaleView(f"view metric {metric!r} not in frame")
    for nid in vs.collapsed | vs.selection:
        if nid not in gf:
            raise StaleView(f"view references missing node {nid}")
    for nid in vs.collapsed:
        others = vs.collapsed - {nid}
        if others & ancestor_closure(gf, [nid]) - {nid}:
            raise StaleView("collapse roots are nested")


# ---------------------------------------------------------------------------
# prunable / protected classification and histogram


def classify(gf: GraphFrame, primary_metric: str) -> tuple[frozenset[NodeId], frozenset[NodeId]]:
    """Partition nodes into (prunable, protected) for `primary_metric`.

    Protected nodes have a zero metric but a nonzero descendant, so removing
    them would disconnect that descendant from the root.
    """
    col = gf.metrics.column(primary_metric)
    has_nonzero_desc: dict[NodeId, bool] = {}
    protected = set()
    for root in gf.roots:
        stack: list[tuple[NodeId, bool]] = [(root, False)]
        while stack:
            nid, expanded = stack.pop()
            children = gf.children(nid)
            if expanded or not children:
                flag = any(
                    has_nonzero_desc[c] or col[c] != 0.0 for c in children
                )
                has_nonzero_desc[nid] = flag
                if col[nid] == 0.0 and flag:
                    protected.add(nid)
            else:
                stack.append((nid, True))
                stack.extend((c, False) for c in reversed(children))
    prunable = frozenset(set(gf.nodes) - protected)
    return prunable, frozenset(protected)


@dataclass(frozen=True)
class ButterflyHistogram:
    """Prunable counts grow one way, protected counts the other, over shared
    bin edges (uniform width, last bin closed on the right)."""

    metric: str
    bin_edges: tuple[float, ...]
    prunable_counts: tuple[int, ...]
    protected_counts: tuple[int, ...]

    @property
    def bin_count(self) -> int:
        return len(self.prunable_counts)

    def to_doc(self) -> dict:
        return {
            "version": VIEWSTATE_VERSION,
            "metric": self.metric,
            "binCount": self.bin_count,
            "binEdges": list(self.bin_edges),
            "prunableCounts": list(self.prunable_counts),
            "protectedCounts": list(self.protected_counts),
        }


def butterfly_histogram(
    gf: GraphFrame,
    primary_metric: str,
    bin_count: int = DEFAULT_BIN_COUNT,
    lo: float | None = None,
    hi: float | None = None,
) -> ButterflyHistogram:
    """Bin every node by `primary_metric` into prunable and protected counts.

    With `lo`/`hi` the histogram is re-binned over that sub-range and counts
    only nodes inside it; otherwise the span is [min, max] over all nodes and
    the two count rows sum to the node count.
    """
    if bin_count < 1:
        raise ValueError("bin_count must be >= 1")
    col = gf.metrics.column(primary_metric)
    values = list(col.values())
    span_lo = min(values) if lo is None else float(lo)
    span_hi = max(values) if hi is None else float(hi)
    if span_lo > span_hi:
        raise InvertedRange(f"histogram lo {span_lo} > hi {span_hi}")
    degenerate = span_lo == span_hi
    if degenerate:
        # Degenerate span: a single centered bin holds everything.
        edges = (span_lo - 0.5, span_lo + 0.5)
        bin_count = 1
    else:
        width = (span_hi - span_lo) / bin_count
        edges = tuple(
            span_hi if i == bin_count else span_lo + i * width
            for i in range(bin_count + 1)
        )
    prunable, _ = classify(gf, primary_metric)
    counts_prunable = [0] * bin_count
    counts_protected = [0] * bin_count
    for nid, value in col.items():
        if value < span_lo or value > span_hi:
            continue
        if degenerate:
            idx = 0
        else:
            idx = min(int((value - edges[0]) / (edges[-1] - edges[0]) * bin_count), bin_count - 1)
            # Float rounding can put a value just over its own edge.
            while idx > 0 and value < edges[idx]:
                idx -= 1
            while idx < bin_count - 1 and value >= edges[idx + 1]:
                idx += 1
        if nid in prunable:
            counts_prunable[idx] += 1
        else:
            counts_protected[idx] += 1
    return ButterflyHistogram(
        metric=primary_metric,
        bin_edges=edges,
        prunable_counts=tuple(counts_prunable),
        protected_counts=tuple(counts_protected),
    )


# ---------------------------------------------------------------------------
# visibility


def _range_keep(gf: GraphFrame, vs: ViewState) -> set[NodeId]:
    """Prunable nodes the mass-prune setting keeps in view."""
    col = gf.metrics.column(vs.primary_metric)
    prunable, _ = classify(gf, vs.primary_metric)
    if vs.mass_prune_range is None:
        return {nid for nid in prunable if col[nid] != 0.0}
    lo, hi = vs.mass_prune_range
    return {nid for nid in prunable if lo <= col[nid] <= hi}


def range_visible(gf: GraphFrame, vs: ViewState) -> frozenset[NodeId]:
    """Nodes surviving the mass-prune rule: the kept set closed over
    ancestors, roots always present."""
    keep = _range_keep(gf, vs)
    keep.update(gf.roots)
    return ancestor_closure(gf, keep)


def range_elided_roots(gf: GraphFrame, vs: ViewState) -> frozenset[NodeId]:
    """Maximal roots of the subtrees hidden by the mass-prune rule."""
    vis = range_visible(gf, vs)
    return frozenset(
        nid
        for nid in gf.nodes
        if nid not in vis
        and (gf.parent(nid) is None or gf.parent(nid) in vis)
    )


def visible(gf: GraphFrame, vs: ViewState) -> frozenset[NodeId]:
    """Node ids currently shown: range survivors minus strict descendants of
    collapse roots. Always ancestor-closed; roots always present."""
    validate_view(gf, vs)
    vis = set(range_visible(gf, vs))
    for root in vs.collapsed:
        vis.difference_update(descendants(gf, root))
    return frozenset(vis)


def mass_prune(gf: GraphFrame, vs: ViewState, lo: float, hi: float) -> ViewState:
    """Set the mass-prune range to [lo, hi].

    Manual collapses outside the newly elided region survive; collapse roots
    that fall inside it are dropped. Idempotent for a fixed range.
    """
    if lo > hi:
        raise InvertedRange(f"range lo {lo} > hi {hi}")
    if vs.primary_metric not in gf.metrics:
        raise MissingMetric(vs.primary_metric, "mass prune metric")
    new_vs = replace(vs, mass_prune_range=(float(lo), float(hi)))
    surviving = range_visible(gf, new_vs)
    collapsed = frozenset(nid for nid in vs.collapsed if nid in surviving)
    selection = frozenset(nid for nid in vs.selection if nid in surviving)
    return replace(new_vs, collapsed=collapsed, selection=selection)


def clear_mass_prune(gf: GraphFrame, vs: ViewState) -> ViewState:
    """Back to the default zero-elision rule."""
    return replace(vs, mass_prune_range=None)


def toggle_collapse(gf: GraphFrame, vs: ViewState, nid: NodeId) -> ViewState:
    """Collapse `nid`'s subtree into a surrogate, or expand it again.

    Collapsing inside an already-collapsed subtree is rejected; collapsing an
    ancestor of existing collapse roots absorbs them so collapse roots stay
    mutually non-nested.
    """
    if nid not in gf:
        raise UnknownNode(f"no node with id {nid}")
    if nid in vs.collapsed:
        return replace(vs, collapsed=vs.collapsed - {nid})
    above = ancestor_closure(gf, [nid]) - {nid}
    if above & vs.collapsed:
        raise NestedCollapse(f"node {nid} is inside a collapsed subtree")
    below = descendants(gf, nid)
    collapsed = (vs.collapsed - below) | {nid}
    return replace(vs, collapsed=frozenset(collapsed))


# ---------------------------------------------------------------------------
# surrogates


@dataclass(frozen=True)
class SurrogateNode:
    """Placeholder for a collapsed subtree: per-metric mean over the subtree
    (anchor included) and the number of nodes it stands for."""

    anchor: NodeId
    aggregated_metrics: dict[str, float] = field(compare=False)
    elided_count: int = 0


def surrogate(gf: GraphFrame, anchor: NodeId) -> SurrogateNode:
    ids = list(gf.subtree_ids(anchor))
    count = len(ids)
    aggregates = {}
    for name in gf.metrics.names:
        col = gf.metrics.column(name)
        aggregates[name] = sum(col[i] for i in ids) / count
    return SurrogateNode(anchor=anchor, aggregated_metrics=aggregates, elided_count=count)


def surrogates(gf: GraphFrame, vs: ViewState) -> dict[NodeId, SurrogateNode]:
    """Surrogates for every collapse root that is itself visible."""
    vis = visible(gf, vs)
    return {nid: surrogate(gf, nid) for nid in sorted(vs.collapsed) if nid in vis}


# ---------------------------------------------------------------------------
# serialization


def view_to_doc(gf: GraphFrame, vs: ViewState) -> dict:
    lo_hi = vs.mass_prune_range
    return {
        "version": VIEWSTATE_VERSION,
        "primary": vs.primary_metric,
        "secondary": vs.secondary_metric,
        "colorMap": vs.color_map,
        "inverted": vs.inverted,
        "collapsed": [node_path(gf, nid) for nid in sorted(vs.collapsed)],
        "range": list(lo_hi) if lo_hi is not None else None,
    }


def view_from_doc(gf: GraphFrame, doc: Mapping) -> ViewState:
    """Rebuild a ViewState against a (possibly re-loaded) frame.

    Node paths rather than raw ids make the document portable across
    sessions; unresolvable paths raise :class:`StaleView`.
    """
    if not isinstance(doc, Mapping):
        raise StaleView("view document must be an object")
    if doc.get("version") != VIEWSTATE_VERSION:
        raise StaleView(f"unsupported view document version {doc.get('version')!r}")
    try:
        collapsed = frozenset(
            resolve_node_path(gf, p) for p in doc.get("collapsed", [])
        )
    except UnknownNode as exc:
        raise StaleView(f"collapsed path does not resolve: {exc}") from exc
    rng = doc.get("range")
    if rng is not None:
        try:
            lo, hi = (float(x) for x in rng)
        except (TypeError, ValueError) as exc:
            raise StaleView(f"bad range in view document: {rng!r}") from exc
        rng = (lo, hi)
    vs = ViewState(
        primary_metric=doc.get("primary", EXCLUSIVE_TIME),
        secondary_metric=doc.get("secondary", INCLUSIVE_TIME),
        color_map=doc.get("colorMap", COLOR_MAP_DIVERGING),
        inverted=bool(doc.get("inverted", False)),
        collapsed=collapsed,
        mass_prune_range=rng,
    )
    validate_view(gf, vs)
    return vs
