"""Whole-tree transformations: alignment, comparison metrics, derived
columns, and leaf-ward prune filtering.

All operations are pure: inputs are never mutated and results are new
GraphFrames (sharing immutable pieces where possible).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

from .errors import MissingMetric, NameCollision, TooFewFrames
from .model import (
    GraphFrame,
    NodeId,
    NodePredicate,
    NodeView,
    ancestor_closure,
    restrict_to,
)


@dataclass(frozen=True)
class AlignmentMap:
    """Structural matching between two frames.

    Nodes match when their root-to-node frame-name paths are equal; among
    same-named siblings the k-th occurrence in one tree pairs with the k-th
    occurrence in the other. The matching is a partial bijection.
    """

    pairs: tuple[tuple[NodeId, NodeId], ...]
    unmatched_a: frozenset[NodeId]
    unmatched_b: frozenset[NodeId]

    def a_to_b(self) -> dict[NodeId, NodeId]:
        return {a: b for a, b in self.pairs}

    def b_to_a(self) -> dict[NodeId, NodeId]:
        return {b: a for a, b in self.pairs}


def _match_in_order(
    a: GraphFrame, b: GraphFrame, ids_a: Sequence[NodeId], ids_b: Sequence[NodeId]
) -> list[tuple[NodeId, NodeId]]:
    """Pair same-named entries of two ordered sibling lists by occurrence."""
    by_name: dict[str, list[NodeId]] = {}
    for nid in ids_b:
        by_name.setdefault(b.frame(nid).name, []).append(nid)
    taken: dict[str, int] = {}
    out = []
    for nid in ids_a:
        name = a.frame(nid).name
        pos = taken.get(name, 0)
        candidates = by_name.get(name, ())
        if pos < len(candidates):
            out.append((nid, candidates[pos]))
            taken[name] = pos + 1
    return out


def align(a: GraphFrame, b: GraphFrame) -> AlignmentMap:
    """Match nodes of `a` and `b` by full frame-name path.

    File and line attributes are ignored so rebuilt binaries still align.
    Disjoint trees produce an empty matching.
    """
    pairs: list[tuple[NodeId, NodeId]] = []
    queue = _match_in_order(a, b, a.roots, b.roots)
    while queue:
        na, nb = queue.pop()
        pairs.append((na, nb))
        queue.extend(_match_in_order(a, b, a.children(na), b.children(nb)))
    pairs.sort()
    matched_a = {na for na, _ in pairs}
    matched_b = {nb for _, nb in pairs}
    return AlignmentMap(
        pairs=tuple(pairs),
        unmatched_a=frozenset(set(a.nodes) - matched_a),
        unmatched_b=frozenset(set(b.nodes) - matched_b),
    )


@dataclass(frozen=True)
class DegenerateRatio:
    """A node whose denominator was zero while its numerator was not; the
    ratio was clamped rather than the node dropped."""

    node: NodeId
    path: tuple[str, ...]
    numerator: float
    clamped_to: float


class SpeedupResult(NamedTuple):
    frame: GraphFrame
    warnings: tuple[DegenerateRatio, ...]


SPEEDUP_METRIC = "speedup"
IMBALANCE_METRIC = "imbalance"
DEFAULT_RATIO_CLAMP = 1e6


def speedup(
    a: GraphFrame,
    b: GraphFrame,
    metric: str,
    clamp_max: float = DEFAULT_RATIO_CLAMP,
) -> SpeedupResult:
    """Per-node ratio ``metric(a) / metric(b)`` over the intersection of the
    two trees, carried on a copy of `a`'s matched subset.

    Values above 1 mean the first argument ran faster. Both metrics zero is
    defined as 1.0; a zero denominator under a nonzero numerator keeps the
    node with the ratio clamped to ``clamp_max`` and a warning recorded.
    """
    for gf in (a, b):
        if metric not in gf.metrics:
            raise MissingMetric(metric, "speedup operand")
    mapping = align(a, b).a_to_b()
    keep = frozenset(mapping)
    if not keep:
        raise ValueError("the two trees have no call paths in common")
    result = restrict_to(a, keep, keep_roots=False)
    col_a = a.metrics.column(metric)
    col_b = b.metrics.column(metric)
    ratios: dict[NodeId, float] = {}
    warnings: list[DegenerateRatio] = []
    for na in sorted(keep):
        va = col_a[na]
        vb = col_b[mapping[na]]
        if vb == 0.0:
            if va == 0.0:
                ratios[na] = 1.0
            else:
                clamped = clamp_max if va > 0 else -clamp_max
                ratios[na] = clamped
                warnings.append(
                    DegenerateRatio(
                        node=na,
                        path=result.name_path(na),
                        numerator=va,
                        clamped_to=clamped,
                    )
                )
        else:
            ratios[na] = va / vb
    result = result.with_metrics(result.metrics.with_column(SPEEDUP_METRIC, ratios))
    return SpeedupResult(frame=result, warnings=tuple(warnings))


def imbalance(frames: Sequence[GraphFrame], metric: str) -> GraphFrame:
    """Population variance of `metric` across several runs, per matched node,
    on the intersection of all input trees."""
    if len(frames) < 2:
        raise TooFewFrames(f"imbalance needs at least 2 frames, got {len(frames)}")
    for gf in frames:
        if metric not in gf.metrics:
            raise MissingMetric(metric, "imbalance operand")
    first = frames[0]
    mappings = [align(first, other).a_to_b() for other in frames[1:]]
    keep = frozenset(set(first.nodes).intersection(*mappings))
    if not keep:
        raise ValueError("the input trees have no call paths in common")
    result = restrict_to(first, keep, keep_roots=False)
    columns = [first.metrics.column(metric)] + [
        other.metrics.column(metric) for other in frames[1:]
    ]
    variance: dict[NodeId, float] = {}
    n = len(frames)
    for nid in keep:
        values = [columns[0][nid]] + [
            columns[i + 1][mappings[i][nid]] for i in range(len(mappings))
        ]
        # Shifted so identical inputs give exactly zero.
        shifted = [v - values[0] for v in values]
        mean = sum(shifted) / n
        variance[nid] = sum((s - mean) ** 2 for s in shifted) / n
    return result.with_metrics(result.metrics.with_column(IMBALANCE_METRIC, variance))


BINARY_OPS: dict[str, Callable[[float, float], float]] = {
    "add": lambda x, y: x + y,
    "sub": lambda x, y: x - y,
    "mul": lambda x, y: x * y,
    "div": lambda x, y: x / y if y != 0.0 else 0.0,
}


@dataclass(frozen=True)
class DerivedMetricSpec:
    """Recipe for a new metric column.

    kind is one of ``percent_of_total``, ``binary``, ``speedup`` or
    ``imbalance``; `metrics` names the operand columns and `frames` supplies
    the extra trees for the cross-run kinds.
    """

    name: str
    kind: str
    metrics: tuple[str, ...]
    op: Callable[[float, float], float] | str | None = None
    frames: tuple[GraphFrame, ...] = ()
    overwrite: bool = False


def _percent_denominator(gf: GraphFrame, metric: str, root: NodeId) -> float:
    inclusive = f"{metric} (inc)"
    if inclusive in gf.metrics:
        return gf.metrics.value(inclusive, root)
    return gf.metrics.value(metric, root)


def derive(gf: GraphFrame, spec: DerivedMetricSpec) -> GraphFrame:
    """Attach the derived column described by `spec` and return the new frame."""
    if spec.name in gf.metrics and not spec.overwrite:
        raise NameCollision(f"metric {spec.name!r} already exists")
    for m in spec.metrics:
        if m not in gf.metrics:
            raise MissingMetric(m, f"operand of derived metric {spec.name!r}")

    if spec.kind == "percent_of_total":
        (metric,) = spec.metrics
        col = gf.metrics.column(metric)
        denominators = {r: _percent_denominator(gf, metric, r) for r in gf.roots}
        values: dict[NodeId, float] = {}
        for root in gf.roots:
            denom = denominators[root]
            for nid in gf.subtree_ids(root):
                values[nid] = 100.0 * col[nid] / denom if denom != 0.0 else 0.0
    elif spec.kind == "binary":
        m1, m2 = spec.metrics
        op = BINARY_OPS[spec.op] if isinstance(spec.op, str) else spec.op
        if op is None:
            raise ValueError("binary derivation needs an operator")
        c1, c2 = gf.metrics.column(m1), gf.metrics.column(m2)
        values = {nid: float(op(c1[nid], c2[nid])) for nid in gf.nodes}
    elif spec.kind == "speedup":
        (other,) = spec.frames
        (metric,) = spec.metrics
        frame = speedup(gf, other, metric).frame
        return _rename_column(frame, SPEEDUP_METRIC, spec.name)
    elif spec.kind == "imbalance":
        (metric,) = spec.metrics
        frame = imbalance((gf,) + spec.frames, metric)
        return _rename_column(frame, IMBALANCE_METRIC, spec.name)
    else:
        raise ValueError(f"unknown derivation kind {spec.kind!r}")

    return gf.with_metrics(gf.metrics.with_column(spec.name, values))


def _rename_column(gf: GraphFrame, old: str, new: str) -> GraphFrame:
    if old == new:
        return gf
    from .model import MetricTable

    table = gf.metrics
    values = table.column(old)
    stripped = MetricTable(
        names=tuple(n for n in table.names if n != old),
        columns={k: v for k, v in table.columns.items() if k != old},
        units={k: v for k, v in table.units.items() if k != old},
    )
    return gf.with_metrics(stripped.with_column(new, values))


def filter_prune(gf: GraphFrame, predicate: NodePredicate) -> GraphFrame:
    """Keep every node satisfying `predicate` plus all of its ancestors.

    Nodes are only ever removed from the leaves toward the root, so no
    retained node is orphaned; roots are always retained. Node ids, frames,
    metric values and child order are preserved.
    """
    keep = [nid for nid in gf.preorder() if predicate(NodeView(gf, nid))]
    retained = ancestor_closure(gf, keep) | set(gf.roots)
    return restrict_to(gf, retained)
