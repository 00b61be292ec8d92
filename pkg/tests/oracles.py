"""Brute-force reference implementations used to check the library.

Everything here recomputes results from first principles with straightforward
loops, independent of the code paths under test.
"""

from __future__ import annotations

import math
import re
from functools import lru_cache

from cctkit.model import GraphFrame
from cctkit import query as q


def subtree_ids_brute(gf: GraphFrame, nid: int) -> list[int]:
    out = [nid]
    i = 0
    while i < len(out):
        out.extend(gf.children(out[i]))
        i += 1
    return out


def iso_graphframe(a: GraphFrame, b: GraphFrame, tol: float = 0.0) -> bool:
    """Structural equality: same shape in the same child order, equal frames,
    same metric names, values within `tol` (relative)."""
    if sorted(a.metrics.names) != sorted(b.metrics.names):
        return False
    if len(a.roots) != len(b.roots):
        return False
    stack = list(zip(a.roots, b.roots))
    while stack:
        na, nb = stack.pop()
        if a.frame(na) != b.frame(nb):
            return False
        for name in a.metrics.names:
            va = a.metrics.value(name, na)
            vb = b.metrics.value(name, nb)
            if not math.isclose(va, vb, rel_tol=tol, abs_tol=tol):
                return False
        ca, cb = a.children(na), b.children(nb)
        if len(ca) != len(cb):
            return False
        stack.extend(zip(ca, cb))
    return True


def iso_unordered(a: GraphFrame, b: GraphFrame, tol: float = 1e-12) -> bool:
    """Isomorphism ignoring sibling order; children are keyed by frame
    identity, which is unique among siblings of prefix-merged trees."""
    if sorted(a.metrics.names) != sorted(b.metrics.names):
        return False

    def keyed(gf, ids):
        table = {}
        for nid in ids:
            f = gf.frame(nid)
            key = (f.name, f.file, f.line)
            if key in table:
                return None
            table[key] = nid
        return table

    ra, rb = keyed(a, a.roots), keyed(b, b.roots)
    if ra is None or rb is None or set(ra) != set(rb):
        return False
    stack = [(ra[k], rb[k]) for k in ra]
    while stack:
        na, nb = stack.pop()
        for name in a.metrics.names:
            if not math.isclose(
                a.metrics.value(name, na), b.metrics.value(name, nb),
                rel_tol=tol, abs_tol=tol,
            ):
                return False
        ca, cb = keyed(a, a.children(na)), keyed(b, b.children(nb))
        if ca is None or cb is None or set(ca) != set(cb):
            return False
        stack.extend((ca[k], cb[k]) for k in ca)
    return True


def ancestor_closure_brute(gf: GraphFrame, ids) -> frozenset[int]:
    out = set()
    for nid in ids:
        node = gf.node(nid)
        out.add(nid)
        while node.parent is not None:
            out.add(node.parent)
            node = gf.node(node.parent)
    return frozenset(out)


def is_ancestor_closed(gf: GraphFrame, ids) -> bool:
    ids = set(ids)
    return all(gf.parent(nid) in ids for nid in ids if gf.parent(nid) is not None)


# ---------------------------------------------------------------------------
# query semantics


def _pred_ok(gf: GraphFrame, nid: int, pred) -> bool:
    if isinstance(pred, q.NameRegex):
        return re.fullmatch(pred.pattern, gf.frame(nid).name) is not None
    if isinstance(pred, q.MetricCmp):
        value = gf.metrics.value(pred.metric, nid)
        return _cmp(pred.op, value, pred.value)
    if isinstance(pred, q.DepthCmp):
        return _cmp(pred.op, gf.depth(nid), pred.value)
    if isinstance(pred, q.ChildIndexCmp):
        siblings = gf.roots if gf.parent(nid) is None else gf.children(gf.parent(nid))
        return _cmp(pred.op, siblings.index(nid), pred.value)
    if isinstance(pred, q.Leaf):
        return (len(gf.children(nid)) == 0) == pred.value
    raise TypeError(pred)


def _cmp(op, left, right):
    return {
        "<": left < right,
        "<=": left <= right,
        "==": left == right,
        ">=": left >= right,
        ">": left > right,
    }[op]


def path_matches_brute(gf: GraphFrame, path: tuple[int, ...], steps) -> bool:
    """Recursive segmentation check: can `steps` consume exactly `path`."""

    @lru_cache(maxsize=None)
    def go(i: int, j: int) -> bool:
        if j == len(steps):
            return i == len(path)
        step = steps[j]
        ok = i < len(path) and all(_pred_ok(gf, path[i], p) for p in step.preds)
        if step.quant == q.ONE:
            return ok and go(i + 1, j + 1)
        if step.quant == q.STAR:
            return go(i, j + 1) or (ok and go(i + 1, j))
        if step.quant == q.PLUS:
            return ok and (go(i + 1, j + 1) or (go(i + 1, j)))
        raise ValueError(step.quant)

    try:
        return go(0, 0)
    finally:
        go.cache_clear()


def select_brute(gf: GraphFrame, query) -> frozenset[int]:
    """Exhaustive evaluation over every root-to-node path."""
    if isinstance(query, q.Pattern):
        selected: set[int] = set()
        for nid in gf.nodes:
            path: list[int] = []
            cur = gf.node(nid)
            while True:
                path.append(cur.id)
                if cur.parent is None:
                    break
                cur = gf.node(cur.parent)
            path.reverse()
            if path_matches_brute(gf, tuple(path), query.steps):
                selected.update(path)
        return frozenset(selected)
    if isinstance(query, q.And):
        return select_brute(gf, query.left) & select_brute(gf, query.right)
    if isinstance(query, q.Or):
        return select_brute(gf, query.left) | select_brute(gf, query.right)
    if isinstance(query, q.Not):
        return frozenset(gf.nodes) - select_brute(gf, query.operand)
    raise TypeError(query)


# ---------------------------------------------------------------------------
# prune semantics


def classify_brute(gf: GraphFrame, metric: str):
    col = gf.metrics.column(metric)
    protected = set()
    for nid in gf.nodes:
        if col[nid] != 0.0:
            continue
        below = subtree_ids_brute(gf, nid)[1:]
        if any(col[d] != 0.0 for d in below):
            protected.add(nid)
    prunable = set(gf.nodes) - protected
    return frozenset(prunable), frozenset(protected)


def visible_brute(gf: GraphFrame, vs) -> frozenset[int]:
    col = gf.metrics.column(vs.primary_metric)
    prunable, _ = classify_brute(gf, vs.primary_metric)
    if vs.mass_prune_range is None:
        keep = {n for n in prunable if col[n] != 0.0}
    else:
        lo, hi = vs.mass_prune_range
        keep = {n for n in prunable if lo <= col[n] <= hi}
    keep.update(gf.roots)
    vis = set(ancestor_closure_brute(gf, keep))
    for root in vs.collapsed:
        vis.difference_update(subtree_ids_brute(gf, root)[1:])
    return frozenset(vis)


def subtree_mean_brute(gf: GraphFrame, nid: int, metric: str) -> float:
    ids = subtree_ids_brute(gf, nid)
    col = gf.metrics.column(metric)
    return sum(col[i] for i in ids) / len(ids)


def histogram_brute(gf: GraphFrame, metric: str, edges, prunable) -> tuple[list[int], list[int]]:
    top = [0] * (len(edges) - 1)
    bottom = [0] * (len(edges) - 1)
    for nid, value in gf.metrics.column(metric).items():
        if value < edges[0] or value > edges[-1]:
            continue
        idx = None
        for b in range(len(edges) - 1):
            last = b == len(edges) - 2
            if edges[b] <= value < edges[b + 1] or (last and value <= edges[-1]):
                idx = b
                break
        assert idx is not None
        if nid in prunable:
            top[idx] += 1
        else:
            bottom[idx] += 1
    return top, bottom


# ---------------------------------------------------------------------------
# labels


def overlaps_brute(boxes) -> list[tuple[int, int]]:
    """All overlapping index pairs among (y, height) boxes, O(n^2)."""
    out = []
    for i in range(len(boxes)):
        yi, hi = boxes[i]
        for j in range(i + 1, len(boxes)):
            yj, hj = boxes[j]
            if yi < yj + hj and yj < yi + hi:
                out.append((i, j))
    return out


def overlaps_sorted(boxes) -> list[tuple[int, int]]:
    """Same pair set as :func:`overlaps_brute`; iterates pairs in y order and
    stops each scan at the first later box out of reach (for y-sorted boxes,
    j overlaps i exactly when y_j - y_i < h_i), so large inputs stay
    tractable."""
    order = sorted(range(len(boxes)), key=lambda i: boxes[i][0])
    out = []
    for a in range(len(order)):
        i = order[a]
        yi, hi = boxes[i]
        for b in range(a + 1, len(order)):
            j = order[b]
            yj, hj = boxes[j]
            if yj - yi >= hi:
                break
            if yi < yj + hj and yj < yi + hi:
                out.append((min(i, j), max(i, j)))
    return sorted(out)
