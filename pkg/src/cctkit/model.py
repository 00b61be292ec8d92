"""Core data model: a forest of calling-context nodes plus a per-node metric table.

A :class:`GraphFrame` couples the tree structure (one or more roots, each node
carrying a :class:`Frame` identity) with a column-oriented :class:`MetricTable`.
Profiles are merged into the forest as prefix trees: two call paths that share
a prefix share those nodes. GraphFrames are immutable once built; every
transformation in this package returns a new frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .errors import EmptyInput, InconsistentMetrics, MissingMetric, UnknownNode

NodeId = int

EXCLUSIVE_TIME = "time"
INCLUSIVE_TIME = "time (inc)"


@dataclass(frozen=True)
class Frame:
    """Identity of a code region: a name plus optional source attributes."""

    name: str
    file: str | None = None
    line: int | None = None

    def __post_init__(self):
        if not self.name:
            raise ValueError("frame name must be non-empty")
        if self.line is not None and self.line < 0:
            raise ValueError("frame line must be non-negative")


@dataclass(frozen=True)
class CctNode:
    """One calling context: a frame reached through a unique call path."""

    id: NodeId
    frame: Frame
    parent: NodeId | None
    children: tuple[NodeId, ...]
    depth: int


def _check_finite(name: str, value: float) -> float:
    v = float(value)
    if not math.isfinite(v):
        raise ValueError(f"metric {name!r} has non-finite value {value!r}")
    return v


@dataclass(frozen=True)
class MetricTable:
    """Column-oriented metric storage: every node has a row, every row has
    one finite float per metric name."""

    names: tuple[str, ...]
    columns: dict[str, dict[NodeId, float]]
    units: dict[str, str] = field(default_factory=dict)

    def __contains__(self, name: str) -> bool:
        return name in self.columns

    def value(self, name: str, nid: NodeId) -> float:
        try:
            col = self.columns[name]
        except KeyError:
            raise MissingMetric(name) from None
        return col[nid]

    def column(self, name: str) -> dict[NodeId, float]:
        try:
            return self.columns[name]
        except KeyError:
            raise MissingMetric(name) from None

    def row(self, nid: NodeId) -> dict[str, float]:
        return {name: self.columns[name][nid] for name in self.names}

    def with_column(self, name: str, values: Mapping[NodeId, float]) -> "MetricTable":
        """Return a new table with `values` as column `name` (replacing it
        if already present)."""
        checked = {nid: _check_finite(name, v) for nid, v in values.items()}
        names = self.names if name in self.columns else self.names + (name,)
        columns = dict(self.columns)
        columns[name] = checked
        return MetricTable(names=names, columns=columns, units=dict(self.units))

    def restrict(self, ids: Iterable[NodeId]) -> "MetricTable":
        keep = set(ids)
        columns = {
            name: {nid: v for nid, v in col.items() if nid in keep}
            for name, col in self.columns.items()
        }
        return MetricTable(names=self.names, columns=columns, units=dict(self.units))


@dataclass(frozen=True)
class GraphFrame:
    """A rooted forest of calling contexts plus its metric table."""

    roots: tuple[NodeId, ...]
    nodes: dict[NodeId, CctNode]
    metrics: MetricTable

    def __post_init__(self):
        if not self.roots:
            raise ValueError("a GraphFrame needs at least one root")

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, nid: NodeId) -> bool:
        return nid in self.nodes

    def node(self, nid: NodeId) -> CctNode:
        try:
            return self.nodes[nid]
        except KeyError:
            raise UnknownNode(f"no node with id {nid}") from None

    def frame(self, nid: NodeId) -> Frame:
        return self.node(nid).frame

    def parent(self, nid: NodeId) -> NodeId | None:
        return self.node(nid).parent

    def children(self, nid: NodeId) -> tuple[NodeId, ...]:
        return self.node(nid).children

    def depth(self, nid: NodeId) -> int:
        return self.node(nid).depth

    def is_leaf(self, nid: NodeId) -> bool:
        return not self.node(nid).children

    def preorder(self) -> Iterator[NodeId]:
        """All node ids, depth first, children in insertion order."""
        stack = list(reversed(self.roots))
        while stack:
            nid = stack.pop()
            yield nid
            stack.extend(reversed(self.nodes[nid].children))

    def subtree_ids(self, nid: NodeId) -> Iterator[NodeId]:
        """`nid` and every node below it."""
        self.node(nid)
        stack = [nid]
        while stack:
            cur = stack.pop()
            yield cur
            stack.extend(reversed(self.nodes[cur].children))

    def leaves(self) -> Iterator[NodeId]:
        for nid in self.preorder():
            if not self.nodes[nid].children:
                yield nid

    def root_of(self, nid: NodeId) -> NodeId:
        node = self.node(nid)
        while node.parent is not None:
            node = self.nodes[node.parent]
        return node.id

    def name_path(self, nid: NodeId) -> tuple[str, ...]:
        return tuple(self.nodes[i].frame.name for i in path_to_root(self, nid))

    def siblings(self, nid: NodeId) -> tuple[NodeId, ...]:
        """The ordered sibling list containing `nid` (the roots list for a root)."""
        parent = self.node(nid).parent
        return self.roots if parent is None else self.nodes[parent].children

    def child_index(self, nid: NodeId) -> int:
        return self.siblings(nid).index(nid)

    def with_metrics(self, metrics: MetricTable) -> "GraphFrame":
        return GraphFrame(roots=self.roots, nodes=self.nodes, metrics=metrics)


class GraphFrameBuilder:
    """Single-threaded prefix-tree accumulator.

    Records targeting the same full call path sum their exclusive metrics;
    nodes created only by prefix inference keep 0.0 for every metric.
    Node identity during the merge is (frame name, file, line) under the
    same parent.
    """

    def __init__(self, metric_names: Sequence[str] | None = None):
        self._declared: tuple[str, ...] | None = (
            tuple(metric_names) if metric_names is not None else None
        )
        self._explicit = metric_names is not None
        self._frames: list[Frame] = []
        self._parents: list[NodeId | None] = []
        self._children: list[list[NodeId]] = []
        self._depths: list[int] = []
        self._values: list[dict[str, float]] = []
        self._roots: list[NodeId] = []
        self._index: dict[tuple[NodeId | None, str, str | None, int | None], NodeId] = {}

    @staticmethod
    def _as_frames(path) -> tuple[Frame, ...]:
        if isinstance(path, str):
            parts = path.split("/")
            if any(not p for p in parts):
                raise ValueError(f"empty frame in path {path!r}")
            return tuple(Frame(p) for p in parts)
        frames = tuple(p if isinstance(p, Frame) else Frame(str(p)) for p in path)
        if not frames:
            raise ValueError("empty frame path")
        return frames

    def _node_for(self, parent: NodeId | None, frame: Frame) -> NodeId:
        key = (parent, frame.name, frame.file, frame.line)
        nid = self._index.get(key)
        if nid is not None:
            return nid
        nid = len(self._frames)
        self._frames.append(frame)
        self._parents.append(parent)
        self._children.append([])
        self._depths.append(0 if parent is None else self._depths[parent] + 1)
        self._values.append({})
        if parent is None:
            self._roots.append(nid)
        else:
            self._children[parent].append(nid)
        self._index[key] = nid
        return nid

    def new_node(
        self, parent: NodeId | None, frame: Frame, record: Mapping[str, float]
    ) -> NodeId:
        """Append a node without prefix merging (for explicit tree documents,
        where identical sibling frames stay distinct). Must not be mixed with
        :meth:`add_path` in one builder."""
        nid = len(self._frames)
        self._frames.append(frame)
        self._parents.append(parent)
        self._children.append([])
        self._depths.append(0 if parent is None else self._depths[parent] + 1)
        self._values.append(
            {name: _check_finite(name, v) for name, v in record.items()}
        )
        if parent is None:
            self._roots.append(nid)
        else:
            self._children[parent].append(nid)
        return nid

    def add_path(self, path, record: Mapping[str, float]) -> NodeId:
        if self._declared is None:
            self._declared = tuple(record.keys())
        declared = set(self._declared)
        keys = set(record.keys())
        if self._explicit:
            if not keys <= declared:
                raise InconsistentMetrics(
                    f"record metrics {sorted(keys)} not a subset of declared {sorted(declared)}"
                )
        elif keys != declared:
            raise InconsistentMetrics(
                f"record metrics {sorted(keys)} do not match {sorted(declared)}"
            )
        nid: NodeId | None = None
        for frame in self._as_frames(path):
            nid = self._node_for(nid, frame)
        assert nid is not None
        acc = self._values[nid]
        for name, value in record.items():
            acc[name] = acc.get(name, 0.0) + _check_finite(name, value)
        return nid

    def build(self) -> GraphFrame:
        if not self._frames:
            raise EmptyInput("no profile records")
        names = self._declared or ()
        columns: dict[str, dict[NodeId, float]] = {name: {} for name in names}
        for nid, acc in enumerate(self._values):
            for name in names:
                columns[name][nid] = acc.get(name, 0.0)
        nodes = {
            nid: CctNode(
                id=nid,
                frame=self._frames[nid],
                parent=self._parents[nid],
                children=tuple(self._children[nid]),
                depth=self._depths[nid],
            )
            for nid in range(len(self._frames))
        }
        table = MetricTable(names=tuple(names), columns=columns)
        return GraphFrame(roots=tuple(self._roots), nodes=nodes, metrics=table)


def build(
    paths: Iterable[tuple[object, Mapping[str, float]]],
    metric_names: Sequence[str] | None = None,
) -> GraphFrame:
    """Merge (frame-path, metric-record) pairs into a prefix-tree GraphFrame.

    Paths may be `"a/b/c"` strings or sequences of names / :class:`Frame`.
    Raises :class:`EmptyInput` when there are no records and
    :class:`InconsistentMetrics` when records disagree on metric names.
    """
    builder = GraphFrameBuilder(metric_names)
    count = 0
    for path, record in paths:
        builder.add_path(path, record)
        count += 1
    if count == 0:
        raise EmptyInput("no profile records")
    return builder.build()


def finalize_inclusive(gf: GraphFrame) -> GraphFrame:
    """Attach the inclusive-time column: each node's exclusive time plus the
    inclusive time of all of its children. Overwrites any previous inclusive
    column."""
    if EXCLUSIVE_TIME not in gf.metrics:
        raise MissingMetric(EXCLUSIVE_TIME, "needed to compute inclusive time")
    excl = gf.metrics.column(EXCLUSIVE_TIME)
    inc: dict[NodeId, float] = {}
    # Explicit post-order so arbitrarily deep chains cannot overflow the stack.
    for root in gf.roots:
        stack: list[tuple[NodeId, bool]] = [(root, False)]
        while stack:
            nid, expanded = stack.pop()
            node = gf.nodes[nid]
            if expanded or not node.children:
                total = excl[nid]
                for child in node.children:
                    total += inc[child]
                inc[nid] = total
            else:
                stack.append((nid, True))
                stack.extend((c, False) for c in reversed(node.children))
    return gf.with_metrics(gf.metrics.with_column(INCLUSIVE_TIME, inc))


def path_to_root(gf: GraphFrame, nid: NodeId) -> list[NodeId]:
    """The unique path from the root down to `nid`, root first."""
    node = gf.node(nid)
    path = [node.id]
    while node.parent is not None:
        node = gf.nodes[node.parent]
        path.append(node.id)
    path.reverse()
    return path


def ancestors(gf: GraphFrame, nid: NodeId) -> frozenset[NodeId]:
    """All proper ancestors of `nid` (empty for a root)."""
    return frozenset(path_to_root(gf, nid)[:-1])


def descendants(gf: GraphFrame, nid: NodeId) -> frozenset[NodeId]:
    """Every node strictly below `nid`."""
    out = set(gf.subtree_ids(nid))
    out.discard(nid)
    return frozenset(out)


def ancestor_closure(gf: GraphFrame, ids: Iterable[NodeId]) -> frozenset[NodeId]:
    """`ids` together with every ancestor of every member."""
    closed: set[NodeId] = set()
    for nid in ids:
        node = gf.node(nid)
        while node.id not in closed:
            closed.add(node.id)
            if node.parent is None:
                break
            node = gf.nodes[node.parent]
    return frozenset(closed)


def restrict_to(
    gf: GraphFrame, retained: Iterable[NodeId], keep_roots: bool = True
) -> GraphFrame:
    """A new GraphFrame keeping only `retained` nodes (an ancestor-closed
    set). With `keep_roots` every root survives regardless; otherwise roots
    outside the set are dropped (an empty result is an error). Node ids,
    frames, metric values and child order are preserved."""
    keep = set(retained)
    if keep_roots:
        keep.update(gf.roots)
    roots = tuple(r for r in gf.roots if r in keep)
    if not roots:
        raise ValueError("nothing retained: no roots left")
    nodes: dict[NodeId, CctNode] = {}
    for nid in keep:
        old = gf.node(nid)
        if old.parent is not None and old.parent not in keep:
            raise ValueError("retained set is not ancestor-closed")
        nodes[nid] = CctNode(
            id=old.id,
            frame=old.frame,
            parent=old.parent,
            children=tuple(c for c in old.children if c in keep),
            depth=old.depth,
        )
    return GraphFrame(roots=roots, nodes=nodes, metrics=gf.metrics.restrict(keep))


def node_view(gf: GraphFrame, nid: NodeId) -> "NodeView":
    return NodeView(gf, nid)


class NodeView:
    """Read-only facade handed to filter predicates."""

    __slots__ = ("_gf", "id")

    def __init__(self, gf: GraphFrame, nid: NodeId):
        self._gf = gf
        self.id = nid

    @property
    def frame(self) -> Frame:
        return self._gf.frame(self.id)

    @property
    def name(self) -> str:
        return self._gf.frame(self.id).name

    @property
    def depth(self) -> int:
        return self._gf.depth(self.id)

    @property
    def is_leaf(self) -> bool:
        return self._gf.is_leaf(self.id)

    @property
    def metrics(self) -> dict[str, float]:
        return self._gf.metrics.row(self.id)

    def __getitem__(self, metric: str) -> float:
        return self._gf.metrics.value(metric, self.id)


NodePredicate = Callable[[NodeView], bool]
