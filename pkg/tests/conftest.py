"""Shared generators for randomized tests.

Trees are built with explicit parent links (no prefix merging) so node counts
and shapes are exact; names are drawn from a small pool to exercise duplicate
sibling names.
"""

from __future__ import annotations

import random
from dataclasses import replace

import pytest

from cctkit.model import Frame, GraphFrame, GraphFrameBuilder, finalize_inclusive
from cctkit.prune import COLOR_MAP_DIVERGING, COLOR_MAP_SINGLE_HUE, ViewState
from cctkit import query as q


def random_tree(
    rng: random.Random,
    n_nodes: int,
    max_roots: int = 3,
    name_pool: int = 12,
    zero_frac: float = 0.25,
    distinct_siblings: bool = False,
    folded_safe: bool = False,
) -> GraphFrame:
    assert n_nodes >= 1
    builder = GraphFrameBuilder(metric_names=("time",))
    n_roots = min(n_nodes, rng.randint(1, max_roots))
    ids: list[int] = []
    used_keys: dict[int | None, set] = {}
    for i in range(n_nodes):
        parent = None if i < n_roots else ids[rng.randrange(len(ids))]
        name = f"fn{rng.randrange(name_pool)}"
        file = f"src{rng.randrange(3)}.c" if rng.random() < 0.3 else None
        line = rng.randrange(1, 500) if file is not None and rng.random() < 0.8 else None
        if folded_safe and file is not None and line is None:
            # The folded format only carries source attributes as a pair.
            line = rng.randrange(1, 500)
        if distinct_siblings:
            seen = used_keys.setdefault(parent, set())
            while (name, file, line) in seen:
                line = (line or 0) + 1
                file = file or "srcX.c"
            seen.add((name, file, line))
        value = 0.0 if rng.random() < zero_frac else rng.uniform(0.01, 100.0)
        ids.append(builder.new_node(parent, Frame(name, file, line), {"time": value}))
    return finalize_inclusive(builder.build())


def perturbed_tree(
    rng: random.Random,
    gf: GraphFrame,
    drop_prob: float = 0.12,
    add_prob: float = 0.15,
) -> GraphFrame:
    """A structural variant of `gf`: same roots, some subtrees dropped, some
    extra leaves added, fresh metric values. Guarantees path overlap."""
    builder = GraphFrameBuilder(metric_names=("time",))
    new_ids: dict[int, int] = {}
    for nid in gf.preorder():
        parent = gf.parent(nid)
        if parent is not None:
            if parent not in new_ids or rng.random() < drop_prob:
                continue
        value = 0.0 if rng.random() < 0.2 else rng.uniform(0.01, 100.0)
        new_ids[nid] = builder.new_node(
            new_ids.get(parent) if parent is not None else None,
            gf.frame(nid),
            {"time": value},
        )
        if rng.random() < add_prob:
            builder.new_node(
                new_ids[nid],
                Frame(f"extra{rng.randrange(1000)}"),
                {"time": rng.uniform(0.01, 50.0)},
            )
    return finalize_inclusive(builder.build())


def random_view_state(rng: random.Random, gf: GraphFrame, collapse_max: int = 4) -> ViewState:
    names = gf.metrics.names
    vs = ViewState(
        primary_metric=rng.choice(names),
        secondary_metric=rng.choice(names),
        color_map=rng.choice((COLOR_MAP_DIVERGING, COLOR_MAP_SINGLE_HUE)),
        inverted=rng.random() < 0.5,
    )
    if rng.random() < 0.6:
        values = sorted(gf.metrics.column(vs.primary_metric).values())
        lo = rng.uniform(values[0] - 1.0, values[-1])
        hi = rng.uniform(lo, values[-1] + 1.0)
        vs = replace(vs, mass_prune_range=(lo, hi))
    # Non-nested collapse roots.
    collapsed: set[int] = set()
    related: set[int] = set()
    candidates = list(gf.nodes)
    rng.shuffle(candidates)
    for nid in candidates:
        if len(collapsed) >= collapse_max:
            break
        if nid in related:
            continue
        chain = set()
        node = gf.node(nid)
        while node.parent is not None:
            chain.add(node.parent)
            node = gf.node(node.parent)
        if chain & collapsed:
            continue
        collapsed.add(nid)
        related.update(chain)
        related.update(gf.subtree_ids(nid))
    return replace(vs, collapsed=frozenset(collapsed))


_REGEX_POOL = (
    "fn[0-9]+",
    "fn1.*",
    "fn[02468]",
    "fn3",
    "nomatch.*x",
    "fn(1|2|7)",
)

_OPS = ("<", "<=", "==", ">=", ">")


def random_predicate(rng: random.Random, metric_names=("time", "time (inc)")) -> q.Predicate:
    kind = rng.randrange(5)
    if kind == 0:
        return q.NameRegex(rng.choice(_REGEX_POOL))
    if kind == 1:
        return q.MetricCmp(rng.choice(metric_names), rng.choice(_OPS), round(rng.uniform(0, 120), 2))
    if kind == 2:
        return q.DepthCmp(rng.choice(_OPS), rng.randrange(0, 7))
    if kind == 3:
        return q.ChildIndexCmp(rng.choice(_OPS), rng.randrange(0, 4))
    return q.Leaf(rng.random() < 0.8)


def random_step(rng: random.Random, metric_names=("time", "time (inc)")) -> q.Step:
    quant = rng.choice((q.ONE, q.STAR, q.PLUS))
    n_preds = rng.choice((0, 1, 1, 2))
    preds = tuple(random_predicate(rng, metric_names) for _ in range(n_preds))
    return q.Step(quant, preds)


def random_pattern(rng: random.Random, metric_names=("time", "time (inc)")) -> q.Pattern:
    return q.Pattern(tuple(random_step(rng, metric_names) for _ in range(rng.randint(1, 4))))


def random_query(rng: random.Random, depth: int = 2, metric_names=("time", "time (inc)")) -> q.Query:
    if depth <= 0 or rng.random() < 0.45:
        return random_pattern(rng, metric_names)
    kind = rng.randrange(3)
    if kind == 0:
        return q.And(random_query(rng, depth - 1, metric_names), random_query(rng, depth - 1, metric_names))
    if kind == 1:
        return q.Or(random_query(rng, depth - 1, metric_names), random_query(rng, depth - 1, metric_names))
    return q.Not(random_query(rng, depth - 1, metric_names))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xC07FEE)
