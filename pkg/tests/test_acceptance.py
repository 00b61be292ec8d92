"""Acceptance suite: every exit criterion with its stated tolerance.

Each test prints one PASS line when its criterion holds (run with ``-v`` or
``-s`` to see them). Nothing here needs a browser or any UI component.
"""

import json
import math
import random
import subprocess
import sys
import time
from pathlib import Path

import pytest

from cctkit.ingest import read_folded, read_literal, write_folded, write_literal
from cctkit.layout import MIN_SEP, layout, thin_labels
from cctkit.model import build, finalize_inclusive
from cctkit.ops import imbalance, speedup
from cctkit.prune import (
    butterfly_histogram,
    classify,
    default_view_state,
    mass_prune,
    surrogate,
    toggle_collapse,
    visible,
)
from cctkit.query import from_view, parse, select, serialize

from conftest import (
    perturbed_tree,
    random_query,
    random_tree,
    random_view_state,
)
from oracles import (
    classify_brute,
    histogram_brute,
    is_ancestor_closed,
    iso_graphframe,
    overlaps_brute,
    overlaps_sorted,
    select_brute,
    subtree_ids_brute,
    subtree_mean_brute,
    visible_brute,
)

DATA = Path(__file__).parent / "data"

REL_TOL_CONSERVATION = 1e-9
REL_TOL_SURROGATE = 1e-9
REL_TOL_FORMATS = 1e-12
CONSERVATION_BUDGET_S = 10.0
LAYOUT_2700_BUDGET_S = 0.100
NEAR_LINEAR_RATIO = 3.0


def _passed(name: str) -> None:
    print(f"[PASS] {name}")


def test_c01_conservation_200_trees():
    rng = random.Random(101)
    started = time.perf_counter()
    for _ in range(200):
        gf = random_tree(rng, rng.randint(50, 3000))
        excl = gf.metrics.column("time")
        inc = gf.metrics.column("time (inc)")
        for root in gf.roots:
            total = math.fsum(excl[n] for n in gf.subtree_ids(root))
            assert math.isclose(inc[root], total, rel_tol=REL_TOL_CONSERVATION)
        for nid in gf.nodes:
            expected = excl[nid] + math.fsum(inc[c] for c in gf.children(nid))
            assert math.isclose(inc[nid], expected, rel_tol=REL_TOL_CONSERVATION)
    elapsed = time.perf_counter() - started
    assert elapsed < CONSERVATION_BUDGET_S, f"took {elapsed:.2f}s"
    _passed(f"conservation: 200 trees, rel tol {REL_TOL_CONSERVATION}, {elapsed:.2f}s")


def test_c02_prune_safety_500_pairs():
    rng = random.Random(202)
    violations = 0
    for _ in range(500):
        gf = random_tree(rng, rng.randint(1, 120), zero_frac=0.35)
        vs = random_view_state(rng, gf)
        vis = visible(gf, vs)
        if not is_ancestor_closed(gf, vis) or not set(gf.roots) <= set(vis):
            violations += 1
    assert violations == 0
    _passed("prune safety: 500 view states, visible always rooted and ancestor-closed")


def test_c03_query_round_trip():
    rng = random.Random(303)
    for _ in range(100):
        gf = random_tree(rng, rng.randint(2, 80), zero_frac=0.3)
        vs = random_view_state(rng, gf)
        assert select(gf, from_view(gf, vs)) == visible(gf, vs)
    for _ in range(200):
        q = random_query(rng, depth=3)
        assert parse(serialize(q)) == q
    _passed("query round-trip: 100 view states exact, 200 ASTs reparse equal")


def test_c04_query_semantics_oracle():
    rng = random.Random(404)
    mismatches = 0
    for _ in range(100):
        gf = random_tree(rng, rng.randint(2, 60), zero_frac=0.3)
        q = random_query(rng, depth=2)
        if select(gf, q) != select_brute(gf, q):
            mismatches += 1
    assert mismatches == 0
    _passed("query semantics: 100 (tree, query) pairs match exhaustive path oracle")


def test_c05_surrogate_aggregation():
    rng = random.Random(505)
    for _ in range(80):
        gf = random_tree(rng, rng.randint(1, 150))
        nid = rng.choice(list(gf.nodes))
        node = surrogate(gf, nid)
        for name in gf.metrics.names:
            expected = subtree_mean_brute(gf, nid, name)
            assert math.isclose(
                node.aggregated_metrics[name], expected, rel_tol=REL_TOL_SURROGATE
            )
    gf = random_tree(rng, 40, zero_frac=0.0)
    leaf = next(iter(gf.leaves()))
    node = surrogate(gf, leaf)
    assert node.elided_count == 1
    for name in gf.metrics.names:
        assert node.aggregated_metrics[name] == gf.metrics.value(name, leaf)
    _passed(f"surrogate aggregation: subtree means within {REL_TOL_SURROGATE}, leaf exact")


def test_c06_butterfly_histogram():
    rng = random.Random(606)
    for _ in range(60):
        gf = random_tree(rng, rng.randint(1, 300), zero_frac=0.4)
        assert classify(gf, "time") == classify_brute(gf, "time")
        hist = butterfly_histogram(gf, "time", rng.randint(1, 25))
        assert sum(hist.prunable_counts) + sum(hist.protected_counts) == len(gf)
        prunable, _ = classify_brute(gf, "time")
        top, bottom = histogram_brute(gf, "time", hist.bin_edges, prunable)
        assert list(hist.prunable_counts) == top
        assert list(hist.protected_counts) == bottom
        # default rule: elide exactly the zero-valued prunable (non-root) nodes
        vs = default_view_state(gf)
        col = gf.metrics.column("time")
        elided = set(gf.nodes) - set(visible(gf, vs))
        zero_prunable = {n for n in prunable if col[n] == 0.0} - set(gf.roots)
        assert elided == zero_prunable
    _passed("butterfly histogram: totals, classification, and default zero elision exact")


def _label_set(rng, n):
    return [
        (
            i,
            rng.uniform(0.0, n * rng.uniform(2.0, 10.0)),
            f"label{i}",
            14.0,
            rng.choice([0.0, rng.uniform(0.0, 60.0)]),
            float(rng.randint(0, 8)),
        )
        for i in range(n)
    ]


def test_c07_label_thinning_1000_sets():
    rng = random.Random(707)
    sizes = [rng.randint(5, 200) for _ in range(935)]
    sizes += [rng.randint(200, 1000) for _ in range(60)]
    sizes += [rng.randint(2000, 3000) for _ in range(5)]
    assert len(sizes) == 1000
    for count, n in enumerate(sizes):
        candidates = _label_set(rng, n)
        retained = thin_labels(candidates)
        boxes = [(c[1], c[3]) for c in candidates]
        retained_boxes = [(c[1], c[3]) for c in candidates if c[0] in retained]
        oracle = overlaps_brute if n <= 250 else overlaps_sorted
        assert not oracle(retained_boxes), f"overlap left in set {count}"
        overlapping_ids = set()
        for i, j in overlaps_sorted(boxes):
            overlapping_ids.add(candidates[i][0])
            overlapping_ids.add(candidates[j][0])
        removed = {c[0] for c in candidates} - retained
        assert removed <= overlapping_ids, "an isolated label was removed"
        assert thin_labels(candidates) == retained
    _passed("label thinning: 1000 sets, zero residual overlaps, no needless removals")


def _full_view(gf):
    col = gf.metrics.column("time")
    return mass_prune(gf, default_view_state(gf), min(col.values()), max(col.values()))


def _layout_time(gf, repeats=5):
    vs = _full_view(gf)
    best = math.inf
    for _ in range(repeats):
        started = time.perf_counter()
        layout(gf, vs)
        best = min(best, time.perf_counter() - started)
    return best


def test_c08_layout_scale_and_near_linearity():
    rng = random.Random(808)
    for size in (1500, 2700):
        gf = random_tree(rng, size, zero_frac=0.2)
        result = layout(gf, _full_view(gf))
        assert len(result.nodes) == size
        by_depth = {}
        for node in result.nodes:
            by_depth.setdefault(node.x, []).append(node.y)
        violations = 0
        for ys in by_depth.values():
            ys.sort()
            violations += sum(
                1 for a, b in zip(ys, ys[1:]) if b - a < MIN_SEP - 1e-9
            )
        assert violations == 0
    gf_2700 = random_tree(random.Random(809), 2700, zero_frac=0.2)
    elapsed = _layout_time(gf_2700)
    assert elapsed < LAYOUT_2700_BUDGET_S, f"2700-node layout took {elapsed*1000:.1f}ms"
    t1500 = _layout_time(random_tree(random.Random(810), 1500, zero_frac=0.2))
    t3000 = _layout_time(random_tree(random.Random(810), 3000, zero_frac=0.2))
    ratio = t3000 / t1500
    assert ratio < NEAR_LINEAR_RATIO, f"scaling ratio {ratio:.2f}"
    _passed(
        f"layout scale: zero separation violations at 1500/2700; "
        f"2700 nodes in {elapsed*1000:.1f}ms; t(3000)/t(1500) = {ratio:.2f}"
    )


def test_c09_speedup_and_imbalance():
    rng = random.Random(909)
    gf = random_tree(rng, 200, zero_frac=0.3)
    result, _ = speedup(gf, gf, "time")
    excl = gf.metrics.column("time")
    for nid, value in result.metrics.column("speedup").items():
        if excl[nid] != 0.0:
            assert value == 1.0

    a = finalize_inclusive(
        build(
            [
                ("main/solve/axpy", {"time": 12.0}),
                ("main/solve/dot", {"time": 9.0}),
                ("main/io", {"time": 4.0}),
                ("main/extra_a", {"time": 2.0}),
            ]
        )
    )
    b = finalize_inclusive(
        build(
            [
                ("main/solve/axpy", {"time": 3.0}),
                ("main/solve/dot", {"time": 4.5}),
                ("main/io", {"time": 8.0}),
                ("main/extra_b", {"time": 5.0}),
            ]
        )
    )
    result, warnings = speedup(a, b, "time")
    got = {result.name_path(n): result.metrics.value("speedup", n) for n in result.nodes}
    assert got[("main", "solve", "axpy")] == 4.0
    assert got[("main", "solve", "dot")] == 2.0
    assert got[("main", "io")] == 0.5
    # 0/0 at the shared prefix nodes is defined as 1.0
    assert got[("main",)] == 1.0
    assert got[("main", "solve")] == 1.0
    assert ("main", "extra_a") not in got and ("main", "extra_b") not in got
    assert not warnings

    frames = [random_tree(random.Random(911), 80, zero_frac=0.2)] * 3
    result = imbalance(frames, "time")
    assert all(v == 0.0 for v in result.metrics.column("imbalance").values())
    _passed("speedup/imbalance: self ratio 1.0, fixtures match path oracle, identical variance 0")


def test_c10_format_round_trips():
    rng = random.Random(1010)
    for _ in range(100):
        gf = random_tree(
            rng, rng.randint(1, 150), distinct_siblings=True, folded_safe=True
        )
        assert iso_graphframe(gf, read_literal(write_literal(gf)), tol=REL_TOL_FORMATS)
        assert iso_graphframe(gf, read_folded(write_folded(gf)), tol=REL_TOL_FORMATS)
    lines = []
    total = 0
    for i in range(3000):
        value = rng.randint(0, 100_000)
        total += value
        lines.append(f"fn{i % 11};mid{i % 29};leaf{i} {value}")
    gf = read_folded("\n".join(lines))
    assert math.fsum(gf.metrics.column("time").values()) == float(total)
    _passed(f"format round-trips: 100 trees both formats within {REL_TOL_FORMATS}; folded total exact")


def _cct(*args):
    return subprocess.run(
        [sys.executable, "-m", "cctkit.cli", *args], capture_output=True, text=True
    )


def test_c11_cli_end_to_end(tmp_path):
    fixture = DATA / "fixture30.json"

    golden = (DATA / "fixture30_view.txt").read_text()
    view = _cct("view", str(fixture), "--no-color")
    assert view.returncode == 0 and view.stdout == golden

    export = _cct("query", "--export", str(fixture), "--metric", "time", "--range", "1.0:7.0")
    assert export.returncode == 0, export.stderr
    query_text = export.stdout.strip()

    out = tmp_path / "pruned.json"
    applied = _cct("query", "--apply", query_text, str(fixture), "-o", str(out))
    assert applied.returncode == 0, applied.stderr

    gf = read_literal(fixture.read_text())
    vs = mass_prune(gf, default_view_state(gf), 1.0, 7.0)
    expected_paths = set()
    for nid in visible(gf, vs):
        names = []
        cur = gf.node(nid)
        while True:
            names.append(cur.frame.name)
            if cur.parent is None:
                break
            cur = gf.node(cur.parent)
        expected_paths.add(tuple(reversed(names)))
    pruned = read_literal(out.read_text())
    got_paths = {pruned.name_path(n) for n in pruned.nodes}
    assert got_paths == expected_paths
    _passed("cli end-to-end: golden view match; prune -> export -> apply reproduces the visible tree")
