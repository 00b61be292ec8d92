import pytest

from cctkit.errors import UnknownNode
from cctkit.model import Frame, GraphFrameBuilder, build, finalize_inclusive
from cctkit.paths import node_path, resolve_node_path

from conftest import random_tree


def test_round_trip_every_node(rng):
    gf = random_tree(rng, 80)
    for nid in gf.nodes:
        assert resolve_node_path(gf, node_path(gf, nid)) == nid


def test_escaped_names_round_trip():
    builder = GraphFrameBuilder(metric_names=("time",))
    root = builder.new_node(None, Frame("a/b"), {"time": 1.0})
    child = builder.new_node(root, Frame("x@y:1"), {"time": 2.0})
    tricky = builder.new_node(root, Frame("t~i/l@de"), {"time": 3.0})
    gf = finalize_inclusive(builder.build())
    for nid in (root, child, tricky):
        path = node_path(gf, nid)
        assert resolve_node_path(gf, path) == nid
    assert node_path(gf, child) == "a~1b@0/x~2y:1@0"


def test_index_free_resolution_requires_uniqueness():
    builder = GraphFrameBuilder(metric_names=("time",))
    root = builder.new_node(None, Frame("r"), {"time": 0.0})
    first = builder.new_node(root, Frame("dup", "a.c", 1), {"time": 1.0})
    builder.new_node(root, Frame("dup", "a.c", 2), {"time": 2.0})
    only = builder.new_node(root, Frame("solo"), {"time": 3.0})
    gf = finalize_inclusive(builder.build())
    assert resolve_node_path(gf, "r/solo") == only
    with pytest.raises(UnknownNode):
        resolve_node_path(gf, "r/dup")
    assert resolve_node_path(gf, "r/dup@0") == first


def test_resolution_errors():
    gf = finalize_inclusive(build([("r/a", {"time": 1.0})]))
    with pytest.raises(UnknownNode):
        resolve_node_path(gf, "")
    with pytest.raises(UnknownNode):
        resolve_node_path(gf, "r/zzz")
    with pytest.raises(UnknownNode):
        resolve_node_path(gf, "r@5")
    with pytest.raises(UnknownNode):
        resolve_node_path(gf, "zzz@0/a@0")
