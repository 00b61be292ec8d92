"""Profile readers and writers for the two supported text formats.

Literal tree documents are JSON: a list of tree objects, each with a
``frame`` (name plus optional file/line), a ``metrics`` mapping, and a
``children`` list. Folded stacks are line oriented: one semicolon-joined
call path plus a trailing exclusive-time value per line, ``#`` comments
ignored. Both readers finalize inclusive time when an exclusive ``time``
column is present.
"""

from __future__ import annotations

import json
from typing import Iterator

from .errors import MissingMetric, ParseError, SchemaError
from .model import (
    EXCLUSIVE_TIME,
    INCLUSIVE_TIME,
    Frame,
    GraphFrame,
    GraphFrameBuilder,
    finalize_inclusive,
)

FORMAT_LITERAL = "literal"
FORMAT_FOLDED = "folded"


def detect_format(text: str) -> str:
    """Literal documents start with '[' or '{'; everything else is folded."""
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        return FORMAT_LITERAL if stripped[0] in "[{" else FORMAT_FOLDED
    return FORMAT_FOLDED


def read_profile(text: str, fmt: str | None = None) -> GraphFrame:
    fmt = fmt or detect_format(text)
    if fmt == FORMAT_LITERAL:
        return read_literal(text)
    if fmt == FORMAT_FOLDED:
        return read_folded(text)
    raise ValueError(f"unknown profile format {fmt!r}")


# ---------------------------------------------------------------------------
# literal JSON trees


def _frame_from_doc(obj: object, where: str) -> Frame:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: frame must be an object")
    name = obj.get("name")
    if not isinstance(name, str) or not name:
        raise SchemaError(f"{where}: frame.name must be a non-empty string")
    file = obj.get("file")
    if file is not None and not isinstance(file, str):
        raise SchemaError(f"{where}: frame.file must be a string")
    line = obj.get("line")
    if line is not None and (isinstance(line, bool) or not isinstance(line, int) or line < 0):
        raise SchemaError(f"{where}: frame.line must be a non-negative integer")
    return Frame(name=name, file=file, line=line)


def read_literal(text: str) -> GraphFrame:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.msg) from exc
    if isinstance(doc, dict):
        doc = [doc]
    if not isinstance(doc, list) or not doc:
        raise SchemaError("document must be a non-empty list of tree objects")

    builder: GraphFrameBuilder | None = None
    metric_names: tuple[str, ...] | None = None

    # (doc node, parent id, breadcrumb for error messages), depth first.
    # Explicit documents keep identical sibling frames distinct, so nodes are
    # appended directly rather than prefix-merged.
    stack: list[tuple[object, int | None, str]] = [
        (tree, None, f"tree[{i}]") for i, tree in reversed(list(enumerate(doc)))
    ]
    while stack:
        node_doc, parent, where = stack.pop()
        if not isinstance(node_doc, dict):
            raise SchemaError(f"{where}: node must be an object")
        if "frame" not in node_doc:
            raise SchemaError(f"{where}: missing frame")
        if "metrics" not in node_doc:
            raise SchemaError(f"{where}: missing metrics")
        frame = _frame_from_doc(node_doc["frame"], where)
        metrics = node_doc["metrics"]
        if not isinstance(metrics, dict):
            raise SchemaError(f"{where}: metrics must be an object")
        for key, value in metrics.items():
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise SchemaError(f"{where}: metric {key!r} must be a number")
        names = tuple(sorted(metrics))
        if metric_names is None:
            metric_names = names
            builder = GraphFrameBuilder(metric_names=metric_names)
        elif names != metric_names:
            raise SchemaError(
                f"{where}: metric keys {list(names)} differ from {list(metric_names)}"
            )
        assert builder is not None
        nid = builder.new_node(parent, frame, {k: float(v) for k, v in metrics.items()})
        children = node_doc.get("children", [])
        if not isinstance(children, list):
            raise SchemaError(f"{where}: children must be a list")
        for i, child in reversed(list(enumerate(children))):
            stack.append((child, nid, f"{where}.children[{i}]"))

    assert builder is not None
    gf = builder.build()
    if EXCLUSIVE_TIME in gf.metrics and INCLUSIVE_TIME not in gf.metrics:
        gf = finalize_inclusive(gf)
    return gf


def write_literal(gf: GraphFrame) -> str:
    """Canonical JSON serialization: alphabetical metric keys, children
    always explicit. ``read_literal(write_literal(gf))`` reproduces the frame
    up to isomorphism."""

    metric_order = sorted(gf.metrics.names)
    docs: dict[int, dict] = {}
    for nid in gf.preorder():
        frame = gf.frame(nid)
        fdoc: dict = {"name": frame.name}
        if frame.file is not None:
            fdoc["file"] = frame.file
        if frame.line is not None:
            fdoc["line"] = frame.line
        node_doc = {
            "frame": fdoc,
            "metrics": {name: gf.metrics.value(name, nid) for name in metric_order},
            "children": [],
        }
        docs[nid] = node_doc
        parent = gf.parent(nid)
        if parent is not None:
            docs[parent]["children"].append(node_doc)

    return json.dumps([docs[r] for r in gf.roots], indent=1)


# ---------------------------------------------------------------------------
# folded stacks


def _parse_frame_token(token: str) -> Frame:
    # name@file:line populates source attributes; anything else is a bare name.
    if "@" in token:
        name, _, loc = token.rpartition("@")
        file, _, line = loc.rpartition(":")
        if name and file and line.isdigit():
            return Frame(name=name, file=file, line=int(line))
    return Frame(name=token)


def _folded_lines(text: str) -> Iterator[tuple[int, str]]:
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield lineno, stripped


def read_folded(text: str) -> GraphFrame:
    builder = GraphFrameBuilder(metric_names=(EXCLUSIVE_TIME,))
    saw_any = False
    for lineno, line in _folded_lines(text):
        head, sep, value_str = line.rpartition(" ")
        if not sep or not head:
            raise ParseError(lineno, "expected '<path> <value>'")
        try:
            value = float(value_str)
        except ValueError:
            raise ParseError(lineno, f"bad sample value {value_str!r}") from None
        tokens = head.rstrip().split(";")
        if any(not t for t in tokens):
            raise ParseError(lineno, "empty frame in call path")
        builder.add_path([_parse_frame_token(t) for t in tokens], {EXCLUSIVE_TIME: value})
        saw_any = True
    if not saw_any:
        raise ParseError(1, "no data lines")
    return finalize_inclusive(builder.build())


def _frame_token(frame: Frame) -> str:
    if frame.file is not None and frame.line is not None:
        return f"{frame.name}@{frame.file}:{frame.line}"
    return frame.name


def write_folded(gf: GraphFrame) -> str:
    """One line per node with nonzero exclusive time, plus one line per
    zero-valued leaf so no node is lost to prefix inference."""
    if EXCLUSIVE_TIME not in gf.metrics:
        raise MissingMetric(EXCLUSIVE_TIME, "folded output needs exclusive time")
    excl = gf.metrics.column(EXCLUSIVE_TIME)
    tokens: dict[int, str] = {}
    lines = []
    for nid in gf.preorder():
        node = gf.nodes[nid]
        token = _frame_token(node.frame)
        if ";" in token or "\n" in token:
            raise ValueError(f"frame {token!r} cannot be represented in folded format")
        tokens[nid] = token if node.parent is None else f"{tokens[node.parent]};{token}"
        if excl[nid] != 0.0 or not node.children:
            lines.append(f"{tokens[nid]} {excl[nid]!r}")
    return "\n".join(lines) + "\n"
