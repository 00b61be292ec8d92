"""Stable wire addresses for nodes.

A node path names every frame from the root down, each segment carrying the
node's position among its siblings, e.g. ``main@0/solve@2/axpy@0``. Paths are
structural, so they survive server restarts and re-loaded files; raw node ids
do not cross the wire.
"""

from __future__ import annotations

from .errors import UnknownNode
from .model import GraphFrame, NodeId, path_to_root

_ESCAPES = (("~", "~0"), ("/", "~1"), ("@", "~2"))


def _escape(name: str) -> str:
    for char, repl in _ESCAPES:
        name = name.replace(char, repl)
    return name


def _unescape(token: str) -> str:
    out = []
    i = 0
    while i < len(token):
        ch = token[i]
        if ch == "~" and i + 1 < len(token):
            nxt = token[i + 1]
            if nxt == "0":
                out.append("~")
            elif nxt == "1":
                out.append("/")
            elif nxt == "2":
                out.append("@")
            else:
                raise UnknownNode(f"bad escape {token[i:i+2]!r} in node path")
            i += 2
            continue
        out.append(ch)
        i += 1
    return "".join(out)


def node_path(gf: GraphFrame, nid: NodeId) -> str:
    """Canonical wire path for `nid`."""
    segments = []
    for step in path_to_root(gf, nid):
        name = gf.frame(step).name
        segments.append(f"{_escape(name)}@{gf.child_index(step)}")
    return "/".join(segments)


def resolve_node_path(gf: GraphFrame, path: str) -> NodeId:
    """Resolve a wire path back to a node id.

    The ``@index`` suffix is optional when the name is unique among its
    siblings. Raises :class:`UnknownNode` when the path does not resolve.
    """
    if not path:
        raise UnknownNode("empty node path")
    current: NodeId | None = None
    for segment in path.split("/"):
        candidates = gf.roots if current is None else gf.children(current)
        name, index = _split_segment(segment)
        if index is not None:
            if index < 0 or index >= len(candidates):
                raise UnknownNode(f"no child at index {index} for segment {segment!r}")
            nid = candidates[index]
            if gf.frame(nid).name != name:
                raise UnknownNode(
                    f"segment {segment!r} names {name!r} but child {index} "
                    f"is {gf.frame(nid).name!r}"
                )
        else:
            matches = [c for c in candidates if gf.frame(c).name == name]
            if not matches:
                raise UnknownNode(f"no child named {name!r}")
            if len(matches) > 1:
                raise UnknownNode(f"ambiguous segment {name!r}; use name@index")
            nid = matches[0]
        current = nid
    assert current is not None
    return current


def _split_segment(segment: str) -> tuple[str, int | None]:
    if not segment:
        raise UnknownNode("empty segment in node path")
    # The escaped name cannot contain "@", so any "@" separates the index.
    if "@" in segment:
        raw, _, idx = segment.rpartition("@")
        if not idx.isdigit():
            raise UnknownNode(f"bad index in segment {segment!r}")
        return _unescape(raw), int(idx)
    return _unescape(segment), None
