"""Call-path query language: parse, serialize, evaluate, and generate.

A query is a boolean combination of path patterns. A pattern is a sequence of
steps anchored at a root; each step carries a quantifier (one node, zero or
more, one or more) and a conjunction of node predicates. A root-to-node path
matches a pattern when it can be segmented to satisfy the step sequence, and
the selected set is the union of all nodes on all matching paths, which makes
pattern selections ancestor-closed by construction.

Textual grammar (whitespace between tokens is ignored)::

    query   := or
    or      := and ("OR" and)*
    and     := unary ("AND" unary)*
    unary   := "NOT" unary | "(" query ")" | pattern
    pattern := step ("/" step)*
    step    := ("*" | "+")? "[" pred ("," pred)* "]" ("*" | "+")?
             | "*" | "+" | "."
    pred    := '"name"' "=~" STRING
             | '"depth"' CMP INT
             | '"child_index"' CMP INT
             | '"leaf"' ("==" ("true" | "false"))?
             | STRING CMP NUMBER          # any metric column

A step takes at most one quantifier; the canonical form written by
:func:`serialize` uses the prefix position. Name patterns must match the
whole frame name (anchored match).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Union

from .errors import QuerySyntaxError, StaleView, UnknownMetric, UnknownNode
from .model import GraphFrame, NodeId, ancestor_closure
from .ops import filter_prune

# ---------------------------------------------------------------------------
# AST

OPS = ("<", "<=", "==", ">=", ">")

ONE = "."
STAR = "*"
PLUS = "+"


@dataclass(frozen=True)
class NameRegex:
    pattern: str

    def __post_init__(self):
        re.compile(self.pattern)


@dataclass(frozen=True)
class MetricCmp:
    metric: str
    op: str
    value: float


@dataclass(frozen=True)
class DepthCmp:
    op: str
    value: int


@dataclass(frozen=True)
class ChildIndexCmp:
    op: str
    value: int


@dataclass(frozen=True)
class Leaf:
    value: bool = True


Predicate = Union[NameRegex, MetricCmp, DepthCmp, ChildIndexCmp, Leaf]


@dataclass(frozen=True)
class Step:
    quant: str = ONE
    preds: tuple[Predicate, ...] = ()

    def __post_init__(self):
        if self.quant not in (ONE, STAR, PLUS):
            raise ValueError(f"bad quantifier {self.quant!r}")


@dataclass(frozen=True)
class Pattern:
    steps: tuple[Step, ...]

    def __post_init__(self):
        if not self.steps:
            raise ValueError("a pattern needs at least one step")


@dataclass(frozen=True)
class And:
    left: "Query"
    right: "Query"


@dataclass(frozen=True)
class Or:
    left: "Query"
    right: "Query"


@dataclass(frozen=True)
class Not:
    operand: "Query"


Query = Union[Pattern, And, Or, Not]

MATCH_ALL = Pattern((Step(STAR),))


# ---------------------------------------------------------------------------
# serialization


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _number(value: float) -> str:
    return repr(int(value)) if float(value).is_integer() else repr(value)


def _serialize_pred(p: Predicate) -> str:
    if isinstance(p, NameRegex):
        return f'"name"=~{_quote(p.pattern)}'
    if isinstance(p, MetricCmp):
        return f"{_quote(p.metric)}{p.op}{_number(p.value)}"
    if isinstance(p, DepthCmp):
        return f'"depth"{p.op}{p.value}'
    if isinstance(p, ChildIndexCmp):
        return f'"child_index"{p.op}{p.value}'
    if isinstance(p, Leaf):
        return '"leaf"' if p.value else '"leaf"==false'
    raise TypeError(f"not a predicate: {p!r}")


def _serialize_step(step: Step) -> str:
    if not step.preds:
        return step.quant
    prefix = "" if step.quant == ONE else step.quant
    return prefix + "[" + ",".join(_serialize_pred(p) for p in step.preds) + "]"


def serialize(q: Query) -> str:
    """Canonical text for `q`; ``parse(serialize(q)) == q``."""
    if isinstance(q, Pattern):
        return "/".join(_serialize_step(s) for s in q.steps)
    if isinstance(q, Not):
        inner = serialize(q.operand)
        if isinstance(q.operand, (And, Or)):
            inner = f"({inner})"
        return f"NOT {inner}"
    if isinstance(q, And):
        left = serialize(q.left)
        right = serialize(q.right)
        if isinstance(q.left, Or):
            left = f"({left})"
        if isinstance(q.right, (And, Or)):
            right = f"({right})"
        return f"{left} AND {right}"
    if isinstance(q, Or):
        left = serialize(q.left)
        right = serialize(q.right)
        if isinstance(q.right, Or):
            right = f"({right})"
        return f"{left} OR {right}"
    raise TypeError(f"not a query: {q!r}")


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<string>"(?:[^"\\]|\\.)*")
    | (?P<number>-?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
    | (?P<op><=|>=|==|=~|<|>)
    | (?P<word>AND|OR|NOT|true|false)
    | (?P<punct>[][/*+.(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QuerySyntaxError(pos, ("a query token",), text[pos])
        kind = m.lastgroup or ""
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("eof", "", len(text)))
    return tokens


def _unquote(raw: str) -> str:
    body = raw[1:-1]
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            out.append(body[i + 1])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, *expected: str):
        tok = self.peek()
        raise QuerySyntaxError(tok.pos, expected, tok.text)

    def expect(self, text: str) -> _Token:
        tok = self.peek()
        if tok.text != text:
            self.fail(repr(text))
        return self.next()

    def parse(self) -> Query:
        q = self.parse_or()
        if self.peek().kind != "eof":
            self.fail("end of query", "'AND'", "'OR'")
        return q

    def parse_or(self) -> Query:
        left = self.parse_and()
        while self.peek().text == "OR":
            self.next()
            left = Or(left, self.parse_and())
        return left

    def parse_and(self) -> Query:
        left = self.parse_unary()
        while self.peek().text == "AND":
            self.next()
            left = And(left, self.parse_unary())
        return left

    def parse_unary(self) -> Query:
        tok = self.peek()
        if tok.text == "NOT":
            self.next()
            return Not(self.parse_unary())
        if tok.text == "(":
            self.next()
            inner = self.parse_or()
            self.expect(")")
            return inner
        return self.parse_pattern()

    def parse_pattern(self) -> Pattern:
        steps = [self.parse_step()]
        while self.peek().text == "/":
            self.next()
            steps.append(self.parse_step())
        return Pattern(tuple(steps))

    def parse_step(self) -> Step:
        tok = self.peek()
        quant: str | None = None
        if tok.text in (STAR, PLUS):
            self.next()
            if self.peek().text != "[":
                return Step(tok.text)
            quant = tok.text
        elif tok.text == ONE:
            self.next()
            return Step(ONE)
        if self.peek().text != "[":
            self.fail("'['", "'*'", "'+'", "'.'")
        self.next()
        preds = [self.parse_pred()]
        while self.peek().text == ",":
            self.next()
            preds.append(self.parse_pred())
        self.expect("]")
        # The quantifier may trail the predicate list instead; one position only.
        if quant is None and self.peek().text in (STAR, PLUS):
            quant = self.next().text
        return Step(quant or ONE, tuple(preds))

    def parse_pred(self) -> Predicate:
        tok = self.peek()
        if tok.kind != "string":
            self.fail("a quoted attribute name")
        key = _unquote(self.next().text)
        if key == "name":
            op = self.peek()
            if op.text != "=~":
                self.fail("'=~'")
            self.next()
            pat = self.peek()
            if pat.kind != "string":
                self.fail("a quoted regex")
            raw = _unquote(self.next().text)
            try:
                return NameRegex(raw)
            except re.error as exc:
                raise QuerySyntaxError(pat.pos, ("a valid regex",), raw) from exc
        if key == "leaf":
            if self.peek().text == "==":
                self.next()
                word = self.peek()
                if word.text not in ("true", "false"):
                    self.fail("'true'", "'false'")
                self.next()
                return Leaf(word.text == "true")
            return Leaf(True)
        op_tok = self.peek()
        if op_tok.text not in OPS:
            self.fail(*(repr(o) for o in OPS))
        self.next()
        num = self.peek()
        if num.kind != "number":
            self.fail("a number")
        self.next()
        if key in ("depth", "child_index"):
            try:
                value = int(num.text)
            except ValueError:
                raise QuerySyntaxError(num.pos, ("an integer",), num.text) from None
            return DepthCmp(op_tok.text, value) if key == "depth" else ChildIndexCmp(
                op_tok.text, value
            )
        return MetricCmp(key, op_tok.text, float(num.text))


def parse(text: str) -> Query:
    """Parse query text into an AST; raises :class:`QuerySyntaxError` with the
    offending offset and the expected token set."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# evaluation


@lru_cache(maxsize=512)
def _compiled(pattern: str) -> "re.Pattern[str]":
    return re.compile(pattern)


def _cmp(op: str, left: float, right: float) -> bool:
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == "==":
        return left == right
    if op == ">=":
        return left >= right
    if op == ">":
        return left > right
    raise ValueError(f"bad comparison {op!r}")


def _metrics_used(q: Query) -> Iterator[str]:
    if isinstance(q, Pattern):
        for step in q.steps:
            for pred in step.preds:
                if isinstance(pred, MetricCmp):
                    yield pred.metric
    elif isinstance(q, (And, Or)):
        yield from _metrics_used(q.left)
        yield from _metrics_used(q.right)
    elif isinstance(q, Not):
        yield from _metrics_used(q.operand)


def _pred_holds(gf: GraphFrame, nid: NodeId, pred: Predicate) -> bool:
    if isinstance(pred, NameRegex):
        return _compiled(pred.pattern).fullmatch(gf.frame(nid).name) is not None
    if isinstance(pred, MetricCmp):
        return _cmp(pred.op, gf.metrics.value(pred.metric, nid), pred.value)
    if isinstance(pred, DepthCmp):
        return _cmp(pred.op, gf.depth(nid), pred.value)
    if isinstance(pred, ChildIndexCmp):
        return _cmp(pred.op, gf.child_index(nid), pred.value)
    if isinstance(pred, Leaf):
        return gf.is_leaf(nid) == pred.value
    raise TypeError(f"not a predicate: {pred!r}")


def _normalize(steps: tuple[Step, ...]) -> list[Step]:
    """Rewrite one-or-more steps as one step plus a zero-or-more step."""
    out: list[Step] = []
    for step in steps:
        if step.quant == PLUS:
            out.append(Step(ONE, step.preds))
            out.append(Step(STAR, step.preds))
        else:
            out.append(step)
    return out


def _match_endpoints(gf: GraphFrame, pattern: Pattern) -> set[NodeId]:
    """Nodes whose full root-to-node path satisfies the step sequence.

    Simulates the step list as an NFA over each root-to-node path; states are
    bitmasks of positions between steps, advanced top-down so each node is
    visited once.
    """
    steps = _normalize(pattern.steps)
    k = len(steps)
    full = 1 << k
    star = [s.quant == STAR for s in steps]

    def closure(mask: int) -> int:
        for j in range(k):
            if mask & (1 << j) and star[j]:
                mask |= 1 << (j + 1)
        return mask

    start = closure(1)
    matched: set[NodeId] = set()
    # (node, state-before-consuming-node)
    stack: list[tuple[NodeId, int]] = [(r, start) for r in reversed(gf.roots)]
    while stack:
        nid, mask = stack.pop()
        holds: list[bool | None] = [None] * k
        new_mask = 0
        for j in range(k):
            if not mask & (1 << j):
                continue
            if holds[j] is None:
                holds[j] = all(_pred_holds(gf, nid, p) for p in steps[j].preds)
            if holds[j]:
                new_mask |= 1 << j if star[j] else 1 << (j + 1)
        new_mask = closure(new_mask)
        if new_mask & full:
            matched.add(nid)
        if new_mask:
            stack.extend((c, new_mask) for c in reversed(gf.children(nid)))
    return matched


def select(gf: GraphFrame, q: Query) -> frozenset[NodeId]:
    """Evaluate `q` against `gf` and return the selected node ids.

    Boolean operators act as set intersection, union and complement relative
    to all nodes of the frame.
    """
    for metric in _metrics_used(q):
        if metric not in gf.metrics:
            raise UnknownMetric(metric)
    return _select(gf, q)


def _select(gf: GraphFrame, q: Query) -> frozenset[NodeId]:
    if isinstance(q, Pattern):
        return ancestor_closure(gf, _match_endpoints(gf, q))
    if isinstance(q, And):
        return _select(gf, q.left) & _select(gf, q.right)
    if isinstance(q, Or):
        return _select(gf, q.left) | _select(gf, q.right)
    if isinstance(q, Not):
        return frozenset(gf.nodes) - _select(gf, q.operand)
    raise TypeError(f"not a query: {q!r}")


def apply(gf: GraphFrame, q: Query) -> GraphFrame:
    """Prune `gf` down to the query selection (closed over ancestors so the
    result stays rooted)."""
    keep = select(gf, q)
    return filter_prune(gf, lambda node: node.id in keep)


# ---------------------------------------------------------------------------
# view round-trip


def _exact_step(gf: GraphFrame, nid: NodeId) -> Step:
    name = gf.frame(nid).name
    preds: list[Predicate] = [NameRegex(re.escape(name))]
    siblings = gf.siblings(nid)
    if sum(1 for s in siblings if gf.frame(s).name == name) > 1:
        preds.append(ChildIndexCmp("==", gf.child_index(nid)))
    return Step(ONE, tuple(preds))


def path_pattern(gf: GraphFrame, nid: NodeId) -> Pattern:
    """A pattern selecting exactly the root-to-`nid` path, disambiguating
    duplicate sibling names by child position."""
    from .model import path_to_root

    return Pattern(tuple(_exact_step(gf, step) for step in path_to_root(gf, nid)))


def from_view(gf: GraphFrame, vs) -> Query:
    """A query whose selection equals the view's visible node set.

    The visible set is ancestor-closed, so it is the union of the paths to
    its maximal nodes; the result is the OR of one exact path pattern per
    visible leaf.
    """
    from .prune import visible

    vis = visible(gf, vs)
    vis_leaves = [
        nid
        for nid in gf.preorder()
        if nid in vis and not any(c in vis for c in gf.children(nid))
    ]
    if not vis_leaves:
        raise StaleView("view has no visible nodes")
    query: Query = path_pattern(gf, vis_leaves[0])
    for nid in vis_leaves[1:]:
        query = Or(query, path_pattern(gf, nid))
    return query
