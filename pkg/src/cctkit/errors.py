"""Exception types shared across the toolkit."""

from __future__ import annotations


class CctError(Exception):
    """Base class for every error raised by this package."""


class EmptyInput(CctError):
    """No profile records were supplied."""


class InconsistentMetrics(CctError):
    """Input records declare mismatched metric name sets."""


class MissingMetric(CctError):
    """A required metric column is absent from the metric table."""

    def __init__(self, metric: str, context: str = ""):
        self.metric = metric
        msg = f"metric {metric!r} not present"
        if context:
            msg += f" ({context})"
        super().__init__(msg)


class UnknownNode(CctError):
    """A node id or node path does not resolve in this tree."""


class ParseError(CctError):
    """Malformed input text; carries the 1-based line number."""

    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class SchemaError(CctError):
    """Structurally well-formed input that violates the document schema."""


class TooFewFrames(CctError):
    """An across-runs statistic needs at least two input trees."""


class NameCollision(CctError):
    """A derived metric would overwrite an existing column."""


class UnknownMetric(CctError):
    """A query predicate references a metric the tree does not carry."""

    def __init__(self, metric: str):
        self.metric = metric
        super().__init__(f"unknown metric in query: {metric!r}")


class QuerySyntaxError(CctError):
    """Query text failed to parse; carries offset and expectations."""

    def __init__(self, position: int, expected: tuple[str, ...], found: str = ""):
        self.position = position
        self.expected = tuple(expected)
        self.found = found
        what = f"found {found!r}" if found else "unexpected end of input"
        super().__init__(
            f"syntax error at offset {position}: {what}, expected "
            + " or ".join(expected)
        )


class StaleView(CctError):
    """A view state references nodes or metrics this tree does not have."""


class NestedCollapse(CctError):
    """Attempt to collapse a node inside an already-collapsed subtree."""


class InvertedRange(CctError):
    """Range bounds supplied with lo > hi."""
