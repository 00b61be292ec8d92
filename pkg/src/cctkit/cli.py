"""Command line interface.

Subcommands: ``view`` (indented tree in the terminal), ``speedup`` and
``derive`` (comparison and derived metrics), ``query`` (check, apply, or
export call-path queries), and ``serve`` (the HTTP session service).

Exit codes: 1 for unreadable or unparsable input, 2 for semantic errors such
as a missing metric, 3 for output I/O failures. Diagnostics go to standard
error; ``--json-errors`` switches them to machine-readable JSON.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .errors import (
    CctError,
    EmptyInput,
    InconsistentMetrics,
    MissingMetric,
    ParseError,
    QuerySyntaxError,
    SchemaError,
)
from .ingest import read_profile, write_literal
from .layout import encode
from .model import GraphFrame
from .ops import DerivedMetricSpec, derive, speedup
from .prune import default_view_state, mass_prune
from .query import apply as apply_query
from .query import from_view
from .query import parse as parse_query
from .query import serialize as serialize_query

EXIT_INPUT = 1
EXIT_SEMANTIC = 2
EXIT_IO = 3

_INPUT_ERRORS = (ParseError, SchemaError, QuerySyntaxError, EmptyInput, InconsistentMetrics)

# 6-step blue-to-red ramp, approximated on the 256-color terminal palette.
_ANSI_DIVERGING = (27, 75, 117, 216, 209, 196)


def _emit_error(exc: Exception, json_errors: bool) -> None:
    if json_errors:
        detail = {"type": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, QuerySyntaxError):
            detail["position"] = exc.position
            detail["expected"] = list(exc.expected)
        if isinstance(exc, ParseError):
            detail["line"] = exc.line
        print(json.dumps({"error": detail}), file=sys.stderr)
    else:
        print(f"cct: {exc}", file=sys.stderr)


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, _INPUT_ERRORS):
        return EXIT_INPUT
    if isinstance(exc, OSError):
        return EXIT_IO
    return EXIT_SEMANTIC


def _load(path: str, fmt: str | None) -> GraphFrame:
    text = Path(path).read_text()
    return read_profile(text, fmt)


def _write_output(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(out).write_text(text)


# ---------------------------------------------------------------------------
# view


def _tree_lines(gf: GraphFrame, metric: str, colorize: bool) -> list[str]:
    col = gf.metrics.column(metric)
    scales = None
    if colorize:
        vs = replace(default_view_state(gf), primary_metric=metric, secondary_metric=metric)
        vs = replace(vs, mass_prune_range=(min(col.values()), max(col.values())))
        scales = encode(gf, vs)

    def render(nid: int) -> str:
        text = f"{col[nid]:.3f}"
        if scales is not None:
            code = _ANSI_DIVERGING[scales.color_index(col[nid])]
            text = f"\x1b[38;5;{code}m{text}\x1b[0m"
        return f"{text} {gf.frame(nid).name}"

    lines: list[str] = []
    # (node, guide prefix, is last sibling, is a root)
    stack = [(r, "", i == len(gf.roots) - 1, True) for i, r in reversed(list(enumerate(gf.roots)))]
    while stack:
        nid, prefix, is_last, is_root = stack.pop()
        connector = "" if is_root else ("└─" if is_last else "├─")
        lines.append(prefix + connector + render(nid))
        child_prefix = prefix if is_root else prefix + ("  " if is_last else "│ ")
        children = gf.children(nid)
        for i, child in reversed(list(enumerate(children))):
            stack.append((child, child_prefix, i == len(children) - 1, False))
    return lines


def _cmd_view(args) -> int:
    gf = _load(args.file, args.format)
    if args.metric not in gf.metrics:
        raise MissingMetric(args.metric)
    colorize = not args.no_color and sys.stdout.isatty()
    for line in _tree_lines(gf, args.metric, colorize):
        print(line)
    return 0


# ---------------------------------------------------------------------------
# speedup / derive


def _cmd_speedup(args) -> int:
    a = _load(args.file_a, args.format)
    b = _load(args.file_b, args.format)
    result, warnings = speedup(a, b, args.metric, clamp_max=args.clamp_max)
    for w in warnings:
        print(
            f"cct: degenerate ratio at {'/'.join(w.path)}: "
            f"{w.numerator} / 0.0 clamped to {w.clamped_to}",
            file=sys.stderr,
        )
    _write_output(write_literal(result), args.output)
    return 0


def _cmd_derive(args) -> int:
    gf = _load(args.file, args.format)
    if args.kind == "binary":
        if not args.metric2 or not args.op:
            raise ValueError("binary derivation needs --metric2 and --op")
        spec = DerivedMetricSpec(
            name=args.name, kind="binary",
            metrics=(args.metric, args.metric2), op=args.op,
        )
    else:
        spec = DerivedMetricSpec(name=args.name, kind=args.kind, metrics=(args.metric,))
    _write_output(write_literal(derive(gf, spec)), args.output)
    return 0


# ---------------------------------------------------------------------------
# query


def _cmd_query(args) -> int:
    if args.check is not None:
        parse_query(args.check)
        print("ok")
        return 0
    if args.export is not None:
        gf = _load(args.export, args.format)
        vs = default_view_state(gf)
        if args.metric:
            if args.metric not in gf.metrics:
                raise MissingMetric(args.metric)
            vs = replace(vs, primary_metric=args.metric)
        if args.range:
            lo_str, _, hi_str = args.range.partition(":")
            vs = mass_prune(gf, vs, float(lo_str), float(hi_str))
        print(serialize_query(from_view(gf, vs)))
        return 0
    if args.apply is not None:
        if not args.file:
            raise ValueError("query --apply needs an input file")
        query = parse_query(args.apply)
        gf = _load(args.file, args.format)
        _write_output(write_literal(apply_query(gf, query)), args.output)
        return 0
    raise ValueError("query needs one of --check, --apply, --export")


# ---------------------------------------------------------------------------
# serve


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    text = Path(args.file).read_text()
    read_profile(text, args.format)  # fail fast on bad input
    state_dir = Path(args.state_dir) if args.state_dir else None
    app = create_app(default_source=(text, args.format), state_dir=state_dir)
    print(f"cct-service listening on http://{args.host}:{args.port}", flush=True)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cct", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("literal", "folded"), default=None,
                       help="input format (auto-detected by default)")
        p.add_argument("--json-errors", action="store_true",
                       help="machine-readable errors on stderr")

    p_view = sub.add_parser("view", help="print the tree as an indented outline")
    p_view.add_argument("file")
    p_view.add_argument("--metric", default="time", help="metric to print (default: time)")
    p_view.add_argument("--no-color", action="store_true", help="plain deterministic output")
    common(p_view)
    p_view.set_defaults(func=_cmd_view)

    p_speedup = sub.add_parser(
        "speedup",
        help="ratio of a metric between two runs; first argument is the numerator, "
             "so values above 1 mean the first run was faster",
    )
    p_speedup.add_argument("file_a")
    p_speedup.add_argument("file_b")
    p_speedup.add_argument("--metric", default="time")
    p_speedup.add_argument("--clamp-max", type=float, default=1e6,
                           help="ratio used when the denominator is zero")
    p_speedup.add_argument("-o", "--output", default=None)
    common(p_speedup)
    p_speedup.set_defaults(func=_cmd_speedup)

    p_derive = sub.add_parser("derive", help="attach a derived metric column")
    p_derive.add_argument("file")
    p_derive.add_argument("--kind", choices=("percent_of_total", "binary"), required=True)
    p_derive.add_argument("--metric", required=True)
    p_derive.add_argument("--metric2", default=None)
    p_derive.add_argument("--op", choices=("add", "sub", "mul", "div"), default=None)
    p_derive.add_argument("--name", required=True)
    p_derive.add_argument("-o", "--output", default=None)
    common(p_derive)
    p_derive.set_defaults(func=_cmd_derive)

    p_query = sub.add_parser("query", help="check, apply, or export call-path queries")
    p_query.add_argument("file", nargs="?", default=None)
    p_query.add_argument("--check", default=None, metavar="QUERY")
    p_query.add_argument("--apply", default=None, metavar="QUERY")
    p_query.add_argument("--export", default=None, metavar="FILE",
                         help="print a query reproducing FILE's visible tree")
    p_query.add_argument("--metric", default=None, help="primary metric for --export")
    p_query.add_argument("--range", default=None, metavar="LO:HI",
                         help="mass-prune range for --export")
    p_query.add_argument("-o", "--output", default=None)
    common(p_query)
    p_query.set_defaults(func=_cmd_query)

    p_serve = sub.add_parser("serve", help="run the HTTP session service")
    p_serve.add_argument("file")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int,
                         default=int(os.environ.get("CCT_PORT", "8077")))
    p_serve.add_argument("--state-dir", default=None,
                         help="persist session history for recovery")
    common(p_serve)
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CctError, ValueError, OSError) as exc:
        _emit_error(exc, getattr(args, "json_errors", False))
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
