"""HTTP session service: load a profile, hold (GraphFrame, ViewState) per
session, serve layouts and histograms, accept interactions, and export or
apply queries.

State moves between the scripting side and a client only on explicit request
(deliberate synchronization). Sessions are in-memory; an optional state
directory persists each session's source and interaction history so it can
be replayed after a restart. Nodes are addressed by structural wire paths,
never raw ids.
"""

from __future__ import annotations

import json
import secrets
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .errors import (
    CctError,
    InvertedRange,
    MissingMetric,
    NestedCollapse,
    ParseError,
    QuerySyntaxError,
    SchemaError,
    StaleView,
    UnknownMetric,
    UnknownNode,
)
from .ingest import read_profile
from .layout import layout
from .model import GraphFrame
from .paths import node_path, resolve_node_path
from .prune import (
    ViewState,
    butterfly_histogram,
    clear_mass_prune,
    default_view_state,
    mass_prune,
    toggle_collapse,
    view_from_doc,
    view_to_doc,
)
from .query import apply as apply_query
from .query import from_view
from .query import parse as parse_query
from .query import serialize as serialize_query

API_VERSION = 1


@dataclass
class Session:
    id: str
    source_text: str
    source_format: str | None
    gf: GraphFrame
    vs: ViewState
    history: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    def __init__(self, state_dir: Path | None = None):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self.state_dir = state_dir
        if state_dir is not None:
            state_dir.mkdir(parents=True, exist_ok=True)
            self._recover()

    def create(self, source_text: str, source_format: str | None) -> Session:
        gf = read_profile(source_text, source_format)
        session = Session(
            id=secrets.token_hex(8),
            source_text=source_text,
            source_format=source_format,
            gf=gf,
            vs=default_view_state(gf),
        )
        with self._lock:
            self._sessions[session.id] = session
        self._persist(session)
        return session

    def get(self, sid: str) -> Session:
        with self._lock:
            session = self._sessions.get(sid)
        if session is None:
            raise UnknownNode(f"unknown session {sid!r}")
        return session

    def record(self, session: Session, command: dict) -> None:
        session.history.append(command)
        self._persist(session)

    def _persist(self, session: Session) -> None:
        if self.state_dir is None:
            return
        doc = {
            "version": API_VERSION,
            "id": session.id,
            "format": session.source_format,
            "source": session.source_text,
            "history": session.history,
        }
        (self.state_dir / f"{session.id}.json").write_text(json.dumps(doc))

    def _recover(self) -> None:
        assert self.state_dir is not None
        for path in sorted(self.state_dir.glob("*.json")):
            doc = json.loads(path.read_text())
            gf = read_profile(doc["source"], doc.get("format"))
            session = Session(
                id=doc["id"],
                source_text=doc["source"],
                source_format=doc.get("format"),
                gf=gf,
                vs=default_view_state(gf),
            )
            for command in doc.get("history", []):
                _apply_command(session, command)
                session.history.append(command)
            self._sessions[session.id] = session


def _reconcile(vs: ViewState, gf: GraphFrame) -> ViewState:
    """Trim view references that no longer exist after a frame change; a
    collapse root with nothing left below it is moot and dropped."""
    return replace(
        vs,
        collapsed=frozenset(n for n in vs.collapsed if n in gf and gf.children(n)),
        selection=frozenset(n for n in vs.selection if n in gf),
    )


def _apply_command(session: Session, command: Mapping) -> None:
    op = command.get("op")
    if op == "collapse":
        nid = resolve_node_path(session.gf, command["path"])
        session.vs = toggle_collapse(session.gf, session.vs, nid)
    elif op == "range":
        lo, hi = command.get("lo"), command.get("hi")
        if lo is None and hi is None:
            session.vs = clear_mass_prune(session.gf, session.vs)
        else:
            session.vs = mass_prune(session.gf, session.vs, float(lo), float(hi))
    elif op == "encoding":
        changes: dict[str, Any] = {}
        if command.get("primary") is not None:
            changes["primary_metric"] = command["primary"]
        if command.get("secondary") is not None:
            changes["secondary_metric"] = command["secondary"]
        if command.get("colorMap") is not None:
            changes["color_map"] = command["colorMap"]
        if command.get("inverted") is not None:
            changes["inverted"] = bool(command["inverted"])
        vs = replace(session.vs, **changes)
        for metric in (vs.primary_metric, vs.secondary_metric):
            if metric not in session.gf.metrics:
                raise MissingMetric(metric, "encoding")
        session.vs = vs
    elif op == "apply-query":
        query = parse_query(command["query"])
        session.gf = apply_query(session.gf, query)
        session.vs = _reconcile(session.vs, session.gf)
        # The frame now holds exactly the queried subset; show all of it
        # rather than re-applying the default zero elision.
        col = session.gf.metrics.column(session.vs.primary_metric)
        session.vs = replace(
            session.vs, mass_prune_range=(min(col.values()), max(col.values()))
        )
    elif op == "viewstate":
        session.vs = view_from_doc(session.gf, command["doc"])
    else:
        raise ValueError(f"unknown command {op!r}")


def _error_payload(exc: Exception) -> tuple[int, dict]:
    if isinstance(exc, QuerySyntaxError):
        detail = {
            "type": "QuerySyntaxError",
            "message": str(exc),
            "position": exc.position,
            "expected": list(exc.expected),
        }
        return 422, detail
    if isinstance(exc, (StaleView, NestedCollapse)):
        return 409, {"type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, UnknownNode):
        return 404, {"type": "UnknownNode", "message": str(exc)}
    if isinstance(
        exc,
        (ParseError, SchemaError, MissingMetric, UnknownMetric, InvertedRange, ValueError, KeyError, TypeError),
    ):
        return 400, {"type": type(exc).__name__, "message": str(exc)}
    raise exc


def _error_response(exc: Exception) -> JSONResponse:
    status, detail = _error_payload(exc)
    return JSONResponse(
        status_code=status, content={"version": API_VERSION, "error": detail}
    )


def create_app(
    default_source: tuple[str, str | None] | None = None,
    state_dir: Path | None = None,
) -> FastAPI:
    """Build the service; `default_source` is (profile text, format) used for
    sessions created with an empty body."""
    app = FastAPI(title="cctkit service")
    # The explorer is served statically on another origin than the API.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore(state_dir=state_dir)
    app.state.store = store

    async def read_body(request: Request) -> dict:
        raw = await request.body()
        if not raw:
            return {}
        try:
            body = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed JSON body: {exc}") from exc
        if not isinstance(body, dict):
            raise ValueError("request body must be a JSON object")
        return body

    def layout_doc(session: Session) -> dict:
        return layout(session.gf, session.vs).to_doc()

    @app.get("/")
    async def root():
        return {"version": API_VERSION, "service": "cctkit"}

    @app.post("/sessions")
    async def create_session(request: Request):
        try:
            body = await read_body(request)
            text = body.get("source")
            fmt = body.get("format")
            if text is None and body.get("path") is not None:
                text = Path(body["path"]).read_text()
            if text is None:
                if default_source is None:
                    raise ValueError("no source given and no default profile loaded")
                text, default_fmt = default_source
                fmt = fmt or default_fmt
            session = store.create(text, fmt)
        except OSError as exc:
            return _error_response(ValueError(f"cannot read source: {exc}"))
        except CctError as exc:
            return _error_response(exc)
        except ValueError as exc:
            return _error_response(exc)
        return {"version": API_VERSION, "sessionId": session.id}

    def run_command(sid: str, command: dict) -> JSONResponse | dict:
        try:
            session = store.get(sid)
            with session.lock:
                _apply_command(session, command)
                store.record(session, command)
                return layout_doc(session)
        except (CctError, ValueError, KeyError, TypeError) as exc:
            return _error_response(exc)

    @app.get("/sessions/{sid}/layout")
    async def get_layout(sid: str):
        try:
            session = store.get(sid)
            with session.lock:
                return layout_doc(session)
        except (CctError, ValueError) as exc:
            return _error_response(exc)

    @app.get("/sessions/{sid}/histogram")
    async def get_histogram(
        sid: str, bins: int = 20, lo: float | None = None, hi: float | None = None
    ):
        try:
            session = store.get(sid)
            with session.lock:
                hist = butterfly_histogram(
                    session.gf, session.vs.primary_metric, bins, lo, hi
                )
                return hist.to_doc()
        except (CctError, ValueError) as exc:
            return _error_response(exc)

    @app.post("/sessions/{sid}/collapse")
    async def post_collapse(sid: str, request: Request):
        try:
            body = await read_body(request)
            path = body["path"]
        except (ValueError, KeyError) as exc:
            return _error_response(exc)
        return run_command(sid, {"op": "collapse", "path": path})

    @app.post("/sessions/{sid}/range")
    async def post_range(sid: str, request: Request):
        try:
            body = await read_body(request)
        except ValueError as exc:
            return _error_response(exc)
        return run_command(
            sid, {"op": "range", "lo": body.get("lo"), "hi": body.get("hi")}
        )

    @app.post("/sessions/{sid}/encoding")
    async def post_encoding(sid: str, request: Request):
        try:
            body = await read_body(request)
        except ValueError as exc:
            return _error_response(exc)
        command = {"op": "encoding"}
        for key in ("primary", "secondary", "colorMap", "inverted"):
            if key in body:
                command[key] = body[key]
        return run_command(sid, command)

    @app.get("/sessions/{sid}/node/{path:path}")
    async def get_node(sid: str, path: str):
        try:
            session = store.get(sid)
            with session.lock:
                nid = resolve_node_path(session.gf, path)
                frame = session.gf.frame(nid)
                return {
                    "version": API_VERSION,
                    "path": node_path(session.gf, nid),
                    "frame": {
                        "name": frame.name,
                        "file": frame.file,
                        "line": frame.line,
                    },
                    "depth": session.gf.depth(nid),
                    "metrics": session.gf.metrics.row(nid),
                }
        except CctError as exc:
            return _error_response(exc)

    @app.get("/sessions/{sid}/query")
    async def get_query(sid: str):
        try:
            session = store.get(sid)
            with session.lock:
                text = serialize_query(from_view(session.gf, session.vs))
            return {"version": API_VERSION, "query": text}
        except CctError as exc:
            return _error_response(exc)

    @app.post("/sessions/{sid}/apply-query")
    async def post_apply_query(sid: str, request: Request):
        try:
            body = await read_body(request)
            query = body["query"]
            if not isinstance(query, str):
                raise ValueError("query must be a string")
        except (ValueError, KeyError) as exc:
            return _error_response(exc)
        return run_command(sid, {"op": "apply-query", "query": query})

    @app.get("/sessions/{sid}/viewstate")
    async def get_viewstate(sid: str):
        try:
            session = store.get(sid)
            with session.lock:
                return view_to_doc(session.gf, session.vs)
        except CctError as exc:
            return _error_response(exc)

    @app.put("/sessions/{sid}/viewstate")
    async def put_viewstate(sid: str, request: Request):
        try:
            body = await read_body(request)
        except ValueError as exc:
            return _error_response(exc)
        result = run_command(sid, {"op": "viewstate", "doc": body})
        if isinstance(result, JSONResponse):
            return result
        try:
            session = store.get(sid)
            with session.lock:
                return view_to_doc(session.gf, session.vs)
        except CctError as exc:
            return _error_response(exc)

    return app
