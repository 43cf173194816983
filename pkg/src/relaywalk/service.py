"""Live deployment advisor over HTTP.

A session tracks one deployment: the client posts corridor steps as the
operative walks them, the service advances the displacement since the last
relay, applies the session's placement policy, and answers place/continue.
The operative may override the advice; bookkeeping follows what was
actually done, so costs and relay counts stay faithful either way.

In-memory sessions, one lock per session; policies are solved once per
parameter set and shared read-only. Optional append-only JSONL event logs
make any session replayable.
"""

from __future__ import annotations

import json
import re
import threading
import uuid
from dataclasses import dataclass, field
from functools import lru_cache
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .heuristic import distance_set
from .model import CostParams, ModelError, PathParams, hop_cost_point
from .osla import solve_unconstrained
from .placement import PlacementSet

__all__ = ["ApiError", "Advisor", "Session", "make_server", "run_server", "replay_log"]


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, field_name: str | None = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.field = field_name

    def record(self) -> dict:
        rec = {"code": self.code, "message": str(self)}
        if self.field:
            rec["field"] = self.field
        return rec


def _parse_float(body: dict, name: str, default: float | None = None) -> float:
    if name not in body:
        if default is None:
            raise ApiError(400, "missing-param", f"{name} is required", name)
        return default
    try:
        return float(body[name])
    except (TypeError, ValueError):
        raise ApiError(400, "invalid-param", f"{name} must be a number", name)


@lru_cache(maxsize=64)
def _solved_boundary(p: float, q: float, lam: float, p_m: float, gamma: float, eta: float) -> PlacementSet:
    return solve_unconstrained(PathParams(p, q), CostParams(p_m, gamma, eta), lam).optimal_set


def resolve_policy(body: dict) -> tuple[dict, PathParams, CostParams, float, PlacementSet]:
    """Validate a session/boundary request and produce its placement set."""
    p = _parse_float(body, "p")
    q = _parse_float(body, "q")
    lam = _parse_float(body, "lambda")
    eta = _parse_float(body, "eta", 2.0)
    p_m = _parse_float(body, "p_m", 0.1)
    gamma = _parse_float(body, "gamma", 0.01)
    policy = body.get("policy", "optimal")
    try:
        pp = PathParams(p, q)
        cost = CostParams(p_m, gamma, eta)
    except ModelError as exc:
        field_name = str(exc).split(" ", 1)[0]
        raise ApiError(400, "invalid-param", str(exc), field_name)
    if lam < 0:
        raise ApiError(400, "invalid-param", "lambda must be nonnegative", "lambda")

    if policy == "optimal":
        pset = _solved_boundary(p, q, lam, p_m, gamma, eta)
    elif policy == "heuristic":
        r_th = _parse_float(body, "r_th")
        if r_th <= 0:
            raise ApiError(400, "invalid-param", "r_th must be positive", "r_th")
        pset = distance_set(r_th)
    elif policy == "custom":
        try:
            pset = PlacementSet.from_record(body["boundary"])
        except Exception as exc:  # noqa: BLE001
            raise ApiError(400, "invalid-param", f"bad custom boundary: {exc}", "boundary")
    else:
        raise ApiError(400, "invalid-param", f"unknown policy {policy!r}", "policy")

    params = {
        "p": p,
        "q": q,
        "lambda": lam,
        "eta": eta,
        "p_m": p_m,
        "gamma": gamma,
        "policy": policy,
    }
    if policy == "heuristic":
        params["r_th"] = body["r_th"]
    return params, pp, cost, lam, pset


@dataclass
class Session:
    id: str
    params: dict
    policy_set: PlacementSet
    cost: CostParams
    lam: float
    rel: tuple[int, int] = (0, 0)
    abs_pos: tuple[int, int] = (0, 0)
    accumulated_cost: float = 0.0
    relays: int = 0
    ended: bool = False
    history: list = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def view(self) -> dict:
        return {
            "id": self.id,
            "params": self.params,
            "boundary": self.policy_set.to_record(),
            "rel_state": list(self.rel),
            "abs_position": list(self.abs_pos),
            "accumulated_cost": self.accumulated_cost,
            "relays": self.relays,
            "objective": self.accumulated_cost + self.lam * self.relays,
            "ended": self.ended,
            "history": self.history,
        }

    def apply_step(self, direction: str, ended: bool, override: str | None) -> dict:
        """Advance one corridor step and answer with advice and state."""
        if self.ended:
            raise ApiError(409, "session-ended", "the corridor has already ended")
        if direction not in ("E", "N"):
            raise ApiError(400, "invalid-param", "direction must be 'E' or 'N'", "direction")
        if override not in (None, "place", "skip"):
            raise ApiError(400, "invalid-param", "override must be 'place' or 'skip'", "override")

        m, n = self.rel
        am, an = self.abs_pos
        if direction == "E":
            m, am = m + 1, am + 1
        else:
            n, an = n + 1, an + 1
        self.rel = (m, n)
        self.abs_pos = (am, an)

        if ended:
            self.accumulated_cost += hop_cost_point((m, n), self.cost)
            self.ended = True
            advice = "source-placed"
            action = "source"
        else:
            advice = "place" if self.policy_set.contains(m, n) else "continue"
            action = override or advice
            if action == "place":
                self.accumulated_cost += hop_cost_point((m, n), self.cost)
                self.relays += 1
                self.rel = (0, 0)

        entry = {
            "step": len(self.history),
            "direction": direction,
            "ended": ended,
            "advice": advice,
            "action": action,
            "rel_state": list(self.rel),
            "abs_position": list(self.abs_pos),
            "accumulated_cost": self.accumulated_cost,
            "relays": self.relays,
        }
        self.history.append(entry)
        return {
            "advice": advice,
            "action": action,
            "rel_state": list(self.rel),
            "abs_position": list(self.abs_pos),
            "accumulated_cost": self.accumulated_cost,
            "relays": self.relays,
            "objective": self.accumulated_cost + self.lam * self.relays,
            "ended": self.ended,
            "step": entry["step"],
        }


class Advisor:
    """Session registry plus optional event-log persistence."""

    def __init__(self, log_dir: str | Path | None = None):
        self.sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()
        self.log_dir = Path(log_dir) if log_dir else None
        if self.log_dir:
            self.log_dir.mkdir(parents=True, exist_ok=True)

    def create_session(self, body: dict) -> dict:
        params, _pp, cost, lam, pset = resolve_policy(body)
        sid = uuid.uuid4().hex[:12]
        session = Session(id=sid, params=params, policy_set=pset, cost=cost, lam=lam)
        with self._registry_lock:
            self.sessions[sid] = session
        with session.lock:
            self._log(session, {"type": "create", "params": params, "boundary": pset.to_record()})
        return session.view()

    def get_session(self, sid: str) -> Session:
        with self._registry_lock:
            session = self.sessions.get(sid)
        if session is None:
            raise ApiError(404, "not-found", f"no session {sid!r}")
        return session

    def step(self, sid: str, body: dict) -> dict:
        session = self.get_session(sid)
        direction = body.get("direction")
        ended = bool(body.get("ended", False))
        override = body.get("override")
        with session.lock:
            result = session.apply_step(direction, ended, override)
            self._log(
                session,
                {"type": "step", "direction": direction, "ended": ended, "override": override},
            )
        return result

    def _log(self, session: Session, record: dict) -> None:
        # callers hold the session lock, so appends never interleave
        if not self.log_dir:
            return
        path = self.log_dir / f"{session.id}.jsonl"
        with path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record) + "\n")


def replay_log(path: str | Path) -> dict:
    """Rebuild a session view by replaying its event log."""
    lines = [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]
    if not lines or lines[0]["type"] != "create":
        raise ValueError("log must start with a create record")
    create = lines[0]
    pset = PlacementSet.from_record(create["boundary"])
    params = create["params"]
    session = Session(
        id="replay",
        params=params,
        policy_set=pset,
        cost=CostParams(params["p_m"], params["gamma"], params["eta"]),
        lam=params["lambda"],
    )
    for rec in lines[1:]:
        if rec["type"] != "step":
            raise ValueError(f"unexpected log record {rec['type']!r}")
        session.apply_step(rec["direction"], rec["ended"], rec.get("override"))
    return session.view()


_FALLBACK_PAGE = """<!doctype html>
<title>relaywalk advisor</title>
<h1>relaywalk advisor</h1>
<p>No UI bundle is configured. The JSON API is live:</p>
<pre>
POST /sessions                {p, q, lambda, eta?, p_m?, gamma?, policy, r_th?}
POST /sessions/{id}/steps     {direction: "E"|"N", ended: bool, override?: "place"|"skip"}
GET  /sessions/{id}
GET  /boundary?p=&q=&lambda=&eta=&policy=optimal
</pre>
"""

_SESSION_STEP_RE = re.compile(r"^/sessions/([0-9a-f]+)/steps$")
_SESSION_RE = re.compile(r"^/sessions/([0-9a-f]+)$")

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


class _Handler(BaseHTTPRequestHandler):
    server_version = "relaywalk"
    advisor: Advisor
    ui_dir: Path | None

    # -- plumbing ---------------------------------------------------------
    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send_json(self, status: int, payload: dict) -> None:
        raw = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(raw)))
        self.end_headers()
        self.wfile.write(raw)

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return {}
        try:
            return json.loads(self.rfile.read(length).decode())
        except json.JSONDecodeError:
            raise ApiError(400, "bad-json", "request body is not valid JSON")

    def _guard(self, fn) -> None:
        try:
            fn()
        except ApiError as exc:
            self._send_json(exc.status, exc.record())
        except Exception as exc:  # noqa: BLE001
            self._send_json(500, {"code": "internal", "message": str(exc)})

    # -- routes -----------------------------------------------------------
    def do_POST(self) -> None:
        def route():
            if self.path == "/sessions":
                self._send_json(201, self.advisor.create_session(self._read_body()))
                return
            match = _SESSION_STEP_RE.match(self.path)
            if match:
                self._send_json(200, self.advisor.step(match.group(1), self._read_body()))
                return
            raise ApiError(404, "not-found", f"no route {self.path!r}")

        self._guard(route)

    def do_GET(self) -> None:
        def route():
            path, _, query = self.path.partition("?")
            match = _SESSION_RE.match(path)
            if match:
                session = self.advisor.get_session(match.group(1))
                with session.lock:
                    self._send_json(200, session.view())
                return
            if path == "/boundary":
                body = _parse_query(query)
                _params, _pp, _cost, _lam, pset = resolve_policy(body)
                self._send_json(200, pset.to_record())
                return
            self._serve_static(path)

        self._guard(route)

    def _serve_static(self, path: str) -> None:
        if self.ui_dir is None:
            if path in ("/", "/index.html"):
                raw = _FALLBACK_PAGE.encode()
                self.send_response(200)
                self.send_header("Content-Type", "text/html; charset=utf-8")
                self.send_header("Content-Length", str(len(raw)))
                self.end_headers()
                self.wfile.write(raw)
                return
            raise ApiError(404, "not-found", f"no route {path!r}")
        rel = path.lstrip("/") or "index.html"
        target = (self.ui_dir / rel).resolve()
        if not str(target).startswith(str(self.ui_dir.resolve())) or not target.is_file():
            raise ApiError(404, "not-found", f"no asset {path!r}")
        raw = target.read_bytes()
        self.send_response(200)
        ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(raw)))
        self.end_headers()
        self.wfile.write(raw)


def _parse_query(query: str) -> dict:
    out: dict = {}
    for part in query.split("&"):
        if not part:
            continue
        key, _, value = part.partition("=")
        out[key] = value
    return out


def make_server(
    host: str = "127.0.0.1",
    port: int = 8080,
    ui_dir: str | Path | None = None,
    log_dir: str | Path | None = None,
) -> ThreadingHTTPServer:
    advisor = Advisor(log_dir=log_dir)
    handler = type("Handler", (_Handler,), {"advisor": advisor, "ui_dir": Path(ui_dir) if ui_dir else None})
    server = ThreadingHTTPServer((host, port), handler)
    server.advisor = advisor  # type: ignore[attr-defined]
    return server


def run_server(
    host: str = "127.0.0.1",
    port: int = 8080,
    ui_dir: str | Path | None = None,
    log_dir: str | Path | None = None,
) -> None:
    server = make_server(host, port, ui_dir, log_dir)
    print(f"advisor listening on http://{host}:{server.server_address[1]}/", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
