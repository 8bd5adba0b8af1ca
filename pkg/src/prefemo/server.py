"""HTTP+JSON wire protocol for the steering service.

Endpoints:
    POST /sessions                     create a session
    POST /sessions/{id}/advance        run to the next pause or completion
    POST /sessions/{id}/preference     submit a revised reference point
    GET  /sessions/{id}                full session state
    GET  /sessions/{id}/stream         snapshot feed, one JSON object per line

All numbers travel as JSON doubles. Snapshot objective rows carry native
orientation plus a per-objective "sense" tag; reference points stay in
minimization orientation. A static directory (the built frontend) can be
served from the root path.
"""

from __future__ import annotations

import json
import os
import re
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from .algorithms import AlgorithmSpec, ConfigError, PREFERENCE_KINDS
from .harness import problem_from_config
from .scalarize import ReferencePoint
from .steer import ProtocolError, SessionManager, UnknownSessionError, preset_session_args

_SESSION_PATH = re.compile(r"^/sessions/([0-9a-f]+)(/(advance|preference|stream))?$")

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".map": "application/json",
}


def build_session_kwargs(payload: dict) -> dict:
    """Translate a creation request body into SessionManager arguments."""
    if "preset" in payload:
        kind = payload.get("algorithm", "r_nsga2")
        if not isinstance(kind, str):
            kind = kind.get("kind", "r_nsga2")
        args = preset_session_args(payload["preset"], kind)
        kwargs = {
            "problem": args["problem"],
            "algorithm": args["algorithm"],
            "budget": int(payload.get("budget", args["budget"])),
            "seed": int(payload.get("seed", 0)),
        }
    else:
        problem = problem_from_config(payload["problem"])
        algo_cfg = payload["algorithm"]
        if isinstance(algo_cfg, str):
            algo_cfg = {"kind": algo_cfg}
        algo_cfg = dict(algo_cfg)
        kind = algo_cfg["kind"]
        refs = ()
        if kind in PREFERENCE_KINDS:
            z = payload.get("reference_point") or algo_cfg.pop("reference_point", None)
            if z is None:
                raise ConfigError(f"{kind} needs an initial reference_point")
            refs = (ReferencePoint(np.asarray(z, dtype=float)),)
        kwargs = {
            "problem": problem,
            "algorithm": AlgorithmSpec(reference_points=refs, **algo_cfg),
            "budget": int(payload["budget"]),
            "seed": int(payload.get("seed", 0)),
        }
    if payload.get("interaction_period") is not None:
        kwargs["interaction_period"] = int(payload["interaction_period"])
    if payload.get("representative_k") is not None:
        kwargs["representative_k"] = int(payload["representative_k"])
    if payload.get("delta_extent") is not None:
        kwargs["delta_extent"] = float(payload["delta_extent"])
    return kwargs


def make_handler(manager: SessionManager, static_dir: str | None = None):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        # ------------------------------------------------------ plumbing

        def log_message(self, fmt, *args):  # quiet by default
            pass

        def _json(self, status: int, payload: dict) -> None:
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def _body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            if length == 0:
                return {}
            raw = self.rfile.read(length)
            return json.loads(raw.decode("utf-8"))

        # ------------------------------------------------------- routing

        def do_POST(self):
            try:
                if self.path == "/sessions":
                    kwargs = build_session_kwargs(self._body())
                    sid = manager.create_session(**kwargs)
                    self._json(201, {"session_id": sid, "state": manager.state(sid).to_dict()})
                    return
                match = _SESSION_PATH.match(self.path)
                if match and match.group(3) == "advance":
                    snap = manager.advance(match.group(1))
                    self._json(200, snap.to_dict())
                    return
                if match and match.group(3) == "preference":
                    body = self._body()
                    if "z" not in body:
                        self._json(400, {"error": "body must carry a 'z' array"})
                        return
                    ack = manager.elicit(match.group(1), body["z"])
                    self._json(200, ack)
                    return
                self._json(404, {"error": f"no such endpoint {self.path}"})
            except UnknownSessionError as exc:
                self._json(404, {"error": f"unknown session {exc.args[0]}"})
            except ProtocolError as exc:
                self._json(409, {"error": str(exc), "phase": exc.phase})
            except (ConfigError, ValueError, KeyError) as exc:
                self._json(400, {"error": f"{type(exc).__name__}: {exc}"})
            except json.JSONDecodeError as exc:
                self._json(400, {"error": f"malformed JSON: {exc}"})

        def do_GET(self):
            match = _SESSION_PATH.match(self.path)
            try:
                if match and match.group(3) == "stream":
                    self._stream(match.group(1))
                    return
                if match and match.group(3) is None:
                    self._json(200, manager.state(match.group(1)).to_dict())
                    return
                if static_dir is not None:
                    self._static()
                    return
                self._json(404, {"error": f"no such endpoint {self.path}"})
            except UnknownSessionError as exc:
                self._json(404, {"error": f"unknown session {exc.args[0]}"})

        def _stream(self, sid: str) -> None:
            feed = manager.stream(sid)  # raises UnknownSessionError first
            self.send_response(200)
            self.send_header("Content-Type", "application/x-ndjson")
            self.send_header("Cache-Control", "no-store")
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Transfer-Encoding", "chunked")
            self.end_headers()
            try:
                for snap in feed:
                    chunk = (json.dumps(snap) + "\n").encode("utf-8")
                    self.wfile.write(f"{len(chunk):X}\r\n".encode() + chunk + b"\r\n")
                    self.wfile.flush()
                self.wfile.write(b"0\r\n\r\n")
            except (BrokenPipeError, ConnectionResetError):
                pass

        def _static(self) -> None:
            rel = self.path.lstrip("/") or "index.html"
            base = os.path.realpath(static_dir)
            full = os.path.realpath(os.path.join(base, rel))
            if not full.startswith(base + os.sep) and full != base:
                self._json(404, {"error": "not found"})
                return
            if os.path.isdir(full):
                full = os.path.join(full, "index.html")
            if not os.path.isfile(full):
                self._json(404, {"error": "not found"})
                return
            ext = os.path.splitext(full)[1]
            with open(full, "rb") as fh:
                data = fh.read()
            self.send_response(200)
            self.send_header("Content-Type", _CONTENT_TYPES.get(ext, "application/octet-stream"))
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

    return Handler


class SteerServer:
    """Threaded HTTP server hosting a session manager."""

    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = 8650,
        journal_dir: str | None = None,
        static_dir: str | None = None,
    ):
        self.manager = SessionManager(journal_dir=journal_dir)
        self.httpd = ThreadingHTTPServer((host, port), make_handler(self.manager, static_dir))
        self.httpd.daemon_threads = True

    @property
    def address(self) -> tuple[str, int]:
        return self.httpd.server_address[:2]

    def serve_forever(self):
        self.httpd.serve_forever()

    def shutdown(self):
        self.httpd.shutdown()
        self.httpd.server_close()
