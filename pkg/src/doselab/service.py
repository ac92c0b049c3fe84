"""HTTP session service for live trial conduct, plus static serving of the
browser console bundle."""

from __future__ import annotations

import json
import mimetypes
import re
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional

from .dose_model import ValidationError
from .sessions import (
    SCHEMA_VERSION,
    SessionConflictError,
    SessionStore,
    UnknownSessionError,
)

_SESSION_PATH = re.compile(r"^/sessions/([0-9a-f]{32})(/recommendation|/outcomes|/finalize)?$")


class ApiHandler(BaseHTTPRequestHandler):
    """Routes the session API; every handler replies JSON with a schema tag."""

    server_version = "doselab"
    store: SessionStore = None
    static_dir: Optional[Path] = None

    # -- plumbing ---------------------------------------------------------

    def log_message(self, fmt, *args):  # quiet by default; tests capture errors
        pass

    def _send_json(self, status: int, payload) -> None:
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _error(self, status: int, message: str) -> None:
        self._send_json(status, {"schema_version": SCHEMA_VERSION, "error": message})

    def _read_body(self) -> Optional[dict]:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b"{}"
        try:
            doc = json.loads(raw or b"{}")
        except json.JSONDecodeError:
            self._error(400, "request body is not valid JSON")
            return None
        if not isinstance(doc, dict):
            self._error(400, "request body must be a JSON object")
            return None
        return doc

    # -- static console -----------------------------------------------------

    def _serve_static(self, path: str) -> None:
        if self.static_dir is None:
            self._error(404, "console bundle not configured")
            return
        rel = path[len("/console/"):] if path.startswith("/console/") else ""
        rel = rel or "index.html"
        target = (self.static_dir / rel).resolve()
        if not str(target).startswith(str(self.static_dir.resolve())) or not target.is_file():
            self._error(404, "not found")
            return
        body = target.read_bytes()
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    # -- routes ------------------------------------------------------------

    def do_GET(self):
        if self.path == "/sessions":
            self._send_json(200, {"schema_version": SCHEMA_VERSION,
                                  "sessions": self.store.list_sessions()})
            return
        match = _SESSION_PATH.match(self.path)
        if match:
            session_id, tail = match.groups()
            try:
                session = self.store.get(session_id)
            except UnknownSessionError:
                self._error(404, f"unknown session {session_id}")
                return
            if tail is None:
                with session.lock:
                    self._send_json(200, session.full_view())
            elif tail == "/recommendation":
                with session.lock:
                    if session.finalized:
                        self._error(409, "session is finalized")
                    else:
                        self._send_json(200, session.decision_view())
            else:
                self._error(405, "use POST for this endpoint")
            return
        if self.path == "/" or self.path.startswith("/console"):
            self._serve_static(self.path)
            return
        self._error(404, "not found")

    def do_POST(self):
        if self.path == "/sessions":
            doc = self._read_body()
            if doc is None:
                return
            try:
                session = self.store.create(doc)
            except ValidationError as exc:
                self._error(422, str(exc))
                return
            with session.lock:
                self._send_json(201, session.full_view())
            return
        match = _SESSION_PATH.match(self.path)
        if not match:
            self._error(404, "not found")
            return
        session_id, tail = match.groups()
        if tail == "/outcomes":
            doc = self._read_body()
            if doc is None:
                return
            try:
                session = self.store.post_outcomes(
                    session_id,
                    dose=doc.get("dose"),
                    outcomes=doc.get("outcomes"),
                    override=bool(doc.get("override", False)))
            except UnknownSessionError:
                self._error(404, f"unknown session {session_id}")
                return
            except SessionConflictError as exc:
                self._error(409, str(exc))
                return
            except ValidationError as exc:
                self._error(422, str(exc))
                return
            with session.lock:
                payload = session.full_view()
            self._send_json(200, payload)
        elif tail == "/finalize":
            try:
                result = self.store.finalize(session_id)
            except UnknownSessionError:
                self._error(404, f"unknown session {session_id}")
                return
            except SessionConflictError as exc:
                self._error(409, str(exc))
                return
            self._send_json(200, result)
        else:
            self._error(405, "use GET for this endpoint")


def make_server(port: int, data_dir, static_dir=None,
                host: str = "127.0.0.1") -> ThreadingHTTPServer:
    handler = type("BoundApiHandler", (ApiHandler,), {
        "store": SessionStore(data_dir),
        "static_dir": Path(static_dir) if static_dir else None,
    })
    return ThreadingHTTPServer((host, port), handler)


def serve_forever(port: int, data_dir, static_dir=None, host: str = "127.0.0.1"):
    server = make_server(port, data_dir, static_dir, host)
    print(f"session service on http://{host}:{server.server_address[1]} "
          f"(data: {data_dir})", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
    return server
