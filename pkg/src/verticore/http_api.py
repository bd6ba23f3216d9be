"""Thin HTTP adapter over ServiceCore using the standard library server."""

from __future__ import annotations

import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from verticore.service import ApiError, ServiceCore

_QUERY = re.compile(r"^/v1/queries/([^/]+)$")
_REVIEW = re.compile(r"^/v1/reviews/([^/]+)$")
_DECISION = re.compile(r"^/v1/reviews/([^/]+)/decision$")
_CORPUS = re.compile(r"^/v1/corpus/([^/]+)/documents$")


class ApiHandler(BaseHTTPRequestHandler):
    core: ServiceCore  # injected by make_server

    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _reply(self, status: int, body=None) -> None:
        data = b"" if status == 204 else json.dumps(body).encode("utf-8")
        self.send_response(status)
        if data:
            self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.end_headers()
        if data:
            self.wfile.write(data)

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length", 0))
        return self.rfile.read(length) if length else b""

    def _read_json(self):
        raw = self._read_body()
        try:
            return json.loads(raw.decode("utf-8")) if raw else {}
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise ApiError(400, "MalformedBody", f"body is not valid JSON: {exc}") from exc

    def do_OPTIONS(self):  # CORS preflight for the review console
        self._reply(204)

    def do_GET(self):
        try:
            parsed = urlparse(self.path)
            if parsed.path == "/v1/health":
                return self._reply(200, self.core.health())
            if parsed.path == "/v1/reviews":
                status = parse_qs(parsed.query).get("status", [None])[0]
                return self._reply(200, self.core.list_reviews(status))
            match = _QUERY.match(parsed.path)
            if match:
                return self._reply(200, self.core.get_query(match.group(1)))
            match = _REVIEW.match(parsed.path)
            if match:
                return self._reply(200, self.core.get_review(match.group(1)))
            self._reply(404, {"error": "NotFound", "detail": parsed.path})
        except ApiError as exc:
            self._reply(exc.status, exc.body)

    def do_POST(self):
        try:
            parsed = urlparse(self.path)
            if parsed.path == "/v1/queries":
                return self._reply(200, self.core.submit_query(self._read_json()))
            match = _DECISION.match(parsed.path)
            if match:
                return self._reply(200, self.core.post_decision(match.group(1), self._read_json()))
            match = _CORPUS.match(parsed.path)
            if match:
                body = self._read_body().decode("utf-8")
                return self._reply(200, self.core.ingest_corpus(match.group(1), body))
            self._reply(404, {"error": "NotFound", "detail": parsed.path})
        except ApiError as exc:
            self._reply(exc.status, exc.body)


def make_server(core: ServiceCore, host: str = "127.0.0.1", port: int = 8080) -> ThreadingHTTPServer:
    handler = type("BoundApiHandler", (ApiHandler,), {"core": core})
    return ThreadingHTTPServer((host, port), handler)


class ServiceServer:
    """Owns a server thread; shutdown drains in-flight requests."""

    def __init__(self, core: ServiceCore, host: str = "127.0.0.1", port: int = 8080) -> None:
        self.httpd = make_server(core, host, port)
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)

    @property
    def address(self) -> str:
        host, port = self.httpd.server_address[:2]
        return f"{host}:{port}"

    def start(self) -> "ServiceServer":
        self._thread.start()
        return self

    def join(self, timeout: float | None = None) -> None:
        self._thread.join(timeout)

    def stop(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
        self._thread.join(timeout=5)
