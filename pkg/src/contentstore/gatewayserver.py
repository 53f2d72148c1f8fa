"""HTTP surface of the gateway.

Routes:
  POST /auth                          {user, key} -> {token, account, expires_at}
  PUT  /v1/{account}/{container}/{object}   body = object bytes
  GET/HEAD/DELETE same path
  GET  /v1/search?q=&mode=&limit=&type=&container=
  GET  /v1/suggest?prefix=&n=

Every response is JSON except the raw-bytes object GET. request_millis on
search responses is the full server-side handling time (auth + parse +
query + serialize); query_millis inside it comes from the engine.
Responses carry permissive CORS headers so the browser client can talk to
the gateway directly.
"""

import json
import threading
import time
from http.server import BaseHTTPRequestHandler
from urllib.parse import parse_qs, unquote, urlparse

from .httpbase import KillableHTTPServer, stop_server

from .errors import (
    BadQuery,
    CorruptReplica,
    EmptyComponent,
    Forbidden,
    IllegalSlash,
    NotFound,
    QuorumFailed,
    Unauthorized,
)
from .gateway import (
    GatewayCore,
    STATUS_CREATED,
    decode_sidecar_header,
    token_response,
)
from .model import ObjectPath, iso_utc

_CORS_HEADERS = {
    "Access-Control-Allow-Origin": "*",
    "Access-Control-Allow-Methods": "GET, PUT, POST, DELETE, HEAD, OPTIONS",
    "Access-Control-Allow-Headers": "X-Auth-Token, X-Filename, X-Detection-Sidecar, Content-Type",
    "Access-Control-Expose-Headers": "X-Object-Size, X-Content-Hash, X-Uploaded-At",
}


class GatewayServer:
    """A GatewayCore behind the public HTTP API."""

    def __init__(self, core: GatewayCore, host: str = "127.0.0.1", port: int = 0):
        self.core = core
        self._httpd = KillableHTTPServer((host, port), self._handler_class())
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"{host}:{port}"

    def start(self) -> None:
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        stop_server(self._httpd, self._thread)

    def serve_forever(self) -> None:
        self._httpd.serve_forever()

    def _handler_class(self):
        core = self.core

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, fmt, *args):
                pass

            # --- plumbing ---

            def _send(self, status: int, body: bytes, headers: dict | None = None):
                self.send_response(status)
                for key, value in _CORS_HEADERS.items():
                    self.send_header(key, value)
                for key, value in (headers or {}).items():
                    self.send_header(key, value)
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                if self.command != "HEAD" and body:
                    self.wfile.write(body)

            def _send_json(self, status: int, payload: dict, headers: dict | None = None):
                body = json.dumps(payload).encode("utf-8")
                merged = {"Content-Type": "application/json"}
                merged.update(headers or {})
                self._send(status, body, merged)

            def _error(self, status: int, message: str):
                self._send_json(status, {"error": message})

            def _token(self) -> str:
                return self.headers.get("X-Auth-Token", "")

            def _body(self) -> bytes:
                length = int(self.headers.get("Content-Length", 0))
                return self.rfile.read(length) if length else b""

            def _object_path(self, raw: str) -> ObjectPath:
                return ObjectPath.parse(unquote(raw))

            def _handle_errors(self, fn):
                try:
                    fn()
                except Unauthorized as exc:
                    self._error(401, str(exc))
                except Forbidden as exc:
                    self._error(403, str(exc))
                except NotFound as exc:
                    self._error(404, str(exc))
                except QuorumFailed as exc:
                    self._error(503, str(exc))
                except CorruptReplica as exc:
                    self._error(502, str(exc))
                except (BadQuery, EmptyComponent, IllegalSlash, ValueError) as exc:
                    self._error(400, str(exc))

            # --- verbs ---

            def do_OPTIONS(self):
                self._send(204, b"")

            def do_POST(self):
                parsed = urlparse(self.path)
                if parsed.path != "/auth":
                    return self._error(404, "unknown endpoint")

                def run():
                    try:
                        creds = json.loads(self._body())
                        user, key = creds["user"], creds["key"]
                    except (ValueError, KeyError, TypeError):
                        raise ValueError("auth body must be JSON {user, key}")
                    token = core.authenticate(user, key)
                    self._send_json(200, token_response(token))

                self._handle_errors(run)

            def do_PUT(self):
                parsed = urlparse(self.path)

                def run():
                    path = self._object_path(parsed.path)
                    sidecar = None
                    raw_sidecar = self.headers.get("X-Detection-Sidecar")
                    if raw_sidecar:
                        sidecar = decode_sidecar_header(raw_sidecar)
                    outcome = core.upload(
                        self._token(),
                        path,
                        self._body(),
                        filename=self.headers.get("X-Filename"),
                        sidecar=sidecar,
                    )
                    status = 201 if outcome.status == STATUS_CREATED else 207
                    self._send_json(status, outcome.to_dict())

                self._handle_errors(run)

            def do_GET(self):
                parsed = urlparse(self.path)
                if parsed.path == "/v1/search":
                    return self._handle_errors(lambda: self._search(parsed))
                if parsed.path == "/v1/suggest":
                    return self._handle_errors(lambda: self._suggest(parsed))

                def run():
                    path = self._object_path(parsed.path)
                    stored = core.get_object(self._token(), path)
                    self._send(200, stored.data, _descriptor_headers(stored.descriptor))

                self._handle_errors(run)

            def do_HEAD(self):
                parsed = urlparse(self.path)

                def run():
                    path = self._object_path(parsed.path)
                    desc = core.head_object(self._token(), path)
                    self._send(200, b"", _descriptor_headers(desc))

                self._handle_errors(run)

            def do_DELETE(self):
                parsed = urlparse(self.path)

                def run():
                    path = self._object_path(parsed.path)
                    removed = core.delete_object(self._token(), path)
                    if not removed:
                        return self._error(404, f"no such object: {path}")
                    self._send_json(200, {"removed": True})

                self._handle_errors(run)

            # --- search endpoints ---

            def _search(self, parsed):
                started = time.perf_counter()
                params = parse_qs(parsed.query)
                q = params.get("q", [""])[0]
                if not q.strip():
                    raise BadQuery("q must be non-empty")
                mode = params.get("mode", ["AND"])[0]
                limit = int(params.get("limit", ["50"])[0])
                content_type = params.get("type", [None])[0]
                container = params.get("container", [None])[0]
                response = core.search(
                    self._token(), q, mode=mode, content_type=content_type,
                    container=container, limit=limit,
                )
                payload = response.to_dict()
                json.dumps(payload)  # include serialization cost in the clock
                payload["request_millis"] = (time.perf_counter() - started) * 1000.0
                self._send_json(200, payload)

            def _suggest(self, parsed):
                params = parse_qs(parsed.query)
                prefix = params.get("prefix", [""])[0]
                if not prefix:
                    raise BadQuery("prefix must be non-empty")
                n = int(params.get("n", ["10"])[0])
                terms = core.suggest(self._token(), prefix, n)
                self._send_json(200, {"terms": terms})

        return Handler


def _descriptor_headers(desc) -> dict:
    return {
        "Content-Type": "application/octet-stream",
        "X-Object-Size": str(desc.size_bytes),
        "X-Content-Hash": desc.content_hash,
        "X-Uploaded-At": iso_utc(desc.uploaded_at),
    }
