"""HTTP wire protocol for a storage node.

PUT/GET/HEAD/DELETE ``/node/v1/{account}/{container}/{object}``. A PUT
carries ``X-Content-Hash``; the node verifies the digest against the body
before acknowledging. Serves each request on its own thread.
"""

import threading
from http.server import BaseHTTPRequestHandler
from urllib.parse import unquote

from .errors import DiskFull, EmptyComponent, IllegalSlash, NotFound
from .httpbase import KillableHTTPServer, stop_server
from .model import (
    ContentType,
    DocumentFormat,
    ImageFormat,
    Kind,
    ObjectDescriptor,
    ObjectPath,
    content_hash,
)
from .storage import DEFAULT_PART_POWER, LocalNode


class NodeServer:
    """A LocalNode behind the node wire protocol."""

    def __init__(self, root, host: str = "127.0.0.1", port: int = 0,
                 part_power: int = DEFAULT_PART_POWER):
        self.node = LocalNode(root, part_power)
        self.request_counts = {"PUT": 0, "GET": 0, "HEAD": 0, "DELETE": 0}
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
        server = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, fmt, *args):
                pass

            def _object_path(self) -> ObjectPath | None:
                raw = unquote(self.path)
                if not raw.startswith("/node/v1/"):
                    return None
                try:
                    return ObjectPath.parse(raw[len("/node"):])
                except (EmptyComponent, IllegalSlash):
                    return None

            def _reply(self, status: int, body: bytes = b"", headers: dict | None = None):
                self.send_response(status)
                for key, value in (headers or {}).items():
                    self.send_header(key, value)
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                if self.command != "HEAD" and body:
                    self.wfile.write(body)

            def _descriptor_headers(self, desc: ObjectDescriptor) -> dict:
                headers = {
                    "X-Object-Size": str(desc.size_bytes),
                    "X-Content-Hash": desc.content_hash,
                    "X-Uploaded-At": str(desc.uploaded_at),
                }
                if desc.content_type is not None:
                    headers["X-Content-Kind"] = desc.content_type.kind.value
                    headers["X-Content-Format"] = desc.content_type.format.value
                return headers

            def do_PUT(self):
                server.request_counts["PUT"] += 1
                path = self._object_path()
                if path is None:
                    return self._reply(400)
                length = int(self.headers.get("Content-Length", 0))
                data = self.rfile.read(length)
                claimed = self.headers.get("X-Content-Hash", "")
                if content_hash(data) != claimed:
                    return self._reply(422)
                ct = None
                kind = self.headers.get("X-Content-Kind")
                if kind:
                    k = Kind(kind)
                    fmt_cls = ImageFormat if k is Kind.IMAGE else DocumentFormat
                    ct = ContentType(k, fmt_cls(self.headers["X-Content-Format"]))
                desc = ObjectDescriptor(
                    path=path,
                    size_bytes=len(data),
                    content_hash=claimed,
                    content_type=ct,
                    uploaded_at=int(self.headers.get("X-Uploaded-At", "0")),
                )
                try:
                    server.node.put(path, data, desc)
                except DiskFull:
                    return self._reply(507)
                except OSError:
                    return self._reply(500)
                self._reply(201)

            def do_GET(self):
                server.request_counts["GET"] += 1
                path = self._object_path()
                if path is None:
                    return self._reply(400)
                try:
                    stored = server.node.get(path)
                except NotFound:
                    return self._reply(404)
                except OSError:
                    return self._reply(500)
                self._reply(200, stored.data, self._descriptor_headers(stored.descriptor))

            def do_HEAD(self):
                server.request_counts["HEAD"] += 1
                path = self._object_path()
                if path is None:
                    return self._reply(400)
                try:
                    desc = server.node.head(path)
                except NotFound:
                    return self._reply(404)
                except OSError:
                    return self._reply(500)
                self._reply(200, b"", self._descriptor_headers(desc))

            def do_DELETE(self):
                server.request_counts["DELETE"] += 1
                path = self._object_path()
                if path is None:
                    return self._reply(400)
                try:
                    removed = server.node.delete(path)
                except OSError:
                    return self._reply(500)
                self._reply(204 if removed else 404)

        return Handler
