"""Threading HTTP server that can actually die.

ThreadingHTTPServer.shutdown() only stops the accept loop; keep-alive
connections stay open and their handler threads keep answering, which is
the opposite of what stopping a storage node must mean. This subclass
tracks live connections so stop() can sever them like a real process kill.
"""

import socket
import threading
from http.server import ThreadingHTTPServer


class KillableHTTPServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._active_connections: set = set()
        self._active_lock = threading.Lock()

    def get_request(self):
        request, client_address = super().get_request()
        with self._active_lock:
            self._active_connections.add(request)
        return request, client_address

    def shutdown_request(self, request):
        with self._active_lock:
            self._active_connections.discard(request)
        super().shutdown_request(request)

    def handle_error(self, request, client_address):
        pass  # connection resets from severed clients are expected

    def close_all_connections(self):
        with self._active_lock:
            connections = list(self._active_connections)
        for conn in connections:
            try:
                conn.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass


def stop_server(httpd: KillableHTTPServer, thread: threading.Thread | None) -> None:
    httpd.shutdown()
    httpd.close_all_connections()
    httpd.server_close()
    if thread is not None:
        thread.join(timeout=5)
