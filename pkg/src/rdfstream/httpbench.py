"""Keep-alive HTTP GET/POST body-size throughput.

Server endpoints: ``GET /blob?size=N`` returns N bytes, ``POST /sink``
accepts any body and answers 200 with an empty body. HTTP/1.1, one
persistent connection, Content-Length framing only.
"""

from __future__ import annotations

import http.client
import socket
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlsplit

from .samples import ThroughputSample

MAX_BLOB = 64 * 1024 * 1024
_FILL = bytes(range(256)) * 4096  # 1 MiB pattern, sliced for smaller bodies


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def setup(self):
        super().setup()
        self.connection.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)

    def log_message(self, format, *args):
        pass

    def _reply(self, status: int, body: bytes = b"", content_type="application/octet-stream"):
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        if body:
            self.wfile.write(body)

    def do_GET(self):
        url = urlsplit(self.path)
        if url.path != "/blob":
            return self._reply(404)
        try:
            size = int(parse_qs(url.query).get("size", ["0"])[0])
        except ValueError:
            return self._reply(400)
        if not 0 <= size <= MAX_BLOB:
            return self._reply(400)
        if size <= len(_FILL):
            body = _FILL[:size]
        else:
            body = (_FILL * (size // len(_FILL) + 1))[:size]
        self._reply(200, body)

    def do_POST(self):
        if urlsplit(self.path).path != "/sink":
            return self._reply(404)
        length = self.headers.get("Content-Length")
        if length is None or not length.isdigit():
            return self._reply(411)
        remaining = int(length)
        while remaining:
            chunk = self.rfile.read(min(remaining, 1 << 16))
            if not chunk:
                break
            remaining -= len(chunk)
        self._reply(200)


class BenchServer:
    """The benchmark peer, served from a background thread."""

    def __init__(self, host: str = "127.0.0.1", port: int = 0):
        self.httpd = ThreadingHTTPServer((host, port), _Handler)
        self.httpd.daemon_threads = True
        self.host, self.port = self.httpd.server_address[:2]
        self._thread = None

    def __enter__(self):
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def __exit__(self, *exc):
        self.httpd.shutdown()
        self.httpd.server_close()

    def serve_forever(self):
        self.httpd.serve_forever()


def _connect(host: str, port: int) -> http.client.HTTPConnection:
    conn = http.client.HTTPConnection(host, port, timeout=30)
    conn.connect()
    conn.sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
    return conn


def _sample(experiment, body_size, request_count, elapsed, host, port):
    return ThroughputSample(
        experiment=experiment,
        variable="body_size",
        value=body_size,
        count=request_count,
        per_sec=request_count / elapsed,
        bytes_per_sec=body_size * request_count / elapsed,
        elapsed_s=elapsed,
        config={"requests": request_count, "peer": f"{host}:{port}", "connection": "keep-alive"},
    )


def http_get_bench(host: str, port: int, body_size: int, request_count: int = 100) -> ThroughputSample:
    """Fetch a ``body_size`` blob ``request_count`` times over one connection."""
    conn = _connect(host, port)
    try:
        path = f"/blob?size={body_size}"
        t0 = time.perf_counter()
        for _ in range(request_count):
            conn.request("GET", path)
            resp = conn.getresponse()
            body = resp.read()
            if resp.status != 200:
                raise ConnectionError(f"GET {path} -> {resp.status}")
            if len(body) != body_size:
                raise ConnectionError(f"GET {path} returned {len(body)} bytes")
        elapsed = time.perf_counter() - t0
    finally:
        conn.close()
    return _sample("http-get", body_size, request_count, elapsed, host, port)


def http_post_bench(host: str, port: int, body_size: int, request_count: int = 100) -> ThroughputSample:
    """POST a ``body_size`` body ``request_count`` times over one connection."""
    conn = _connect(host, port)
    body = _FILL[:body_size] if body_size <= len(_FILL) else bytes(body_size)
    try:
        t0 = time.perf_counter()
        for _ in range(request_count):
            conn.request("POST", "/sink", body=body, headers={"Content-Type": "application/octet-stream"})
            resp = conn.getresponse()
            resp.read()
            if resp.status != 200:
                raise ConnectionError(f"POST /sink -> {resp.status}")
        elapsed = time.perf_counter() - t0
    finally:
        conn.close()
    return _sample("http-post", body_size, request_count, elapsed, host, port)
