from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from lagdex.synthetic import synthetic_registry


@pytest.fixture(scope="session")
def cop_registry():
    """Fourteen random-walk indices and a noiseless price built from two of them."""
    return synthetic_registry(seed=2012)


@pytest.fixture(scope="session")
def small_registry():
    """Four indices over a short window, price driven by B and C."""
    return synthetic_registry(
        seed=7,
        window="2009-01:2011-12",
        names=["A", "B", "C", "D"],
        terms=[("B", 2, 0.8), ("C", 0, -0.3)],
        trend=1.5,
        intercept=20.0,
        noise=0.5,
    )


class _Endpoint(BaseHTTPRequestHandler):
    """Serves canned responses and records request bodies."""

    responses: list = []
    requests: list = []

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        type(self).requests.append(json.loads(self.rfile.read(length)))
        status, headers, body = type(self).responses.pop(0)
        self.send_response(status)
        for key, value in headers.items():
            self.send_header(key, value)
        self.end_headers()
        self.wfile.write(body if isinstance(body, bytes) else json.dumps(body).encode())

    def log_message(self, *args):
        pass


@pytest.fixture
def endpoint():
    """A local HTTP server answering with queued (status, headers, body) tuples."""
    _Endpoint.responses = []
    _Endpoint.requests = []
    server = HTTPServer(("127.0.0.1", 0), _Endpoint)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}/", _Endpoint
    server.shutdown()
    server.server_close()
