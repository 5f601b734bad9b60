"""A tiny in-process embedding service for exercising the remote client."""
from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

from ftm.embedding import LocalTrigramProvider


class StubEmbedService:
    """Speaks the embed wire protocol over loopback HTTP.

    Vectors come from a hashed-trigram model; texts too short to produce
    trigrams fall back to a deterministic one-hot unit vector so every
    answer satisfies the unit-norm requirement. Knobs inject failures:
    ``fail_first`` 500s that many /embed calls, ``embed_status`` forces a
    fixed status, ``payload`` replaces the /embed answer verbatim,
    ``raw_body`` sends non-JSON bytes, and ``health_payload`` /
    ``health_status`` override the /health answer.
    """

    MODEL = "stub-trigram"

    def __init__(self, dimension: int = 64, fail_first: int = 0,
                 payload: object = None, raw_body: bytes | None = None,
                 embed_status: int = 200,
                 health_payload: dict | None = None, health_status: int = 200):
        self.provider = LocalTrigramProvider(dimension=dimension)
        self.dimension = dimension
        self.fail_first = fail_first
        self.embed_status = embed_status
        self.payload_override = payload
        self.raw_body = raw_body
        self.health_payload = health_payload
        self.health_status = health_status
        self.requests: list[dict] = []
        self.headers: list[dict] = []
        self.request_count = 0
        self._lock = threading.Lock()

        stub = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def _send(self, status: int, body: bytes):
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def do_GET(self):
                if self.path != "/health":
                    self._send(404, b"{}")
                    return
                payload = stub.health_payload
                if payload is None:
                    payload = {"status": "ok", "model": stub.MODEL}
                self._send(stub.health_status, json.dumps(payload).encode())

            def do_POST(self):
                if self.path != "/embed":
                    self._send(404, b"{}")
                    return
                length = int(self.headers.get("Content-Length", "0"))
                request = json.loads(self.rfile.read(length).decode("utf-8"))
                with stub._lock:
                    stub.requests.append(request)
                    stub.headers.append(dict(self.headers))
                    stub.request_count += 1
                    failing = stub.request_count <= stub.fail_first
                if failing:
                    self._send(500, b'{"error": "injected failure"}')
                    return
                if stub.embed_status != 200:
                    self._send(stub.embed_status, b'{"error": "rejected"}')
                    return
                if stub.raw_body is not None:
                    self._send(200, stub.raw_body)
                    return
                if stub.payload_override is not None:
                    self._send(200, json.dumps(stub.payload_override).encode())
                    return
                vectors = [stub.embed(text) for text in request["texts"]]
                body = json.dumps({"model": stub.MODEL,
                                   "dimension": stub.dimension,
                                   "vectors": vectors}).encode()
                self._send(200, body)

        self.server = HTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    def embed(self, text: str) -> list[float]:
        vector = self.provider.embed(text)
        if not vector.any():
            vector[self.provider._bucket("\x00" + text)] = 1.0
        return [float(x) for x in vector]

    @property
    def url(self) -> str:
        host, port = self.server.server_address
        return f"http://{host}:{port}"

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()
