"""A local chat-completions stub that replays fixture files.

Serves ``POST /v1/chat/completions`` and answers from a FixtureStore using the
same (role, session, segment, prompt hash) key as the in-process mock, so the
HTTP client and the mock are interchangeable end to end.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .backends import FixtureMissError, FixtureStore, Role, prompt_sha256


class _FixtureHandler(BaseHTTPRequestHandler):
    store: FixtureStore  # set by the server factory

    def log_message(self, fmt, *args):  # silence per-request stderr noise
        pass

    def _send(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_POST(self):
        if self.path != "/v1/chat/completions":
            self._send(404, {"error": {"message": f"unknown path {self.path}"}})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            body = json.loads(self.rfile.read(length))
            prompt = body["messages"][-1]["content"]
            meta = body.get("metadata") or {}
            role = Role(meta["role"])
            session_id = str(meta["session_id"])
            seg = meta.get("segment_index")
            segment_index = None if seg is None else int(seg)
        except (ValueError, KeyError, TypeError) as exc:
            self._send(400, {"error": {"message": f"bad request: {exc}"}})
            return
        try:
            text = self.store.lookup(role, session_id, segment_index, prompt_sha256(prompt))
        except FixtureMissError as exc:
            self._send(404, {"error": {"message": str(exc)}})
            return
        self._send(
            200,
            {
                "object": "chat.completion",
                "model": body.get("model", "fixture-replay"),
                "choices": [
                    {
                        "index": 0,
                        "message": {"role": "assistant", "content": text},
                        "finish_reason": "stop",
                    }
                ],
            },
        )


class FixtureChatServer:
    """Threaded stub server; use as a context manager in tests and scripts."""

    def __init__(self, store: FixtureStore, host: str = "127.0.0.1", port: int = 0):
        handler = type("BoundFixtureHandler", (_FixtureHandler,), {"store": store})
        self._server = ThreadingHTTPServer((host, port), handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def base_url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "FixtureChatServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=5)

    def __enter__(self) -> "FixtureChatServer":
        return self.start()

    def __exit__(self, *exc_info) -> None:
        self.stop()
