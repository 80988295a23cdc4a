"""Model backends: captioner, transcriber, and reasoner roles.

Two interchangeable implementations sit behind one interface: an HTTP client
speaking the chat-completions protocol against a locally served model, and a
deterministic mock that replays fixture files. Fixture lookups are keyed by
(role, session, segment, prompt hash); misses raise, never default.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping

import requests

from .windowing import TimedUtterance

DEFAULT_MAX_CONCURRENCY = 4


class Role(Enum):
    CAPTIONER = "captioner"
    TRANSCRIBER = "transcriber"
    REASONER = "reasoner"


class BackendError(Exception):
    """Base class for backend failures."""


class BackendTimeoutError(BackendError):
    pass


class TransportError(BackendError):
    pass


class MalformedResponseError(BackendError):
    pass


class UnparseableTimestampsError(BackendError):
    pass


class FixtureMissError(BackendError):
    pass


class BackendExhaustedError(BackendError):
    def __init__(self, attempts: int, last_error: BackendError):
        super().__init__(f"backend failed after {attempts} attempts: {last_error}")
        self.attempts = attempts
        self.last_error = last_error


def prompt_sha256(prompt: str) -> str:
    """Lowercase hex digest keying fixtures and caches to an exact prompt."""
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class GenerationParams:
    temperature: float = 0.0
    max_tokens: int = 256
    seed: int | None = None


@dataclass(frozen=True)
class BackendRequest:
    role: Role
    session_id: str
    prompt: str
    segment_index: int | None = None
    media_ref: str | None = None
    frame_timestamps_s: tuple[float, ...] | None = None
    params: GenerationParams = field(default_factory=GenerationParams)

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("request prompt must be non-empty")
        if self.role in (Role.CAPTIONER, Role.TRANSCRIBER) and not self.media_ref:
            raise ValueError(f"{self.role.value} requests must carry a media_ref")
        if self.role is Role.REASONER and self.media_ref is not None:
            raise ValueError("reasoner requests carry a prompt only, no media_ref")

    @property
    def prompt_hash(self) -> str:
        return prompt_sha256(self.prompt)


@dataclass(frozen=True)
class BackendResponse:
    text: str
    latency_ms: float
    attempt: int
    backend_id: str

    def __post_init__(self):
        if self.attempt < 1:
            raise ValueError("attempt count starts at 1")


FixtureKey = tuple[str, str, int | None, str]


class FixtureStore:
    """Canned texts keyed by (role, session_id, segment_index, prompt_hash)."""

    def __init__(self, records: Iterable[Mapping[str, Any]] = ()):
        self._records: dict[FixtureKey, dict[str, Any]] = {}
        for record in records:
            self.add(record)

    @staticmethod
    def _key(record: Mapping[str, Any]) -> FixtureKey:
        seg = record["segment_index"]
        return (
            str(record["role"]),
            str(record["session_id"]),
            None if seg is None else int(seg),
            str(record["prompt_hash"]),
        )

    def add(self, record: Mapping[str, Any]) -> None:
        self._records[self._key(record)] = dict(record)

    def __len__(self) -> int:
        return len(self._records)

    def records(self) -> list[dict[str, Any]]:
        return [dict(r) for r in self._records.values()]

    def lookup(self, role: Role, session_id: str, segment_index: int | None, prompt_hash: str) -> str:
        key = (role.value, session_id, segment_index, prompt_hash)
        try:
            return self._records[key]["text"]
        except KeyError:
            raise FixtureMissError(
                f"no fixture for role={role.value} session={session_id} "
                f"segment={segment_index} prompt_hash={prompt_hash[:12]}..."
            ) from None

    @classmethod
    def load_jsonl(cls, path: str | Path) -> "FixtureStore":
        store = cls()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    store.add(json.loads(line))
        return store

    def dump_jsonl(self, path: str | Path) -> None:
        records = sorted(self._records.values(), key=lambda r: self._key(r))
        with open(path, "w", encoding="utf-8") as fh:
            for record in records:
                fh.write(json.dumps(record, sort_keys=True) + "\n")


class Backend(ABC):
    """A model endpoint serving one or more roles."""

    backend_id: str

    @abstractmethod
    def complete(self, request: BackendRequest) -> BackendResponse:
        """Run one request to completion, including retries."""


class MockBackend(Backend):
    """Deterministic fixture-backed backend; identical request, identical reply.

    Thread-safe; keeps a call counter so tests can assert cache behavior.
    """

    def __init__(
        self,
        store: FixtureStore,
        backend_id: str = "mock",
        max_concurrency: int = DEFAULT_MAX_CONCURRENCY,
    ):
        self._store = store
        self.backend_id = backend_id
        self._limiter = threading.BoundedSemaphore(max_concurrency)
        self._lock = threading.Lock()
        self.call_count = 0

    def complete(self, request: BackendRequest) -> BackendResponse:
        with self._limiter:
            with self._lock:
                self.call_count += 1
            text = self._store.lookup(
                request.role, request.session_id, request.segment_index, request.prompt_hash
            )
            return BackendResponse(text=text, latency_ms=0.0, attempt=1, backend_id=self.backend_id)


@dataclass(frozen=True)
class HttpBackendConfig:
    base_url: str
    model: str = "local-model"
    api_key: str | None = None
    timeout_s: float = 60.0
    max_retries: int = 2
    backoff_s: float = 0.25
    max_concurrency: int = DEFAULT_MAX_CONCURRENCY


class HttpChatBackend(Backend):
    """Chat-completions client for locally served models.

    Sends ``POST {base_url}/v1/chat/completions`` with the prompt as a single
    user message. Session/segment/media context rides in a ``metadata`` object
    that standard servers ignore and fixture-replay servers key on. Transport
    failures retry with exponential backoff up to max_retries.
    """

    def __init__(self, config: HttpBackendConfig, backend_id: str | None = None):
        self.config = config
        self.backend_id = backend_id if backend_id is not None else f"http:{config.model}"
        self._limiter = threading.BoundedSemaphore(config.max_concurrency)
        self._session = requests.Session()

    def _body(self, request: BackendRequest) -> dict:
        body: dict[str, Any] = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.params.temperature,
            "max_tokens": request.params.max_tokens,
            "metadata": {
                "role": request.role.value,
                "session_id": request.session_id,
                "segment_index": request.segment_index,
                "media_ref": request.media_ref,
                "frame_timestamps_s": (
                    None
                    if request.frame_timestamps_s is None
                    else list(request.frame_timestamps_s)
                ),
            },
        }
        if request.params.seed is not None:
            body["seed"] = request.params.seed
        return body

    def _post_once(self, body: dict) -> str:
        headers = {}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        try:
            resp = self._session.post(
                f"{self.config.base_url.rstrip('/')}/v1/chat/completions",
                json=body,
                headers=headers,
                timeout=self.config.timeout_s,
            )
        except requests.Timeout as exc:
            raise BackendTimeoutError(str(exc)) from exc
        except requests.RequestException as exc:
            raise TransportError(str(exc)) from exc
        if resp.status_code != 200:
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            payload = resp.json()
            return payload["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise MalformedResponseError(f"unexpected response body: {resp.text[:200]}") from exc

    def complete(self, request: BackendRequest) -> BackendResponse:
        body = self._body(request)
        started = time.perf_counter()
        attempts = self.config.max_retries + 1
        last_error: BackendError | None = None
        with self._limiter:
            for attempt in range(1, attempts + 1):
                try:
                    text = self._post_once(body)
                except (BackendTimeoutError, TransportError) as exc:
                    last_error = exc
                    if attempt <= self.config.max_retries:
                        time.sleep(self.config.backoff_s * 2 ** (attempt - 1))
                    continue
                latency_ms = (time.perf_counter() - started) * 1000.0
                return BackendResponse(
                    text=text, latency_ms=latency_ms, attempt=attempt, backend_id=self.backend_id
                )
        assert last_error is not None
        raise BackendExhaustedError(attempts=attempts, last_error=last_error)


# ---------------------------------------------------------------------------
# role entry points


def caption(backend: Backend, request: BackendRequest) -> BackendResponse:
    """Fetch a video caption; text is returned verbatim aside from outer whitespace."""
    if request.role is not Role.CAPTIONER:
        raise ValueError(f"caption() needs a captioner request, got {request.role.value}")
    response = backend.complete(request)
    return BackendResponse(
        text=response.text.strip(),
        latency_ms=response.latency_ms,
        attempt=response.attempt,
        backend_id=response.backend_id,
    )


def parse_utterances_json(text: str) -> list[TimedUtterance]:
    """Decode a transcriber completion: a JSON list of timed utterances."""
    try:
        items = json.loads(text) if text.strip() else []
    except ValueError as exc:
        raise UnparseableTimestampsError(f"transcript is not valid JSON: {text[:100]}") from exc
    if not isinstance(items, list):
        raise UnparseableTimestampsError("transcript JSON must be a list")
    utterances = []
    for item in items:
        try:
            utterances.append(
                TimedUtterance(
                    start_s=float(item["start_s"]),
                    end_s=float(item["end_s"]),
                    text=str(item["text"]),
                )
            )
        except (TypeError, KeyError, ValueError) as exc:
            raise UnparseableTimestampsError(f"bad utterance record: {item!r}") from exc
    for prev, cur in zip(utterances, utterances[1:]):
        if cur.start_s < prev.start_s:
            raise UnparseableTimestampsError(
                f"utterance timestamps out of order: {prev.start_s} then {cur.start_s}"
            )
    return utterances


def transcribe(backend: Backend, request: BackendRequest) -> list[TimedUtterance]:
    """Fetch the session transcript as timed utterances sorted by start time."""
    if request.role is not Role.TRANSCRIBER:
        raise ValueError(f"transcribe() needs a transcriber request, got {request.role.value}")
    response = backend.complete(request)
    return parse_utterances_json(response.text)


def reason(backend: Backend, request: BackendRequest) -> BackendResponse:
    """Run one text-reasoning completion."""
    if request.role is not Role.REASONER:
        raise ValueError(f"reason() needs a reasoner request, got {request.role.value}")
    return backend.complete(request)


def utterances_to_json(utterances: Iterable[TimedUtterance]) -> str:
    """Inverse of parse_utterances_json; used by fixtures and replay servers."""
    return json.dumps(
        [{"start_s": u.start_s, "end_s": u.end_s, "text": u.text} for u in utterances]
    )
