"""Embedding providers: a local hashed-trigram model and a remote HTTP service.

Both expose ``embed_batch(texts) -> list[np.ndarray]``. The local provider
is fully deterministic given (dimension, seed) and needs no network; the
remote provider speaks the embed wire protocol (POST /embed, GET /health)
and validates every answer against it.
"""
from __future__ import annotations

import hashlib
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import requests

from .errors import ProtocolError, ProviderError

DEFAULT_DIMENSION = 512
UNIT_NORM_TOLERANCE = 1e-6


@dataclass(slots=True)
class LocalTrigramConfig:
    dimension: int = DEFAULT_DIMENSION
    seed: int = 0


@dataclass(slots=True)
class RemoteConfig:
    base_url: str
    timeout: float = 10.0
    batch_size: int = 64
    auth_token: str | None = None
    max_attempts: int = 3
    backoff: float = 0.2
    max_in_flight: int = 4


class LocalTrigramProvider:
    """Seeded hashed character-trigram embeddings, L2-normalized.

    Texts shorter than three characters embed to the zero vector. The
    trigram-to-bucket hash is keyed BLAKE2b, so vectors are identical
    across processes and platforms for a fixed seed.
    """

    def __init__(self, config: LocalTrigramConfig | None = None, *,
                 dimension: int | None = None, seed: int | None = None):
        if config is None:
            config = LocalTrigramConfig()
        if dimension is not None:
            config = LocalTrigramConfig(dimension, config.seed)
        if seed is not None:
            config = LocalTrigramConfig(config.dimension, seed)
        if config.dimension <= 0:
            raise ValueError("dimension must be positive")
        self.config = config
        self._key = (config.seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")

    @property
    def dimension(self) -> int:
        return self.config.dimension

    @property
    def model_name(self) -> str:
        return f"local-trigram-{self.config.dimension}"

    def _bucket(self, trigram: str) -> int:
        digest = hashlib.blake2b(trigram.encode("utf-8"), digest_size=8,
                                 key=self._key).digest()
        return int.from_bytes(digest, "little") % self.config.dimension

    def embed(self, text: str) -> np.ndarray:
        vector = np.zeros(self.config.dimension, dtype=np.float64)
        lowered = text.lower()
        if len(lowered) < 3:
            return vector
        for i in range(len(lowered) - 2):
            vector[self._bucket(lowered[i:i + 3])] += 1.0
        norm = float(np.linalg.norm(vector))
        if norm > 0.0:
            vector /= norm
        return vector

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        return [self.embed(text) for text in texts]


class RemoteProvider:
    """Client for an embedding service speaking the embed wire protocol."""

    def __init__(self, config: RemoteConfig):
        self.config = config
        self._session = requests.Session()
        if config.auth_token:
            self._session.headers["Authorization"] = f"Bearer {config.auth_token}"

    def _post_chunk(self, chunk: list[str]) -> list[np.ndarray]:
        url = self.config.base_url.rstrip("/") + "/embed"
        status = None
        for attempt in range(1, self.config.max_attempts + 1):
            try:
                response = self._session.post(url, json={"texts": chunk},
                                              timeout=self.config.timeout)
            except (requests.ConnectionError, requests.Timeout) as exc:
                if attempt == self.config.max_attempts:
                    raise ProviderError(f"embed request failed: {exc}",
                                        status=None, attempts=attempt) from exc
                time.sleep(self.config.backoff * (2 ** (attempt - 1)))
                continue
            status = response.status_code
            if status == 200:
                return self._validate(response, chunk)
            if 400 <= status < 500:
                raise ProviderError(f"embed request rejected: {response.text[:200]}",
                                    status=status, attempts=attempt)
            if attempt < self.config.max_attempts:
                time.sleep(self.config.backoff * (2 ** (attempt - 1)))
        raise ProviderError("embed request failed", status=status,
                            attempts=self.config.max_attempts)

    def _validate(self, response, chunk: list[str]) -> list[np.ndarray]:
        try:
            payload = response.json()
        except ValueError as exc:
            raise ProtocolError(f"embed answer is not JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise ProtocolError("embed answer must be a JSON object")
        model = payload.get("model")
        dimension = payload.get("dimension")
        vectors = payload.get("vectors")
        if not isinstance(model, str) or not model:
            raise ProtocolError("embed answer lacks a model name")
        if not isinstance(dimension, int) or dimension <= 0:
            raise ProtocolError("embed answer lacks a positive dimension")
        if not isinstance(vectors, list) or len(vectors) != len(chunk):
            raise ProtocolError(
                f"embed answer has {len(vectors) if isinstance(vectors, list) else 'no'}"
                f" vectors for {len(chunk)} texts")
        out = []
        for row in vectors:
            array = np.asarray(row, dtype=np.float64)
            if array.ndim != 1 or array.shape[0] != dimension:
                raise ProtocolError("vector length disagrees with declared dimension")
            norm = float(np.linalg.norm(array))
            if abs(norm - 1.0) > UNIT_NORM_TOLERANCE:
                raise ProtocolError(f"vector norm {norm} is not unit")
            out.append(array)
        return out

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        if not texts:
            return []
        size = max(1, self.config.batch_size)
        chunks = [texts[start:start + size] for start in range(0, len(texts), size)]
        workers = max(1, min(self.config.max_in_flight, len(chunks)))
        if workers == 1:
            results = map(self._post_chunk, chunks)
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(self._post_chunk, chunks))
        out: list[np.ndarray] = []
        for vectors in results:
            out.extend(vectors)
        return out

    def health(self) -> dict:
        url = self.config.base_url.rstrip("/") + "/health"
        try:
            response = self._session.get(url, timeout=self.config.timeout)
        except (requests.ConnectionError, requests.Timeout) as exc:
            raise ProviderError(f"health check failed: {exc}", status=None,
                                attempts=1) from exc
        if response.status_code != 200:
            raise ProviderError("service is not healthy",
                                status=response.status_code, attempts=1)
        try:
            payload = response.json()
        except ValueError as exc:
            raise ProtocolError(f"health answer is not JSON: {exc}") from exc
        if not isinstance(payload, dict) or payload.get("status") != "ok":
            raise ProtocolError(f"unexpected health payload: {payload!r}")
        return payload


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity in [-1, 1]; zero vectors score 0.0."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    norm_u = float(np.linalg.norm(u))
    norm_v = float(np.linalg.norm(v))
    if norm_u == 0.0 or norm_v == 0.0:
        return 0.0
    value = float(np.dot(u, v) / (norm_u * norm_v))
    return max(-1.0, min(1.0, value))
