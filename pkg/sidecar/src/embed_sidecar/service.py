"""HTTP embedding service.

The app exposes the embed wire protocol: ``POST /embed`` takes
``{"texts": [...]}`` and answers ``{"model", "dimension", "vectors"}``
with one unit-normalized vector per input text, and ``GET /health``
answers ``{"status": "ok", "model": ...}`` once the model is loaded.
Vectors are pooled by averaging token-level vectors; the pooling is
fixed and echoed in the ``model`` field.

Two backends are available. Names of the form ``hashed-trigram-<dim>``
select a deterministic character-trigram embedder with no model files
or downloads; any other name is loaded as a sentence-transformers
model. Both are stateless, so concurrent requests never interact.
"""
from __future__ import annotations

import hashlib
from contextlib import asynccontextmanager
from dataclasses import dataclass

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from pydantic import BaseModel

DEFAULT_MODEL = "all-MiniLM-L6-v2"


@dataclass
class SidecarConfig:
    """Settings for one service instance."""

    model_name: str = DEFAULT_MODEL
    host: str = "127.0.0.1"
    port: int = 8901
    max_batch: int = 256
    auth_token: str | None = None
    device: str = "auto"

    def __post_init__(self) -> None:
        if self.max_batch < 1:
            raise ValueError("max_batch must be at least 1")
        if not self.model_name:
            raise ValueError("model_name must not be empty")


class TrigramBackend:
    """Deterministic hashed character-trigram embedder.

    Texts are lowercased and split into overlapping character trigrams;
    each trigram hashes into one of ``dimension`` buckets and the bucket
    counts are averaged over the trigram count (mean pooling over token
    vectors, each token vector being a one-hot bucket). Texts shorter
    than three characters map to a single reserved bucket keyed by the
    whole text, so every input still yields a nonzero vector.
    """

    def __init__(self, dimension: int = 512) -> None:
        if dimension < 1:
            raise ValueError("dimension must be positive")
        self.dimension = dimension
        self.model_id = f"hashed-trigram-{dimension}|mean-pool"

    def _bucket(self, piece: str) -> int:
        digest = hashlib.blake2b(piece.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "big") % self.dimension

    def encode(self, texts: list[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dimension), dtype=np.float64)
        for row, text in enumerate(texts):
            folded = text.lower()
            grams = [folded[i:i + 3] for i in range(len(folded) - 2)]
            if not grams:
                out[row, self._bucket("\x00" + folded)] = 1.0
                continue
            for gram in grams:
                out[row, self._bucket(gram)] += 1.0
            out[row] /= len(grams)
        return out


class TransformerBackend:
    """Pretrained sentence-transformers embedder, loaded at startup."""

    def __init__(self, model_name: str, device: str = "auto") -> None:
        from sentence_transformers import SentenceTransformer

        kwargs = {} if device == "auto" else {"device": device}
        self._model = SentenceTransformer(model_name, **kwargs)
        self.dimension = int(self._model.get_sentence_embedding_dimension())
        self.model_id = f"{model_name}|mean-pool"

    def encode(self, texts: list[str]) -> np.ndarray:
        vectors = self._model.encode(list(texts), convert_to_numpy=True,
                                     normalize_embeddings=False)
        return np.asarray(vectors, dtype=np.float64)


def make_backend(config: SidecarConfig):
    """Build the embedding backend named by ``config.model_name``."""
    name = config.model_name
    if name == "hashed-trigram" or name.startswith("hashed-trigram-"):
        suffix = name.removeprefix("hashed-trigram").lstrip("-")
        dimension = int(suffix) if suffix else 512
        return TrigramBackend(dimension)
    return TransformerBackend(name, device=config.device)


def _unit_rows(matrix: np.ndarray) -> np.ndarray:
    """Scale each row to unit L2 norm; degenerate rows become a basis vector."""
    norms = np.linalg.norm(matrix, axis=1)
    degenerate = norms < 1e-12
    if degenerate.any():
        matrix = matrix.copy()
        matrix[degenerate] = 0.0
        matrix[degenerate, 0] = 1.0
        norms = np.where(degenerate, 1.0, norms)
    return matrix / norms[:, None]


class EmbedRequest(BaseModel):
    texts: list[str]


def create_app(config: SidecarConfig | None = None) -> FastAPI:
    """Assemble the FastAPI app; the model loads during app startup."""
    settings = config or SidecarConfig()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.backend = make_backend(settings)
        yield

    app = FastAPI(title="embed-sidecar", lifespan=lifespan)
    app.state.backend = None

    def ready_backend():
        backend = getattr(app.state, "backend", None)
        if backend is None:
            raise HTTPException(status_code=503, detail="model not loaded yet")
        return backend

    @app.get("/health")
    def health():
        backend = ready_backend()
        return {"status": "ok", "model": backend.model_id}

    @app.post("/embed")
    def embed(request: EmbedRequest, raw: Request):
        if settings.auth_token is not None:
            expected = f"Bearer {settings.auth_token}"
            if raw.headers.get("Authorization") != expected:
                raise HTTPException(status_code=401,
                                    detail="missing or invalid bearer token")
        backend = ready_backend()
        texts = request.texts
        if not texts:
            raise HTTPException(status_code=400,
                                detail="texts must not be empty")
        if len(texts) > settings.max_batch:
            raise HTTPException(
                status_code=400,
                detail=f"batch of {len(texts)} texts exceeds "
                       f"max_batch={settings.max_batch}")
        try:
            matrix = np.asarray(backend.encode(texts), dtype=np.float64)
        except Exception as exc:
            raise HTTPException(status_code=500,
                                detail=f"embedding failed: {exc}") from exc
        matrix = _unit_rows(matrix)
        return {
            "model": backend.model_id,
            "dimension": int(matrix.shape[1]),
            "vectors": matrix.tolist(),
        }

    return app
