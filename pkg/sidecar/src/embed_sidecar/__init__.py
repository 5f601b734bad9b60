"""Embedding sidecar: a small HTTP service for text vectors.

The service speaks a two-endpoint JSON protocol:

* ``POST /embed`` with ``{"texts": [...]}`` returns ``{"model": ...,
  "dimension": ..., "vectors": [[...], ...]}`` where every vector has
  unit L2 norm.
* ``GET /health`` returns ``{"status": "ok", "model": ...}`` once the
  model has loaded, 503 before that.

Any client of that protocol can use the service; it shares no code
with its consumers.
"""

from embed_sidecar.service import (
    SidecarConfig,
    TrigramBackend,
    TransformerBackend,
    create_app,
    make_backend,
)

__all__ = [
    "SidecarConfig",
    "TrigramBackend",
    "TransformerBackend",
    "create_app",
    "make_backend",
]
