"""Command line launcher: ``python -m embed_sidecar --port 8901``."""
from __future__ import annotations

import argparse

from embed_sidecar.service import DEFAULT_MODEL, SidecarConfig, create_app


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed-sidecar",
        description="Serve unit-normalized text embeddings over HTTP.")
    parser.add_argument("--model", default=DEFAULT_MODEL,
                        help="model name; 'hashed-trigram-<dim>' runs with no "
                             "model files or downloads (default: %(default)s)")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8901)
    parser.add_argument("--max-batch", type=int, default=256,
                        help="largest accepted texts list (default: %(default)s)")
    parser.add_argument("--auth-token", default=None,
                        help="require 'Authorization: Bearer <token>' on /embed")
    parser.add_argument("--device", default="auto",
                        help="device for transformer models, e.g. cpu or cuda "
                             "(default: %(default)s)")
    return parser


def main(argv: list[str] | None = None) -> int:
    import uvicorn

    args = build_parser().parse_args(argv)
    config = SidecarConfig(model_name=args.model, host=args.host,
                           port=args.port, max_batch=args.max_batch,
                           auth_token=args.auth_token, device=args.device)
    uvicorn.run(create_app(config), host=config.host, port=config.port,
                log_level="info")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
