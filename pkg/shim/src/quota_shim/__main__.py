"""CLI entry: quota-shim --backend tiny --port 8070 --device cpu"""

import argparse

from .app import serve
from .config import ShimConfig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="quota-shim",
        description="Serve the frame-scoring wire protocol over HTTP.",
    )
    parser.add_argument("--backend", default="tiny",
                        help="tiny[:seed] or hf:<model-id> (default tiny)")
    parser.add_argument("--port", type=int, default=8070)
    parser.add_argument("--device", default="cpu")
    args = parser.parse_args(argv)
    serve(ShimConfig(backend=args.backend, port=args.port, device=args.device))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
