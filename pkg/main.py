"""Entry point.

    python main.py serve [--host H] [--port P]
    python main.py run | cqpoints | complexity ...   (see app/cli.py)
"""

import sys

from app.core.config import settings


def serve(argv):
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(prog="gos-lab serve")
    parser.add_argument("--host", default=settings.API_HOST)
    parser.add_argument("--port", type=int, default=settings.API_PORT)
    args = parser.parse_args(argv)

    from app.main import app
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    argv = sys.argv[1:]
    if argv and argv[0] == "serve":
        sys.exit(serve(argv[1:]))

    from app.cli import main
    sys.exit(main(argv))
