import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from config import TOOL_VERSION, get_log_level
from routes.calibration import margin_routes, sigma_c_routes
from routes.dataset import bootstrap_routes, estimate_routes, synth_routes
from routes.simulation import collapse_routes, rules_routes, sampling_routes, surface_routes
from services.errors import CapgateError
from services.output_writer import OutputWriter, dumps

logger = logging.getLogger("capgate")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# Register commands
COMMANDS = [
    estimate_routes,
    surface_routes,
    collapse_routes,
    sampling_routes,
    rules_routes,
    bootstrap_routes,
    margin_routes,
    synth_routes,
    sigma_c_routes,
]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="capgate",
        description="Reliability of threshold-based process capability approval decisions",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {TOOL_VERSION}")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="command")
    for module in COMMANDS:
        module.register(subparsers)
    return parser


def configure_logging(level: str) -> None:
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        raise ValueError(f"unknown log level {level!r}")
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(numeric)


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command; returns the process exit code (0, 2, 3 or 4)."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        configure_logging(get_log_level())
        parser = build_parser()
    except ValueError as exc:
        print(f"capgate: configuration error: {exc}", file=sys.stderr)
        return 2

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    fields = {k: v for k, v in vars(args).items() if k not in ("handler", "request_model", "command")}
    try:
        configure_logging(args.log_level)
        request = args.request_model(**fields)
        logger.info("%s started (seed=%d, threads=%d)", args.command, request.seed, request.threads)
        with OutputWriter(
            request.out, args.command, argv, request.model_dump(), request.seed, request.format
        ) as out:
            summary = args.handler(request, out)
    except ValidationError as exc:
        logger.error("invalid parameters: %s", exc)
        return 2
    except CapgateError as exc:
        logger.error("%s failed: %s", args.command, exc.detail)
        return exc.exit_code
    except ValueError as exc:
        logger.error("%s failed: %s", args.command, exc)
        return 2
    except Exception:
        logger.exception("%s failed unexpectedly", args.command)
        return 3

    logger.info("%s finished", args.command)
    sys.stdout.write(dumps(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
