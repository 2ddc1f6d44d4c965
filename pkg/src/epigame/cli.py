"""Command-line entry point.

``epigame COMMAND --config PATH [--seed N] [--out DIR] [--strict] [-v]``

Exit status is 0 on success, 1 when the configuration or an input is invalid and 2
when a solver did not converge. In the last case the reports are still written.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .config import load_config
from .errors import ConvergenceError
from .registry import available_commands, command_registry, get_command
from .report import emit_report

logger = logging.getLogger("epigame")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NOT_CONVERGED = 2


def _summary_line(cls) -> str:
    doc = (cls.__doc__ or "").strip()
    return doc.split("\n\n")[0].replace("\n", " ")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epigame",
        description="Contagion and prophylactic investment games on weighted networks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for command_id in available_commands():
        p = sub.add_parser(command_id, help=_summary_line(command_registry[command_id]))
        p.add_argument("--config", required=True, type=Path, help="experiment JSON file")
        p.add_argument("--seed", type=int, help="override options.seed")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--strict", action="store_true", help="reject unknown keys")
        p.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def _configure_logging(verbose: int):
    level = max(logging.WARNING - 10 * verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        experiment = load_config(args.config, strict=args.strict)
        experiment = experiment.override(seed=args.seed, out=args.out)
        command = get_command({"id": args.command, **experiment.options})
        result = command.run(experiment)
        out_dir = experiment.out if experiment.out is not None else Path.cwd()
        emit_report(result, experiment, out_dir)
    except ConvergenceError as e:
        logger.error("%s", e)  # noqa: TRY400
        return EXIT_NOT_CONVERGED
    except (ValueError, OSError) as e:
        logger.error("%s", e)  # noqa: TRY400
        return EXIT_INVALID
    if not result.converged:
        logger.warning("%s: solver did not converge", args.command)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
