"""Command-line entry point: one subcommand per registered program, plus ``replay``."""

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

import pydantic

from .config import RunConfig, parse_key_values, read_config_file
from .csv_output import read_csv
from .errors import ValidationError, WeakMeasurementError
from .experiments import PROGRAMS, get_program, run_program

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    """Parser with a subcommand for every program."""
    parser = argparse.ArgumentParser(
        prog="weak-measurement-info",
        description="Information content of sequential weak qubit measurements.",
    )
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level on standard error (default: WARNING)",
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="PROGRAM")
    for name in sorted(PROGRAMS):
        spec = PROGRAMS[name].spec
        keys = ", ".join(
            f"{key}={value}" if value is not None else f"{key} (required)"
            for key, value in sorted(spec.defaults.items())
        )
        sub = commands.add_parser(
            name, help=spec.summary, description=f"{spec.summary} Keys: {keys}"
        )
        sub.add_argument("params", nargs="*", metavar="key=value")
        sub.add_argument("--config", type=Path, help="File of key=value lines")
    replay = commands.add_parser("replay", help="Rerun the program recorded in a CSV header")
    replay.add_argument("file", type=Path)
    replay.add_argument(
        "params", nargs="*", metavar="key=value", help="Extra keys such as output or workers"
    )
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Build the run configuration from defaults, ``--config`` and positional pairs."""
    overrides = parse_key_values(args.params)
    if args.command == "replay":
        recorded = read_csv(args.file)
        if recorded.program is None:
            raise ValidationError(f"{args.file} has no '# program=' header")
        return RunConfig.resolve(get_program(recorded.program).spec, recorded.values, overrides)
    spec = get_program(args.command).spec
    sources = [read_config_file(args.config)] if args.config else []
    return RunConfig.resolve(spec, *sources, overrides)


def main(argv: Sequence[str] | None = None) -> int:
    """
    Run a program and write its CSV to ``output`` or standard output.

    Returns:
        0 on success, 2 on invalid input, 1 on unexpected failure.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        config = resolve_config(args)
        text = run_program(config)
    except (WeakMeasurementError, pydantic.ValidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        logger.error("Program %s failed: %s", args.command, e, exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILURE

    output = config.values.get("output", "")
    if output:
        path = Path(output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="\n")
        logger.info("Wrote %s", path)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
