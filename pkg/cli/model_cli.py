"""
Model Solver Command Line
Solves model files and converts MATPOWER cases.

    python -m cli.model_cli solve data/models/example1.mod
    python -m cli.model_cli convert data/cases/case9.m --format complex

A bare `.mod` path is the same as `solve`; a bare `.m` path is the same
as `convert`.

Exit codes: 0 success, 1 non-convergence, 2 input errors.
"""

#####################################
# Import Modules
#####################################

import argparse
import pathlib
import sys
from typing import List, Optional

from engine import emit_report, run_document, write_trace
from language import ensure_valid, parse_file, parse_text
from matpower import (
    bus_voltages,
    emit_model,
    max_voltage_error,
    read_case,
    read_config,
    reference_power_flow,
)
from matpower.config import FORMATS, REPORT_LEVELS, SYMBOLS, ConvertOptions
from utils.errors import (
    CaseFormatError,
    ConfigError,
    GridModelError,
    LimitCyclingError,
    SourceError,
    ValidationError,
)
from utils.utils_logger import logger, set_console_level

#####################################
# Default Configurations
#####################################

EXIT_OK = 0
EXIT_NOT_CONVERGED = 1
EXIT_INPUT_ERROR = 2

VERIFY_TOLERANCE = 1e-6

SUBCOMMANDS = ("solve", "convert")

#####################################
# Argument Parsing
#####################################


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridmodel",
        description="Symbolic power-network model solver and MATPOWER converter.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", help="parse, solve and report a model file")
    solve.add_argument("model", type=pathlib.Path, help="model file (.mod)")
    solve.add_argument("--out", type=pathlib.Path, help="write the report here instead of stdout")
    solve.add_argument("--seed", type=int, help="seed for rnd() draws")
    solve.add_argument("--report", choices=REPORT_LEVELS, help="override the Header report level")
    solve.add_argument("--quiet", action="store_true", help="log only errors to stderr")
    solve.add_argument("--verbose", action="store_true", help="log debug detail to stderr")

    convert = commands.add_parser("convert", help="convert a MATPOWER case to a model file")
    convert.add_argument("case", type=pathlib.Path, help="MATPOWER case file (.m)")
    convert.add_argument("--out", type=pathlib.Path, help="model file to write (default <stem>.mod)")
    convert.add_argument("--config", type=pathlib.Path, help="converter configuration XML")
    convert.add_argument("--format", choices=FORMATS, help="override the configured format")
    convert.add_argument("--symbols", choices=SYMBOLS, help="override the configured symbols")
    convert.add_argument("--q-limits", action="store_true", help="enforce generator reactive limits")
    convert.add_argument(
        "--verify", action="store_true", help="solve the result and compare with a reference power flow"
    )
    convert.add_argument("--quiet", action="store_true", help="log only errors to stderr")
    convert.add_argument("--verbose", action="store_true", help="log debug detail to stderr")
    return parser


def _with_alias(argv: List[str]) -> List[str]:
    """`model.mod` means `solve model.mod`; `case.m` means `convert case.m`."""
    if not argv or argv[0] in SUBCOMMANDS or argv[0].startswith("-"):
        return argv
    command = "convert" if argv[0].endswith(".m") else "solve"
    return [command] + argv


def _console_level(args: argparse.Namespace) -> None:
    if args.quiet:
        set_console_level("ERROR")
    elif args.verbose:
        set_console_level("DEBUG")


#####################################
# Commands
#####################################


def solve_command(args: argparse.Namespace) -> int:
    path: pathlib.Path = args.model
    if not path.is_file():
        logger.error(f"Model file not found: {path}")
        sys.stderr.write(f"error: model file not found: {path}\n")
        return EXIT_INPUT_ERROR

    document = parse_file(path)
    ensure_valid(document)
    run = run_document(document, seed=args.seed, report_level=args.report)
    text = emit_report(run)

    if args.out:
        args.out.write_text(text, encoding="utf-8")
        logger.info(f"Report written to {args.out}")
    else:
        sys.stdout.write(text)

    if run.has_repeats and run.passes:
        folder = args.out.parent if args.out else path.parent
        write_trace(run, folder / f"{path.stem}.trace.csv")

    return EXIT_OK if run.succeeded else EXIT_NOT_CONVERGED


def convert_options(args: argparse.Namespace) -> ConvertOptions:
    options = read_config(args.config) if args.config else ConvertOptions()
    return options.with_overrides(
        format=args.format,
        symbols=args.symbols,
        enforce_q_limits=True if args.q_limits else None,
        out=True if args.verify else None,
    )


def verify_conversion(case, options: ConvertOptions, text: str, source: str) -> int:
    """Solve the emitted model and compare bus voltages with the reference."""
    document = parse_text(text, source)
    ensure_valid(document)
    run = run_document(document)
    if not run.succeeded:
        sys.stdout.write(f"Verification: emitted model did not converge ({run.failure})\n")
        return EXIT_NOT_CONVERGED
    reference = reference_power_flow(case, options)
    if not reference.converged:
        sys.stdout.write("Verification: reference power flow did not converge\n")
        return EXIT_NOT_CONVERGED
    error = max_voltage_error(reference.V, bus_voltages(case, options, run.outputs))
    status = "ok" if error <= VERIFY_TOLERANCE else "FAILED"
    sys.stdout.write(f"Verification: max |V - V_ref| = {error:.3e} ({status})\n")
    return EXIT_OK if error <= VERIFY_TOLERANCE else EXIT_NOT_CONVERGED


def convert_command(args: argparse.Namespace) -> int:
    path: pathlib.Path = args.case
    if not path.is_file():
        logger.error(f"Case file not found: {path}")
        sys.stderr.write(f"error: case file not found: {path}\n")
        return EXIT_INPUT_ERROR

    options = convert_options(args)
    case = read_case(path)
    text = emit_model(case, options)
    out = args.out or path.with_suffix(".mod")
    out.write_text(text, encoding="utf-8")
    logger.info(f"Model written to {out}")

    if args.verify:
        return verify_conversion(case, options, text, str(out))
    return EXIT_OK


#####################################
# Main Function
#####################################


def main(argv: Optional[List[str]] = None) -> int:
    argv = _with_alias(list(sys.argv[1:] if argv is None else argv))
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # argparse has already printed usage
        return EXIT_INPUT_ERROR if e.code else EXIT_OK
    _console_level(args)

    try:
        if args.command == "solve":
            return solve_command(args)
        return convert_command(args)
    except ValidationError as e:
        for diagnostic in e.diagnostics:
            sys.stderr.write(f"{diagnostic}\n")
        return EXIT_INPUT_ERROR
    except (SourceError, CaseFormatError, ConfigError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INPUT_ERROR
    except (OSError, UnicodeDecodeError) as e:
        logger.error(f"Cannot read input: {e}")
        sys.stderr.write(f"error: cannot read input: {e}\n")
        return EXIT_INPUT_ERROR
    except LimitCyclingError as e:
        logger.error(str(e))
        sys.stderr.write(f"error: {e}\n")
        return EXIT_NOT_CONVERGED
    except GridModelError as e:
        logger.error(f"{type(e).__name__}: {e}")
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INPUT_ERROR


#####################################
# Conditional Execution
#####################################

if __name__ == "__main__":
    sys.exit(main())
