"""QSHI Teleport - Command-line entry point."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from src import __version__
from src.core.errors import (
    DegenerateStateError,
    ParseError,
    QshiError,
    UnitarityError,
    ValidationError,
)
from src.core.models import Mode, ProtocolReport, RunConfig
from src.services.audit import get_audit_service
from src.services.config import apply_overrides, load_config
from src.services.export import get_export_service
from src.services.protocol import coincidence_label, get_protocol_service
from src.services.selfcheck import DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_TOL, SelfCheckService
from src.services.sweep import get_sweep_service

logger = logging.getLogger(__name__)

# Exit codes
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_DEGENERATE = 4

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(verbosity: int) -> None:
    """Send log records to stderr; WARNING by default, INFO with -v, DEBUG with -vv."""
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def format_outcome_table(report: ProtocolReport) -> str:
    """Human-readable per-outcome summary."""
    sampled = any(o.sampled_count is not None for o in report.outcomes)
    header = (
        f"{'outcome':<8} {'detectors':<9} {'probability':>15} "
        f"{'constraints_ok':>15} {'congruence_ok':>14} {'fidelity':>15}"
    )
    if sampled:
        header += f" {'sampled':>8}"
    lines = [header]
    for o in report.outcomes:
        fidelity = "-" if o.fidelity is None else f"{o.fidelity:.12f}"
        line = (
            f"{o.label.symbol:<8} {coincidence_label(o.label):<11} "
            f"{o.probability:>15.12f} {str(o.constraint_satisfied).lower():>15} "
            f"{str(o.congruence_satisfied).lower():>14} {fidelity:>15}"
        )
        if sampled:
            line += f" {o.sampled_count:>8}"
        lines.append(line)
    return "\n".join(lines)


def cmd_run(config: RunConfig, stem: str, out_dir) -> int:
    """
    Run one protocol execution and write ``<stem>_run.json``.

    Returns:
        Exit code
    """
    report = get_protocol_service().run(config)
    export = get_export_service()
    path = export.output_path(out_dir, stem, "run.json")
    ok, error = export.write_run_json(report, config, path)
    if not ok:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_FAILURE

    print(f"mode: {report.mode.value}")
    print(f"qubit choice: {report.qubit_choice.value} (probability {report.qubit_probability:.12f})")
    print(f"design row: {report.design_row.value}")
    print(f"channel concurrence: {report.channel_concurrence:.12f}")
    print(format_outcome_table(report))
    print(f"report: {path}")
    return EXIT_OK


def cmd_sweep(config: RunConfig, stem: str, out_dir, xlsx: bool = False) -> int:
    """
    Run the configured sweep and write ``<stem>_sweep.csv`` (and ``.xlsx``).

    Returns:
        Exit code
    """
    if config.sweep is None:
        raise ValidationError("config has no sweep section", "sweep")

    rows = get_sweep_service().run(config)
    export = get_export_service()
    csv_path = export.output_path(out_dir, stem, "sweep.csv")
    ok, error = export.write_sweep_csv(rows, csv_path)
    if not ok:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_FAILURE

    print(f"sweep: {config.sweep.param} from {config.sweep.start:.15g} to {config.sweep.stop:.15g} "
          f"in {config.sweep.steps} steps")
    print(f"rows: {len(rows)}")
    print(f"table: {csv_path}")

    if xlsx:
        xlsx_path = export.output_path(out_dir, stem, "sweep.xlsx")
        ok, error = export.write_sweep_xlsx(rows, xlsx_path)
        if not ok:
            print(f"error: {error}", file=sys.stderr)
            return EXIT_FAILURE
        print(f"workbook: {xlsx_path}")
    return EXIT_OK


def cmd_selfcheck(seed: int = DEFAULT_SEED, tol: float = DEFAULT_TOL, samples: int = DEFAULT_SAMPLES) -> int:
    """
    Run the invariant suites and print one line per suite.

    Returns:
        0 if every suite passes, 1 otherwise
    """
    results = SelfCheckService(seed=seed, samples=samples, tol=tol).run()
    for result in results:
        print(result.summary())
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILURE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qshi-teleport",
        description="Quantum teleportation between two QSHI rings",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    subparsers = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (("run", "run the protocol once"), ("sweep", "sweep one parameter")):
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("config", help="run configuration file")
        sub.add_argument("--out-dir", default=".", help="directory for report files")
        sub.add_argument("--seed", type=int, help="override the sampler seed")
        sub.add_argument("--mode", choices=Mode.values(), help="override the correction mode")
        sub.add_argument("--tol", type=float, help="override the constraint tolerance")
        sub.add_argument("--workers", type=int, help="override the sweep worker count")
        if name == "sweep":
            sub.add_argument("--xlsx", action="store_true", help="also write an Excel workbook")

    check = subparsers.add_parser("selfcheck", help="run the invariant suites")
    check.add_argument("--seed", type=int, default=DEFAULT_SEED, help="suite seed")
    check.add_argument("--tol", type=float, default=DEFAULT_TOL, help="strict error tolerance")
    check.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="samples per suite")
    return parser


def _fail(code: int, error: Exception) -> int:
    logger.error("%s: %s", type(error).__name__, error)
    print(f"error: {error}", file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main application entry point."""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    audit = get_audit_service()

    try:
        if args.command == "selfcheck":
            audit.log_run_started("selfcheck", "all")
            return cmd_selfcheck(args.seed, args.tol, args.samples)

        # Load config and apply overrides
        config = load_config(args.config)
        config = apply_overrides(config, seed=args.seed, mode=args.mode, tol=args.tol, workers=args.workers)
        stem = Path(args.config).stem
        audit.log_run_started(args.command, config.mode.value, str(args.config))

        if args.command == "run":
            return cmd_run(config, stem, args.out_dir)
        return cmd_sweep(config, stem, args.out_dir, xlsx=args.xlsx)

    except ParseError as e:
        return _fail(EXIT_PARSE, e)
    except (ValidationError, UnitarityError) as e:
        return _fail(EXIT_VALIDATION, e)
    except DegenerateStateError as e:
        return _fail(EXIT_DEGENERATE, e)
    except QshiError as e:
        return _fail(EXIT_FAILURE, e)
    except ValueError as e:
        return _fail(EXIT_FAILURE, e)


if __name__ == "__main__":
    sys.exit(main())
