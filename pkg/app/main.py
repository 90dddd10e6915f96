# ==================================================
# BOOTSTRAP
# ==================================================
import argparse
import logging
import sys
from pathlib import Path

ROOT_DIR = Path(__file__).resolve().parent.parent
if str(ROOT_DIR) not in sys.path:
    sys.path.insert(0, str(ROOT_DIR))

# ==================================================
# IMPORTS
# ==================================================
from app.config import LOG_LEVEL, OUTPUT_DIR_OVERRIDE, WORKERS  # noqa: E402
from app.errors import ConfigParseError, ConfigurationError, OutputError  # noqa: E402

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARSE_ERROR = 2
EXIT_INVARIANT = 3
EXIT_OUTPUT = 4


def _setup_logging() -> None:
    logging.basicConfig(
        level=getattr(logging, LOG_LEVEL, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m app.main",
        description="IRS-assisted OFDM ISAC experiments and validation suite.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run the experiment described by an INI config")
    run.add_argument("config", type=Path, help="path to the experiment INI file")
    run.add_argument("--output-dir", type=Path, default=None, help="directory for CSV/.meta/PNG output")
    run.add_argument("--plots", action="store_true", help="also render a PNG figure")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")

    validate = commands.add_parser("validate", help="run the cross-module oracle suite")
    validate.add_argument("--quick", action="store_true", help="smaller trial counts for a smoke run")

    return parser


# ==================================================
# VALIDATE
# ==================================================
def _validate(quick: bool, config=None) -> int:
    from app.experiments.validation import run_validation

    print(f"🔥 Validation suite ({'quick' if quick else 'full'})")
    results = run_validation(quick=quick, config=config)

    for result in results:
        mark = "✅ PASS" if result.passed else "❌ FAIL"
        print(f"{mark} {result.name}: {result.detail} ({result.seconds:.1f} s)")

    failed = [r for r in results if not r.passed]
    if failed:
        print(f"⚠️ {len(failed)} of {len(results)} checks failed")
        return EXIT_CHECK_FAILED

    print(f"✅ All {len(results)} checks passed")
    return EXIT_OK


# ==================================================
# RUN
# ==================================================
def _run(args) -> int:
    from app.experiments.experiment_config import load_experiment_config, with_overrides
    from app.experiments.experiment_runner import ExperimentRunner
    from app.sheets.result_sheet import ResultSheetManager

    try:
        config = load_experiment_config(args.config)
        output_dir = args.output_dir or OUTPUT_DIR_OVERRIDE
        config = with_overrides(config, output_dir=output_dir, seed=args.seed)
    except ConfigParseError as exc:
        location = f" (line {exc.line})" if exc.line else ""
        location += f" [{exc.key}]" if exc.key else ""
        print(f"❌ Config parse error{location}: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    except ConfigurationError as exc:
        print(f"❌ Invalid config [{exc.key or 'config'}]: {exc}", file=sys.stderr)
        return EXIT_INVARIANT

    if config.experiment == "validate":
        return _validate(quick=False, config=config)

    try:
        sheet_manager = ResultSheetManager(config.output_dir)
        ExperimentRunner(config, sheet_manager, workers=WORKERS).run(plots=args.plots)
    except OutputError as exc:
        print(f"❌ Output error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    except ConfigurationError as exc:
        print(f"❌ Invalid config [{exc.key or 'config'}]: {exc}", file=sys.stderr)
        return EXIT_INVARIANT

    return EXIT_OK


def main(argv=None) -> int:
    _setup_logging()
    args = _build_parser().parse_args(argv)

    if args.command == "validate":
        return _validate(quick=args.quick)
    return _run(args)


if __name__ == "__main__":
    raise SystemExit(main())
