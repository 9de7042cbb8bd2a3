"""
QSLab command line - speed limits and non-Markovianity of qubit dynamics.

Usage:
    python app.py <command> --config configs/<scenario>.yaml [--output out.csv]
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

# --------------------------------------------------
# Project setup
# --------------------------------------------------

project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from core import __version__  # noqa: E402
from core.exceptions import ConfigurationError, QSLabError  # noqa: E402
from core.orchestrator import LabOrchestrator  # noqa: E402
from utils.config_loader import COMMANDS, environment_defaults, load_config  # noqa: E402
from utils.csv_writer import render_csv, write_csv  # noqa: E402

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qslab",
        description="Quantum speed limits and BLP non-Markovianity for single-qubit master equations",
    )
    parser.add_argument("--version", action="version", version=f"qslab {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        sub = subparsers.add_parser(command, help=f"run a {command} scenario")
        sub.add_argument("--config", required=True, help="scenario YAML file")
        sub.add_argument("--output", help="CSV path (defaults to output_path in the config, else stdout)")
        sub.add_argument("--threads", type=int, help="worker threads (env QSLAB_THREADS)")
        sub.add_argument("--steps", type=int, help="integration steps per unit time")
        sub.add_argument("--log-level", help="logging level (env QSLAB_LOG_LEVEL)")
    return parser


def _print_summary(command: str, summary: dict) -> None:
    if command == "classify":
        label = summary["label"]
        print(f"class: {label.label}")
        print(f"branch: {label.branch:+d}")
        print(f"formula: {label.formula_id or 'none'}")
        if label.violation_time is not None:
            print(f"violation_time: {label.violation_time:.17g}")
        if label.ambiguous:
            print("note: g and h derivative signs are not coupled, no C refinement")
    elif command == "region-trajectory":
        for name, roots in summary.items():
            print(f"{name}: {', '.join(f'{r:.12g}' for r in roots) or '-'}")
    elif command == "state-scan":
        print(f"optimal a: {', '.join(f'{a:.6g}' for a in summary['optimal_set']) or '-'}")
    elif command == "blp":
        print(f"max_blp: {summary['max_blp']:.17g} ({summary['max_blp_pair']} pair)")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        env = environment_defaults()
    except ConfigurationError as exc:
        print(f"Configuration error: {exc}", file=sys.stderr)
        return exc.exit_code

    level = (args.log_level or env["log_level"]).upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO), stream=sys.stderr)

    try:
        overrides = {"command": args.command, "steps": args.steps, "threads": args.threads}
        config = load_config(args.config, overrides)
        if "threads" not in config.model_fields_set:
            config = config.model_copy(update={"threads": env["threads"]})
        result = LabOrchestrator(threads=config.threads).run(config)
    except QSLabError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code

    resolved = config.resolved()
    output = args.output or config.output_path
    if output:
        write_csv(result["table"], output, resolved)
        _print_summary(config.command, result["summary"])
    else:
        sys.stdout.write(render_csv(result["table"], resolved))
    return 0


if __name__ == "__main__":
    sys.exit(main())
