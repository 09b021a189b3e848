"""Batch driver: scenario in, JSON report (and optional CSV/figures) out.

Exit codes: 0 success, 2 precondition failure (bad scenario, rejected
generator), 1 internal error.  DICHOTOMY_THREADS caps the BLAS thread
pools; it must be honored before numpy loads, which is why this module
configures the environment at import time.
"""

import json
import os
import sys

_threads = os.environ.get("DICHOTOMY_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                 "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse
from pathlib import Path


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dichotomy",
        description="Bounded whole-line solves with certified norm bounds.")
    sub = parser.add_subparsers(dest="command", required=True)
    from .reports import COMMANDS
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True,
                         help="scenario JSON (path or literal)")
        cmd.add_argument("--out", default=None,
                         help="output directory for report/CSV/figures")
        cmd.add_argument("--csv", action="store_true",
                         help="emit sampled trajectories as CSV")
        cmd.add_argument("--figures", action="store_true",
                         help="render figures next to the outputs")
        cmd.add_argument("--seed", type=int, default=None,
                         help="override the scenario seed")
    return parser


def _error_payload(exc):
    return {"error": {"type": type(exc).__name__, "message": str(exc)}}


def run(argv=None) -> int:
    from .errors import NumericalError, PreconditionError
    from .figures import render_figures
    from .reports import run_command, write_csv
    from .scenario import parse_scenario

    args = build_parser().parse_args(argv)
    try:
        scenario = parse_scenario(args.config)
        if args.seed is not None:
            scenario.seed = int(args.seed)
        result = run_command(args.command, scenario)
    except PreconditionError as exc:
        json.dump(_error_payload(exc), sys.stdout, indent=2)
        sys.stdout.write("\n")
        return 2
    except NumericalError as exc:
        json.dump(_error_payload(exc), sys.stdout, indent=2)
        sys.stdout.write("\n")
        return 1

    artifacts = []
    if args.out is not None:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        if args.csv:
            for name, traj in result.trajectories.items():
                csv_name = f"{name}.csv"
                write_csv(outdir / csv_name, traj)
                artifacts.append(csv_name)
        if args.figures:
            artifacts.extend(render_figures(result, outdir))
        result.report["artifacts"] = sorted(artifacts)
        report_path = outdir / "report.json"
        report_path.write_text(
            json.dumps(result.report, indent=2, sort_keys=True) + "\n")
    json.dump(result.report, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
