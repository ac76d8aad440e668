"""Command-line entry point.

Exit codes: 0 success, 2 validation error (bad scenario/map/parameters),
3 simulation divergence (non-finite state or an estimator collapse).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import traceio
from .errors import (
    GeometryError,
    InvariantError,
    NonFinite,
    NotStabilizable,
    OutOfRoute,
    PipeNavError,
    SchemaError,
    SimulationDiverged,
)
from .scenario import load_scenario
from .simulate import monte_carlo, replicate_fig3, run_scenario, summary_to_dict

_VALIDATION_ERRORS = (SchemaError, InvariantError, GeometryError, OutOfRoute,
                      NotStabilizable)
_DIVERGENCE_ERRORS = (SimulationDiverged, NonFinite)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pipenav",
        description="In-pipe robot navigation simulator: two-phase attitude/"
                    "speed control with sonar + particle-filter route localization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one scenario and write trace/summary")
    p_sim.add_argument("--scenario", required=True, help="scenario JSON file")
    p_sim.add_argument("--out-trace", default=None, help="trace CSV output path")
    p_sim.add_argument("--out-summary", default=None, help="summary JSON output path")
    p_sim.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")

    p_fig = sub.add_parser("fig3", help="straight-pipe stabilization run with plots")
    p_fig.add_argument("--scenario", required=True, help="scenario JSON file")
    p_fig.add_argument("--out-dir", required=True, help="output directory")
    p_fig.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")

    p_mc = sub.add_parser("mc", help="seeded Monte Carlo batch over one scenario")
    p_mc.add_argument("--scenario", required=True, help="scenario JSON file")
    p_mc.add_argument("--trials", type=int, required=True, help="number of runs")
    p_mc.add_argument("--seed-base", type=int, required=True,
                      help="seed of the first run; run i uses seed-base + i")
    p_mc.add_argument("--out", required=True, help="aggregate report JSON path")

    p_plot = sub.add_parser("plot", help="render the figure set from a saved trace")
    p_plot.add_argument("--trace", required=True, help="trace CSV file")
    p_plot.add_argument("--out-dir", required=True, help="output directory")

    return parser


def _cmd_simulate(args) -> int:
    scn = load_scenario(args.scenario)
    if args.seed is not None:
        scn = replace(scn, seed=args.seed)
    records, summary = run_scenario(scn)
    if args.out_trace:
        traceio.write_trace(records, args.out_trace)
    if args.out_summary:
        traceio.write_summary(summary, args.out_summary)
    print(f"simulated {summary.ticks} ticks (seed {scn.seed}); "
          f"final mode {summary.final_mode}; "
          f"junctions completed {summary.junctions_completed}; "
          f"localization error {summary.pf_final_error_m:.4f} m")
    return 0


def _cmd_fig3(args) -> int:
    scn = load_scenario(args.scenario)
    if args.seed is not None:
        scn = replace(scn, seed=args.seed)
    summary = replicate_fig3(scn, out_dir=args.out_dir)
    settled = "never" if summary.settled_s is None else f"{summary.settled_s:.3f} s"
    print(f"stabilization run finished: settled in {settled}; "
          f"steady-state velocity {summary.v_ss_mps:.4f} m/s; "
          f"outputs in {args.out_dir}")
    return 0


def _cmd_mc(args) -> int:
    scn = load_scenario(args.scenario)
    report = monte_carlo(scn, trials=args.trials, seed_base=args.seed_base)
    Path(args.out).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    print(f"{report['completed']}/{report['trials']} runs completed; "
          f"report written to {args.out}")
    return 0


def _cmd_plot(args) -> int:
    records = traceio.read_trace(args.trace)
    written = traceio.emit_plots(records, args.out_dir)
    print(f"wrote {len(written)} figures to {args.out_dir}")
    return 0


_HANDLERS = {
    "simulate": _cmd_simulate,
    "fig3": _cmd_fig3,
    "mc": _cmd_mc,
    "plot": _cmd_plot,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except _DIVERGENCE_ERRORS as exc:
        print(f"error: simulation diverged: {exc}", file=sys.stderr)
        return 3
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PipeNavError as exc:  # estimator collapse or other runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
