"""Command-line entry point.

Subcommands:
  run <scenario|path>...   run presets or scenario files, emit CSV/JSON/state
  list-presets             names and one-line summaries of built-in presets
  dump-preset <name>       print a preset's JSON document
  stability-report         comb spacing and zero-loss photon numbers
  wigner <state.csv> <out> phase-space grid from a density-matrix snapshot

Exit codes: 0 success, 2 validation error, 3 leak-exceeded abort.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from .errors import LeakAbortError, ScenarioValidationError
from .fock import CavityParams
from .master import LossModel, stabilization_report
from .metrics import wigner_grid
from .scenarios import (
    PRESETS,
    PRESET_SUMMARIES,
    Scenario,
    load_scenario,
    preset_names,
    read_state_csv,
    run_scenario,
    write_state_csv,
    write_timeseries,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kerrcomb", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one or more scenarios")
    run.add_argument("scenarios", nargs="+", help="preset names or scenario JSON paths")
    run.add_argument("--out", default=".", help="output directory (default: cwd)")
    run.add_argument("--nmax", type=int, default=None, help="override the Fock cutoff")
    run.add_argument("--record-every", type=int, default=None, help="override the snapshot stride")
    run.add_argument("--model", choices=("exact_mzi", "eq1_update", "eq2_master"),
                     default=None, help="override the model")
    run.add_argument("--threads", type=int, default=1,
                     help="parallelism across scenarios (each scenario stays single-threaded)")

    sub.add_parser("list-presets", help="list built-in presets")

    dump = sub.add_parser("dump-preset", help="print a preset JSON document")
    dump.add_argument("name")

    stab = sub.add_parser("stability-report", help="comb spacing and zero-loss photon numbers")
    stab.add_argument("--omega-a", type=float, default=1.0)
    stab.add_argument("--beta", type=float, required=True)
    stab.add_argument("--chi", type=float, required=True)
    stab.add_argument("--tau-pi", type=float, required=True, help="tau as a multiple of pi")
    stab.add_argument("--n-range", type=int, default=40)

    wig = sub.add_parser("wigner", help="Wigner grid from a density-matrix snapshot CSV")
    wig.add_argument("state_csv")
    wig.add_argument("out_csv")
    wig.add_argument("--xmin", type=float, default=-6.0)
    wig.add_argument("--xmax", type=float, default=6.0)
    wig.add_argument("--pmin", type=float, default=-6.0)
    wig.add_argument("--pmax", type=float, default=6.0)
    wig.add_argument("--resolution", type=int, default=101)
    return parser


def _apply_overrides(scenario: Scenario, args) -> Scenario:
    doc = scenario.as_dict()
    if args.nmax is not None:
        doc["space"]["n_max"] = args.nmax
    if args.record_every is not None:
        doc["record_every"] = args.record_every
    if args.model is not None:
        doc["model"] = args.model
    from .scenarios import scenario_from_dict
    return scenario_from_dict(doc, where=f"scenario '{scenario.name}' with overrides")


def _run_one(scenario: Scenario, out_dir: str) -> str:
    record = run_scenario(scenario)
    csv_path = os.path.join(out_dir, f"{scenario.name}.csv")
    write_timeseries(record, csv_path)
    write_state_csv(record.final_state, os.path.join(out_dir, f"{scenario.name}_state.csv"))
    return csv_path


def _cmd_run(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    scenarios = [_apply_overrides(load_scenario(name), args) for name in args.scenarios]
    if args.threads > 1 and len(scenarios) > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            paths = list(pool.map(lambda s: _run_one(s, args.out), scenarios))
    else:
        paths = [_run_one(s, args.out) for s in scenarios]
    for path in paths:
        print(path)
    return 0


def _cmd_list_presets() -> int:
    for name in preset_names():
        print(f"{name:20s} {PRESET_SUMMARIES.get(name, '')}")
    return 0


def _cmd_dump_preset(args) -> int:
    if args.name not in PRESETS:
        raise ScenarioValidationError(
            f"unknown preset '{args.name}'; available: {', '.join(preset_names())}")
    print(json.dumps(PRESETS[args.name], indent=2, sort_keys=True))
    return 0


def _cmd_stability_report(args) -> int:
    model = LossModel(CavityParams(args.omega_a, args.beta), args.chi, args.tau_pi * math.pi)
    report = stabilization_report(model, args.n_range)
    print(f"delta_n = {report.delta_n:.9g}")
    print(f"integer comb: {report.is_integer_comb}")
    if report.n0_solutions:
        print("zero-loss photon numbers (n0, m):")
        for n0, m in report.n0_solutions:
            print(f"  n0 = {n0:3d}  m = {m}")
    else:
        print("no zero-loss photon numbers in range")
    return 0


def _cmd_wigner(args) -> int:
    rho = read_state_csv(args.state_csv)
    grid, xs, ps = wigner_grid(rho, (args.xmin, args.xmax), (args.pmin, args.pmax),
                               args.resolution)
    lines = ["x,p,w"]
    for ip, p in enumerate(ps):
        for ix, x in enumerate(xs):
            lines.append(f"{x:.9e},{p:.9e},{grid[ip, ix]:.9e}")
    with open(args.out_csv, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    print(args.out_csv)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "list-presets":
            return _cmd_list_presets()
        if args.command == "dump-preset":
            return _cmd_dump_preset(args)
        if args.command == "stability-report":
            return _cmd_stability_report(args)
        if args.command == "wigner":
            return _cmd_wigner(args)
        raise ScenarioValidationError(f"unknown command {args.command}")
    except ScenarioValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LeakAbortError as exc:
        print(f"leak abort: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
