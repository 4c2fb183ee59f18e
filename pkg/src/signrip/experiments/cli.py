"""Command-line interface.

    signrip run <scenario.yaml> [--seed N] [--threads N] [--out DIR] [--trace]
    signrip canned <name> [--override key=value ...] [common flags]
    signrip canned --list
    signrip plot <results.csv> --kind line|heatmap [--out DIR]
    signrip rip --kind sign|l2|l1l2|qdev --d D --m M [estimator flags]

Output directory precedence: --out, then $SIGNRIP_OUT, then the
scenario's own `output` field, then the current directory.  Exit codes:
0 success, 1 validation error (bad flags or config), 2 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from ..model import NOISE_DISTS, NoiseSpec, gen_ensemble, gen_noise
from ..rip import RipEstimate, estimate_l1l2_rip, estimate_l2_rip, estimate_sign_rip, q_deviation_l2
from .plots import emit_plots
from .presets import canned, preset_names
from .runner import ResultTable, run_scenario
from .scenario import ScenarioError, load_scenario

OUTPUT_ENV = "SIGNRIP_OUT"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the contract wants 1 for validation
    def error(self, message):
        raise _UsageError(message)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="override the scenario base seed")
    p.add_argument("--threads", type=int, default=1, help="process-pool width for grid cells")
    p.add_argument("--out", default=None, help=f"output directory (default ${OUTPUT_ENV} or cwd)")
    p.add_argument("--trace", action="store_true", help="write per-iteration trace CSVs")


def _build_parser() -> _Parser:
    parser = _Parser(prog="signrip", description="robust low-rank recovery experiment harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario file")
    p_run.add_argument("scenario", help="path to a scenario YAML file")
    _add_common(p_run)

    p_canned = sub.add_parser("canned", help="run a named preset")
    p_canned.add_argument("name", nargs="?", help="preset name (see --list)")
    p_canned.add_argument("--list", action="store_true", help="list preset names and exit")
    p_canned.add_argument(
        "--override", action="append", default=[], metavar="KEY=VALUE",
        help="override a scenario field (dotted paths, repeatable)",
    )
    _add_common(p_canned)

    p_plot = sub.add_parser("plot", help="plot a results CSV")
    p_plot.add_argument("csv", help="results or trace CSV file")
    p_plot.add_argument("--kind", choices=("line", "heatmap"), required=True)
    p_plot.add_argument("--out", default=None)

    p_rip = sub.add_parser("rip", help="run one RIP estimate or deviation probe")
    p_rip.add_argument("--kind", choices=("sign", "l2", "l1l2", "qdev"), required=True)
    p_rip.add_argument("--d", type=int, required=True)
    p_rip.add_argument("--m", type=int, required=True)
    p_rip.add_argument("--r", type=int, default=1, help="probe rank budget")
    p_rip.add_argument("--p", type=float, default=0.0, help="corrupted fraction")
    p_rip.add_argument("--dist", choices=NOISE_DISTS, default="gaussian")
    p_rip.add_argument("--scale", type=float, default=1.0)
    p_rip.add_argument("--n-samples", type=int, default=200)
    p_rip.add_argument("--variant", choices=("goe", "iid"), default="goe")
    p_rip.add_argument("--seed", type=int, default=0)
    p_rip.add_argument("--out", default=None, help="append the CSV row to <out>/rip.csv")

    return parser


def _out_dir(flag_value, scenario_output=None) -> str:
    return flag_value or os.environ.get(OUTPUT_ENV) or scenario_output or "."


def _cmd_run_scenario(scenario, args) -> int:
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, base_seed=args.seed)
    out = _out_dir(args.out, scenario.output)
    table = run_scenario(scenario, out_dir=out, threads=args.threads, trace=args.trace or None)
    failed = sum(1 for r in table.rows if str(r.get("status", "ok")) != "ok")
    print(f"{scenario.name}: {len(table.rows)} rows -> {out} ({failed} failed)")
    return 0 if failed == 0 else 2


def _cmd_rip(args) -> int:
    ensemble = gen_ensemble(args.d, args.m, seed=args.seed, variant=args.variant)
    noise = gen_noise(args.m, NoiseSpec(p=args.p, dist=args.dist, scale=args.scale, seed=args.seed + 1))
    if args.kind == "qdev":
        dev = q_deviation_l2(ensemble, noise, args.n_samples, seed=args.seed + 2)
        header = "d,m,p,sigma,n_samples,deviation,noise_only"
        row = (
            f"{args.d},{args.m},{args.p:.10g},{args.scale:.10g},{args.n_samples},"
            f"{dev.deviation:.12g},{dev.noise_only:.12g}"
        )
    else:
        if args.kind == "sign":
            est = estimate_sign_rip(ensemble, noise, args.r, args.n_samples, seed=args.seed + 2)
        elif args.kind == "l2":
            est = estimate_l2_rip(ensemble, args.r, args.n_samples, seed=args.seed + 2)
        else:
            est = estimate_l1l2_rip(ensemble, args.r, args.n_samples, seed=args.seed + 2)
        header, row = RipEstimate.CSV_HEADER, est.to_csv_row()
    print(header)
    print(row)
    if args.out or os.environ.get(OUTPUT_ENV):
        out = _out_dir(args.out)
        os.makedirs(out, exist_ok=True)
        path = os.path.join(out, "rip.csv")
        fresh = not os.path.exists(path)
        with open(path, "a") as fh:
            if fresh:
                fh.write(header + "\n")
            fh.write(row + "\n")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            return _cmd_run_scenario(load_scenario(args.scenario), args)
        if args.command == "canned":
            if args.list:
                print("\n".join(preset_names()))
                return 0
            if not args.name:
                raise _UsageError("canned: preset name required (or --list)")
            return _cmd_run_scenario(canned(args.name, args.override), args)
        if args.command == "plot":
            table = ResultTable.from_csv(args.csv)
            written = emit_plots(table, args.kind, _out_dir(args.out))
            for path in written:
                print(path)
            return 0
        if args.command == "rip":
            return _cmd_rip(args)
        raise _UsageError(f"unknown command {args.command!r}")
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ScenarioError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - runtime failure contract
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
