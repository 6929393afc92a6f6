"""``greenbeam`` command line: solve, sweep, selftest, plotdata."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from ..sca import ProblemInfeasible, Scheme, SolverError
from .aggregate import aggregate, write_series
from .channels import gen_channel, trial_seed
from .config import ConfigError, parse_config
from .records import read_csv, write_csv, write_timing
from .selftest import run_checks
from .sweep import WORKERS_ENV, run_scheme, run_sweep


def _cmd_solve(args) -> int:
    exp = parse_config(args.config)
    value = args.value
    if exp.sweep_axis == "none":
        if value is not None:
            raise ConfigError("--value given but the config sweeps nothing")
    elif value is None:
        value = exp.sweep_values[0]
    elif exp.sweep_axis in ("n_users", "n_antennas"):
        value = int(value)
    cfg = exp.point(value)
    seed = exp.seed if args.seed is None else args.seed
    channel = gen_channel(trial_seed(seed, args.trial), cfg.n_users, cfg.n_antennas, exp.pathloss_scale)
    scheme = Scheme(args.scheme)
    try:
        res = run_scheme(channel, cfg, scheme, exp.sca)
    except ProblemInfeasible as exc:
        print(f"infeasible: {exc}")
        return 2
    b = res.breakdown
    t = res.w.antenna_powers()
    active = [int(n) for n in np.flatnonzero(t > cfg.on_threshold)]
    print(f"scheme       {scheme.value}")
    print(f"instance     N={cfg.n_antennas} K={cfg.n_users} seed={seed} trial={args.trial}")
    print(f"total_w      {b.total!r}")
    print(f"pa_w         {b.pa!r}")
    print(f"rf_w         {b.rf!r}")
    print(f"static_w     {b.static!r}")
    print(f"tx_w         {float(t.sum())!r}")
    print(f"active_set   {active}")
    print(f"sca_iters    {res.sca_iterations}")
    if res.degraded:
        print("note         a subproblem failed; the last accepted iterate is reported")
    return 0


def _cmd_sweep(args) -> int:
    exp = parse_config(args.config)
    output = Path(args.output) if args.output else exp.output
    if output is None:
        raise ConfigError("no output path: set experiment.output or pass --output")
    records = run_sweep(exp, workers=args.workers)
    output.parent.mkdir(parents=True, exist_ok=True)
    write_csv(records, output)
    if args.timing:
        write_timing(records, args.timing)
    counts = {}
    for r in records:
        counts[r.status] = counts.get(r.status, 0) + 1
    summary = ", ".join(f"{k} {v}" for k, v in sorted(counts.items()))
    print(f"wrote {len(records)} records to {output} ({summary})")
    return 0


def _cmd_selftest(args) -> int:
    results = run_checks()
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<26} {r.seconds:6.2f}s  {r.detail}")
    return 0 if all(r.passed for r in results) else 1


def _cmd_plotdata(args) -> int:
    points = aggregate(read_csv(args.input))
    write_series(points, args.output)
    print(f"wrote {len(points)} series points to {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="greenbeam", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log solver warnings")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve one instance and print its power breakdown")
    s.add_argument("--config", required=True, type=Path)
    s.add_argument("--seed", type=int, default=None, help="base seed (default: the config's)")
    s.add_argument("--trial", type=int, default=0)
    s.add_argument("--scheme", default=Scheme.JOINT_NONLINEAR.value,
                   choices=[m.value for m in Scheme])
    s.add_argument("--value", type=float, default=None,
                   help="sweep value to solve at (default: the first)")
    s.set_defaults(func=_cmd_solve)

    s = sub.add_parser("sweep", help="run a Monte Carlo sweep and write the trial CSV")
    s.add_argument("--config", required=True, type=Path)
    s.add_argument("--output", type=Path, default=None, help="overrides experiment.output")
    s.add_argument("--workers", type=int, default=None,
                   help=f"worker processes (default: ${WORKERS_ENV}, then the CPU count)")
    s.add_argument("--timing", type=Path, default=None, help="also write wall times here")
    s.set_defaults(func=_cmd_sweep)

    s = sub.add_parser("selftest", help="run the built-in oracle checks")
    s.set_defaults(func=_cmd_selftest)

    s = sub.add_parser("plotdata", help="mean and standard error per scheme and sweep value")
    s.add_argument("input", type=Path)
    s.add_argument("--output", required=True, type=Path)
    s.set_defaults(func=_cmd_plotdata)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
