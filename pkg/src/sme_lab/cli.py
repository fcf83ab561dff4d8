"""Command-line interface: simulate, estimate, xi, bounds, experiment, calibrate.

Exit codes: 0 success, 2 configuration/usage error, 3 numeric failure
(empty membership set or simulation blow-up), with the failing (seed, t)
printed for experiment runs.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from sme_lab.experiment import (
    ConfigError,
    load_config,
    run_experiment,
    run_single_seed,
    summarize_csv,
    write_records,
)
from sme_lab.geometry import GeometryError, default_shs_catalog, support_from_config
from sme_lab.lti import PureNoise, SimulationBlowUp, simulate
from sme_lab.theory import RateModel, TheoryParams, calibrate_rates, compute_xi, theorem1_bound, theorem2_bound

_LOG_LEVELS = ("quiet", "info", "debug")


def _log(level, threshold, *msg):
    if _LOG_LEVELS.index(level) >= _LOG_LEVELS.index(threshold):
        print(*msg)


def _support_from_arg(arg, dim):
    """Accept a shortcut name (box, l1ball, l2ball, polygonK) or a JSON block/path."""
    if arg.startswith("{"):
        return support_from_config(json.loads(arg), dim=dim)
    if arg.endswith(".json"):
        with open(arg) as fh:
            return support_from_config(json.load(fh), dim=dim)
    if arg == "box":
        return support_from_config({"kind": "box", "a": [1.0] * dim})
    if arg == "l1ball":
        return support_from_config({"kind": "l1ball", "a": [1.0] * dim})
    if arg == "l2ball":
        return support_from_config({"kind": "l2ball", "r": 1.0, "dim": dim})
    if arg.startswith("polygon"):
        return support_from_config({"kind": "polygon", "k": int(arg[len("polygon") :]), "r": 1.0})
    raise GeometryError(f"unknown support shortcut {arg!r}")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="sme-lab",
        description="Set-membership identification lab: simulation, set estimation, bound evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="simulate one trajectory and export it to CSV")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", required=True)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--log-level", choices=_LOG_LEVELS, default="info")

    p_est = sub.add_parser("estimate", help="run set + least-squares estimation for one seed")
    p_est.add_argument("--config", required=True)
    p_est.add_argument("--seed-index", type=int, default=0)
    p_est.add_argument("--out", default=None, help="optional CSV of the records")
    p_est.add_argument("--log-level", choices=_LOG_LEVELS, default="info")

    p_xi = sub.add_parser("xi", help="projection constant of a support's half-space catalog")
    p_xi.add_argument("--support", required=True, help="box|l1ball|l2ball|polygonK|JSON|file.json")
    p_xi.add_argument("--dim", type=int, default=2)
    p_xi.add_argument("--digits", type=int, default=5)
    p_xi.add_argument("--seed", type=int, default=0)

    p_bounds = sub.add_parser("bounds", help="tabulate diameter-tail bounds over a window grid")
    p_bounds.add_argument("--b-z", type=float, required=True)
    p_bounds.add_argument("--sigma-z", type=float, required=True)
    p_bounds.add_argument("--p-z", type=float, required=True)
    p_bounds.add_argument("--T", type=int, required=True)
    p_bounds.add_argument("--delta", type=float, required=True)
    p_bounds.add_argument("--n-x", type=int, required=True)
    p_bounds.add_argument("--n-u", type=int, required=True)
    p_bounds.add_argument("--exponent", type=float, required=True, help="visiting-rate exponent p")
    p_bounds.add_argument("--prefactor", type=float, default=1.0)
    p_bounds.add_argument("--xi", type=float, default=None, help="evaluate the slice-rate bound at this xi")
    p_bounds.add_argument("--m-grid", type=int, nargs="*", default=None)
    p_bounds.add_argument("--out", default=None, help="optional CSV path")

    p_exp = sub.add_parser("experiment", help="run a config end to end and append CSV rows")
    p_exp.add_argument("--config", required=True)
    p_exp.add_argument("--out", default=None, help="override the config's output path")
    p_exp.add_argument("--seeds", type=int, default=None, help="override n_seeds")
    p_exp.add_argument("--parallel", type=int, default=None)
    p_exp.add_argument("--log-level", choices=_LOG_LEVELS, default="info")

    p_sum = sub.add_parser("summarize", help="mean/std/slope summary of an experiment CSV")
    p_sum.add_argument("--csv", required=True)
    p_sum.add_argument("--out", required=True)

    p_cal = sub.add_parser("calibrate", help="Monte-Carlo boundary-rate prefactors, cached as JSON")
    p_cal.add_argument("--config", required=True)
    p_cal.add_argument("--out", required=True)
    p_cal.add_argument("--n-mc", type=int, default=200_000)
    p_cal.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_simulate(args):
    config = load_config(args.config)
    seed = args.seed if args.seed is not None else config.base_seed
    from sme_lab.experiment import _input_distribution

    traj = simulate(
        config.system, PureNoise(_input_distribution(config)), config.noise,
        config.T, x0=config.x0, seed=seed,
    )
    traj.to_csv(args.out)
    _log("info", args.log_level, f"wrote {traj.T} steps to {args.out}")
    return 0


def _cmd_estimate(args):
    config = load_config(args.config)
    records, failures = run_single_seed(config, args.seed_index)
    for rec in records:
        print(",".join(rec.row()))
    if args.out:
        write_records(records, args.out)
    for f in failures:
        print(f"FAILURE seed={f.seed} t={f.t} [{f.estimator}]: {f.message}", file=sys.stderr)
    return 3 if failures else 0


def _cmd_xi(args):
    support = _support_from_arg(args.support, args.dim)
    catalog = default_shs_catalog(support)
    xi = compute_xi(catalog, seed=args.seed)
    print(f"{xi:.{args.digits}f}")
    return 0


def _cmd_bounds(args):
    n_z = args.n_x + args.n_u
    if args.m_grid:
        m_grid = args.m_grid
    else:
        m_grid = sorted({int(round(m)) for m in np.geomspace(1, max(args.T - 1, 1), 12)})
    rate = RateModel(args.exponent, args.prefactor)
    lines = [("m", "term_pe", "term_tail", "total")]
    for m in m_grid:
        if not 1 <= m < args.T:
            continue
        params = TheoryParams(args.b_z, args.sigma_z, args.p_z, m, args.T, args.delta, args.n_x, n_z)
        if args.xi is None:
            b = theorem1_bound(params, rate)
        else:
            b = theorem2_bound(params, rate, args.xi)
        lines.append((str(m), f"{b.term_pe:.9g}", f"{b.term_tail:.9g}", f"{b.total:.9g}"))
    widths = [max(len(row[i]) for row in lines) for i in range(4)]
    for row in lines:
        print("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
    print("# values are shape-only: universal constants and polylog factors set to 1")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(",".join(lines[0]) + "\n")
            for row in lines[1:]:
                fh.write(",".join(row) + "\n")
    return 0


def _cmd_experiment(args):
    config = load_config(args.config)
    if args.seeds is not None:
        if args.seeds < 1:
            raise ConfigError("--seeds must be >= 1")
        config.n_seeds = args.seeds
    out = args.out or config.out
    if not out:
        raise ConfigError("no output path: set 'out' in the config or pass --out")
    records, failures = run_experiment(config, parallel=args.parallel)
    write_records(records, out)
    _log("info", args.log_level, f"wrote {len(records)} rows to {out}")
    for f in failures:
        print(f"FAILURE seed={f.seed} t={f.t} [{f.estimator}]: {f.message}", file=sys.stderr)
    return 3 if failures else 0


def _cmd_summarize(args):
    summarize_csv(args.csv, args.out)
    return 0


def _cmd_calibrate(args):
    config = load_config(args.config)
    cal = calibrate_rates(config.noise, n_mc=args.n_mc, seed=args.seed)
    payload = {
        "qw": {"p": cal["qw"].p, "prefactor": cal["qw"].prefactor},
        "pw": {"p": cal["pw"].p, "prefactor": cal["pw"].prefactor},
        "slice_fit_slope": cal["slice_fit"].slope,
        "ball_fit_slope": cal["ball_fit"].slope,
    }
    with open(args.out, "w") as fh:
        json.dump(payload, fh, indent=2)
    print(json.dumps(payload, indent=2))
    return 0


_HANDLERS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "xi": _cmd_xi,
    "bounds": _cmd_bounds,
    "experiment": _cmd_experiment,
    "summarize": _cmd_summarize,
    "calibrate": _cmd_calibrate,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 2
    try:
        return _HANDLERS[args.command](args)
    except (ConfigError, GeometryError, ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SimulationBlowUp as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
