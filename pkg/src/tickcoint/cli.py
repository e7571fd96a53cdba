"""Command-line entry point.

Exit codes: 0 on success, 1 on usage or validation errors, 2 on runtime failures.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import io as tio
from .config import load_config
from .errors import (
    ConsistencyError,
    DegenerateInputError,
    ExperimentError,
    InputError,
    ParameterError,
    ResourceError,
    ValidationError,
)
from .estimators import EstimateReport, ctaper_theta, ols_theta, spurious_delta, taper_theta
from .limitlab import distribution_experiment, levels_experiment, rate_experiment, resolve_workers, sample_functional
from .market import StepPath, sample_at, sigma_levels, simulate


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _global_flags(p, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="run configuration file")
    p.add_argument("--seed", type=int, default=d, help="master seed")
    p.add_argument("--workers", type=int, default=d, help="worker processes (default $TICKCOINT_WORKERS or 1)")
    p.add_argument("--out", default=d, help="output directory (default: [output] dir)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tickcoint", description="Transaction-level cointegration simulator and Monte Carlo lab")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sim = sub.add_parser("simulate", help="simulate one path pair and dump paths, events and durations")
    est = sub.add_parser("estimate", help="estimate theta from a path or tick CSV")
    est.add_argument("--input", required=True, help="path CSV (time,y1,y2) or tick CSV (asset,time,logprice)")
    est.add_argument("--estimator", choices=("ols", "taper", "ctaper", "spurious"), default=None)
    est.add_argument("--assets", default=None, help="two tick asset ids, comma separated (default: first two seen)")
    rate = sub.add_parser("mc-rate", help="convergence-rate experiment")
    dist = sub.add_parser("mc-dist", help="limit-distribution experiment")
    lev = sub.add_parser("mc-levels", help="levels covariance experiment")
    ref = sub.add_parser("reference", help="draw reference samples of a limit functional")
    for p in (sim, est, rate, dist, lev, ref):
        _global_flags(p, suppress=True)
    return parser


def _out_dir(args, cfg) -> str:
    return args.out if args.out is not None else cfg.get("output", "dir")


def _seed(args) -> int:
    return 0 if args.seed is None else args.seed


def cmd_simulate(args, cfg) -> None:
    market = cfg.market()
    out = _out_dir(args, cfg)
    sim = simulate(market, _seed(args))
    dt = cfg.get("estimator", "dt")
    grid = dt * np.arange(0, int(math.floor(market.horizon / dt + 1e-9)) + 1)
    paths = zip(grid, sample_at(sim.y1, grid), sample_at(sim.y2, grid))
    tio.write_csv(os.path.join(out, "path.csv"), tio.PATH_FIELDS, paths)
    events, durations, clock = [], [], []
    for i, a in ((1, sim.asset1), (2, sim.asset2)):
        n = a.clock.count(market.horizon)
        for k in range(n):
            events.append((i, k + 1, a.clock.times[k], a.efficient[k], a.eta[k]))
            clock.append((i, k + 1, a.clock.times[k]))
        durations.extend((i, k + 1, a.durations[k]) for k in range(n))
    tio.write_csv(os.path.join(out, "events.csv"), tio.EVENT_FIELDS, events)
    tio.write_csv(os.path.join(out, "durations.csv"), tio.DURATION_FIELDS, durations)
    tio.write_csv(os.path.join(out, "clock.csv"), tio.CLOCK_FIELDS, clock)


def _read_input(path, assets):
    """Return (paths or None, samples or None) from a path or tick CSV."""
    with open(path, newline="") as fh:
        header = fh.readline().strip().split(",")
        fh.seek(0)
        if tuple(header) == tio.PATH_FIELDS:
            rows = tio.read_csv(fh, tio.PATH_FIELDS)
            if not rows:
                raise InputError("path file holds no rows")
            t = np.array([float(r["time"]) for r in rows])
            y1 = np.array([float(r["y1"]) for r in rows])
            y2 = np.array([float(r["y2"]) for r in rows])
            keep = t > 0  # y(0) = 0 is not an observation
            horizon = float(t[-1])
            p1 = StepPath(t, y1, 0.0, horizon)
            p2 = StepPath(t, y2, 0.0, horizon)
            return (p1, p2), (y1[keep], y2[keep])
        if tuple(header) == tio.TICK_FIELDS:
            ticks = tio.ingest_ticks(fh)
            ids = list(ticks.paths) if assets is None else [a.strip() for a in assets.split(",")]
            if len(ids) < 2 or any(a not in ticks.paths for a in ids[:2]):
                raise InputError(f"need two assets; found {sorted(ticks.paths)}")
            paths = ticks.normalised()
            p1, p2 = paths[ids[0]], paths[ids[1]]
            horizon = min(p1.horizon, p2.horizon)
            p1 = StepPath(p1.times, p1.values, 0.0, horizon)
            p2 = StepPath(p2.times, p2.values, 0.0, horizon)
            return (p1, p2), None
    raise InputError(f"unrecognised header {','.join(header)}")


def cmd_estimate(args, cfg) -> None:
    name = args.estimator or cfg.get("estimator", "name")
    taper = cfg.taper()
    dt, delta = cfg.get("estimator", "dt"), cfg.get("estimator", "delta")
    (p1, p2), samples = _read_input(args.input, args.assets)
    if name == "ctaper":
        theta = ctaper_theta(p1, p2, delta, taper)
        report = EstimateReport("ctaper", theta, int(math.floor(p1.horizon / delta + 1e-9)), taper.m, delta, None)
    else:
        if samples is None:
            grid = dt * np.arange(1, int(math.floor(p1.horizon / dt + 1e-9)) + 1)
            samples = (sample_at(p1, grid), sample_at(p2, grid))
        s1, s2 = samples
        if name == "taper":
            report = EstimateReport("taper", taper_theta(s1, s2, taper), s1.size, taper.m, None, dt)
        elif name in ("ols", "spurious"):
            f = ols_theta if name == "ols" else spurious_delta
            report = EstimateReport(name, f(s1, s2), s1.size, None, None, dt)
        else:
            raise ValidationError(f"estimator {name!r} cannot be run on data")
    out = _out_dir(args, cfg)
    tio.write_csv(os.path.join(out, "estimate.csv"), tio.ESTIMATE_FIELDS, [report.as_row()])


def cmd_mc_rate(args, cfg) -> None:
    x = cfg.values["experiment"]
    report = rate_experiment(cfg.experiment(), x["n_grid"], x["reps"], _seed(args), args.workers)
    out = _out_dir(args, cfg)
    report.write_csv(os.path.join(out, "replications.csv"), os.path.join(out, "summary.csv"))


def _functional_for(cfg):
    kind = cfg.get("experiment", "functional")
    sigma = sigma_levels(cfg.market()) if kind in ("spurious", "levels") else None
    return cfg.functional(sigma)


def cmd_mc_dist(args, cfg) -> None:
    x = cfg.values["experiment"]
    report = distribution_experiment(
        cfg.experiment(),
        x["n"],
        x["reps"],
        _functional_for(cfg),
        _seed(args),
        x["reference_count"],
        x["grid"],
        args.workers,
    )
    out = _out_dir(args, cfg)
    report.write_csv(os.path.join(out, "replications.csv"), os.path.join(out, "summary.csv"))


def cmd_mc_levels(args, cfg) -> None:
    x = cfg.values["experiment"]
    report = levels_experiment(cfg.market(), x["n_grid"], x["reps"], _seed(args))
    rows = []
    for s in report.extra["statistics"]:
        for i, j in ((0, 0), (0, 1), (1, 1)):
            rows.append((s.n, f"{i + 1}{j + 1}", s.empirical[i, j], s.theoretical[i, j], s.relative_error[i, j]))
    tio.write_csv(os.path.join(_out_dir(args, cfg), "levels.csv"), tio.LEVELS_FIELDS, rows)


def cmd_reference(args, cfg) -> None:
    x = cfg.values["experiment"]
    f = _functional_for(cfg)
    draws = sample_functional(f, x["grid"], x["reference_count"], _seed(args))
    path = os.path.join(_out_dir(args, cfg), "reference.csv")
    if draws.ndim == 2:
        tio.write_csv(path, ("k", "b1", "b2"), ((k, a, b) for k, (a, b) in enumerate(draws)))
    else:
        tio.write_csv(path, ("k", "value"), enumerate(draws))


HANDLERS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "mc-rate": cmd_mc_rate,
    "mc-dist": cmd_mc_dist,
    "mc-levels": cmd_mc_levels,
    "reference": cmd_reference,
}


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(str(exc))
        return 1
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 1
    if args.command is None:
        sys.stderr.write(parser.format_usage())
        return 1
    try:
        args.workers = resolve_workers(args.workers)
        cfg = load_config(args.config)
        HANDLERS[args.command](args, cfg)
    except (ValidationError, InputError, ParameterError, DegenerateInputError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except (ResourceError, ExperimentError, ConsistencyError, OSError, ArithmeticError) as exc:
        sys.stderr.write(f"runtime failure: {exc}\n")
        return 2
    except Exception as exc:  # noqa: BLE001 - any other failure is a runtime failure
        sys.stderr.write(f"runtime failure: {type(exc).__name__}: {exc}\n")
        return 2
    return 0


def main() -> None:
    sys.exit(run_command())
