"""Command-line front end.

Exit codes: 0 success, 1 runtime failure, 2 bad input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis
from .model import ConfigParseError, ModelError, PreemptionPolicy, load_config
from .opt import InfeasibleBox, iteration_bound_terms, iteration_upper_bound, optimize
from .sim import SimConfig, occupancy_check, simulate, simulate_reduced
from .sim.engine import CSV_HEADER, InvalidHorizon
from .sweep import (
    PRESETS,
    InvalidSweepParameter,
    gnuplot_script,
    load_spec,
    preset,
    rows_to_csv,
    run_sweep,
    sim_from_dict,
)

log = logging.getLogger("aoipreempt")


class InputError(Exception):
    pass


def _emit(text: str, out: str | None) -> None:
    if out and out != "-":
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _policy(args, config, policy):
    if getattr(args, "preemption", None):
        try:
            vals = [float(x) for x in args.preemption.split(",")]
        except ValueError:
            raise InputError("--preemption expects comma-separated numbers") from None
        if len(vals) == 1:
            vals = vals * config.n_sensors
        policy = PreemptionPolicy(np.array(vals))
    if policy is None:
        raise InputError("no preemption vector: add \"preemption\" to the config or pass --preemption")
    if len(policy) != config.n_sensors:
        raise InputError(f"preemption vector needs {config.n_sensors} entries")
    return policy


def cmd_analyze(args) -> int:
    config, policy, _ = load_config(args.config)
    policy = _policy(args, config, policy)
    rep = analysis.aoi_sum(config, policy)
    doc = {
        "per_process": rep.per_process.tolist(),
        "total": rep.total,
        "stationary": [
            analysis.stationary_distribution(config, policy, j).as_array().tolist()
            for j in range(config.n_processes)
        ],
        "preemption": policy.probs.tolist(),
    }
    _emit(_json(doc), args.out)
    return 0


def _sim_config(args, doc) -> SimConfig:
    sim = sim_from_dict(doc.get("sim", {}), SimConfig(horizon=1e6, replications=10))
    over = {}
    if args.horizon is not None:
        over["horizon"] = args.horizon
        if args.warmup is None and "warmup" not in doc.get("sim", {}):
            over["warmup"] = 0.01 * args.horizon
    if args.warmup is not None:
        over["warmup"] = args.warmup
    if args.seed is not None:
        over["seed"] = args.seed
    if args.reps is not None:
        over["replications"] = args.reps
    if over:
        kw = dict(horizon=sim.horizon, warmup=sim.warmup, seed=sim.seed, replications=sim.replications)
        kw.update(over)
        sim = SimConfig(**kw)
    return sim


def cmd_simulate(args) -> int:
    config, policy, doc = load_config(args.config, extra_keys=frozenset({"sim"}))
    policy = _policy(args, config, policy)
    sim = _sim_config(args, doc)
    if args.reduced is not None:
        res = simulate_reduced(config, policy, args.reduced, sim, jobs=args.jobs)
        procs = [args.reduced]
    else:
        res = simulate(config, policy, sim, jobs=args.jobs)
        procs = list(range(config.n_processes))
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r, j, *vals in res.csv_rows():
            w.writerow([r, procs[j], *(repr(v) for v in vals)])
        _emit(buf.getvalue(), args.out)
        return 0
    out = res.to_dict()
    out["processes"] = procs
    out["theory"] = [analysis.aoi_process(config, policy, j) for j in procs]
    out["occupancy_check"] = [
        occupancy_check(res, config, policy, j)["max_abs_deviation"] for j in procs
    ]
    out["sim"] = {"horizon": sim.horizon, "warmup": sim.warmup, "seed": sim.seed, "replications": sim.replications}
    _emit(_json(out), args.out)
    return 0


def cmd_optimize(args) -> int:
    config, _, _ = load_config(args.config)
    res = optimize(config, args.epsilon, max_iterations=args.max_iter, shrink=args.shrink)
    _emit(_json(res.to_dict()), args.out)
    return 0 if res.certified else 1


def cmd_bound(args) -> int:
    config, _, _ = load_config(args.config)
    terms = iteration_bound_terms(config)
    doc = {
        "theorem2_bound": iteration_upper_bound(config, args.epsilon),
        "epsilon": args.epsilon,
        "min_informative_rate": terms.min_informative,
        "delta": terms.delta,
        "delta_upper": terms.delta_upper,
        "tau": terms.tau,
    }
    _emit(_json(doc), args.out)
    return 0


def cmd_sweep(args) -> int:
    spec = preset(args.preset) if args.preset else load_spec(args.spec)
    sim = spec.sim
    if args.horizon is not None:
        sim = SimConfig(horizon=args.horizon, seed=sim.seed, replications=sim.replications)
    if args.reps is not None:
        sim = replace(sim, replications=args.reps)
    if args.seed is not None:
        sim = replace(sim, seed=args.seed)
    spec = replace(spec, sim=sim)
    if args.epsilon is not None:
        spec = replace(spec, epsilon0=args.epsilon)
    if spec.illustrative:
        log.warning("preset %s uses illustrative parameters, not a stated experiment", spec.name)
    rows = run_sweep(spec, jobs=args.jobs)
    text = rows_to_csv(spec, rows)
    _emit(text, args.out)
    if args.gnuplot:
        target = args.out if args.out and args.out != "-" else "sweep.csv"
        Path(args.gnuplot).write_text(gnuplot_script(spec, target), encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="aoipreempt", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, with_policy=False):
        p.add_argument("config", help="JSON config document")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        if with_policy:
            p.add_argument("--preemption", help="comma-separated probabilities, overrides the config")

    p = sub.add_parser("analyze", help="closed-form average age per process")
    common(p, with_policy=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="event simulation of the system")
    common(p, with_policy=True)
    p.add_argument("--horizon", type=float)
    p.add_argument("--warmup", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--reduced", type=int, metavar="J", help="simulate the merged-stream system of process J")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("optimize", help="globally optimal preemption probabilities")
    common(p)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--max-iter", type=int, default=200_000)
    p.add_argument("--shrink", action="store_true", help="enable per-node interval tightening")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("bound", help="worst-case branch-and-bound iteration count")
    common(p)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("sweep", help="parameter sweep to CSV")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--preset", choices=PRESETS)
    g.add_argument("--spec", help="JSON sweep spec")
    p.add_argument("--out", default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--horizon", type=float)
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--gnuplot", metavar="PATH", help="also write a gnuplot script")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, ModelError, ConfigParseError, InvalidSweepParameter, InvalidHorizon, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InfeasibleBox, ArithmeticError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
