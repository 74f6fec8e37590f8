"""Parameter sweeps over the analysis, simulation and optimizer engines.

Every sweep row has the same columns for a given ``(N, M)``; cells for
outputs that were not requested stay empty.  Index suffixes in column and
parameter names are 1-based (``lambda_1`` is the first sensor's rate).
"""
from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .analysis import aoi_sum
from .model import (
    ConfigParseError,
    PreemptionPolicy,
    SystemConfig,
    config_to_dict,
    parse_config,
)
from .opt import iteration_upper_bound, optimize
from .sim import SimConfig, simulate

OUTPUTS = ("analysis", "simulation", "optimum", "bounds")


class InvalidSweepParameter(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple[float, ...]
    base: SystemConfig
    policies: tuple[PreemptionPolicy | None, ...] = (None,)
    outputs: tuple[str, ...] = ("analysis",)
    sim: SimConfig = field(default_factory=lambda: SimConfig(horizon=1e6, replications=10))
    epsilon0: float = 0.01
    name: str = "custom"
    illustrative: bool = False  # parameters not taken from a stated experiment

    def __post_init__(self):
        if not self.values:
            raise InvalidSweepParameter("sweep needs at least one value")
        v = np.asarray(self.values, dtype=float)
        if np.any(np.diff(v) <= 0):
            raise InvalidSweepParameter("sweep values must be strictly increasing")
        bad = set(self.outputs) - set(OUTPUTS)
        if bad:
            raise InvalidSweepParameter(f"unknown outputs {sorted(bad)}")
        needs_policy = "analysis" in self.outputs or "simulation" in self.outputs
        if needs_policy and self.parameter != "p_uniform" and any(p is None for p in self.policies):
            raise InvalidSweepParameter("analysis and simulation outputs need a preemption policy")
        for v0 in self.values:
            self.apply(v0)  # raises on a parameter that does not fit the base config

    def apply(self, value: float, policy: PreemptionPolicy | None = None):
        """Config and policy at one sweep value."""
        cfg, n = self.base, self.base.n_sensors
        par = self.parameter
        if par == "mu":
            cfg = cfg.replace(service_rate=value)
        elif par.startswith("lambda_"):
            try:
                i = int(par[len("lambda_"):]) - 1
            except ValueError:
                raise InvalidSweepParameter(f"bad sensor index in {par!r}") from None
            if not 0 <= i < n:
                raise InvalidSweepParameter(f"{par} refers to a sensor outside 1..{n}")
            lam = cfg.arrival_rates.copy()
            lam[i] = value
            cfg = cfg.replace(arrival_rates=lam)
        elif par == "theta":
            if cfg.n_sensors != 2 or cfg.n_processes != 2:
                raise InvalidSweepParameter("theta sweeps need two sensors and two processes")
            cfg = cfg.replace(correlation=[[1.0, value], [value, 1.0]])
        elif par == "p_uniform":
            if not 0.0 <= value <= 1.0:
                raise InvalidSweepParameter("p_uniform values must lie in [0, 1]")
            policy = PreemptionPolicy.uniform(n, value)
        else:
            raise InvalidSweepParameter(f"unknown sweep parameter {par!r}")
        return cfg, policy

    def header(self) -> list[str]:
        n, m = self.base.n_sensors, self.base.n_processes
        cols = ["parameter", "value", "policy"]
        cols += [f"aoi_theory_{j + 1}" for j in range(m)]
        cols += [f"aoi_sim_{j + 1}" for j in range(m)]
        cols += [f"aoi_sim_ci_{j + 1}" for j in range(m)]
        cols += [f"p_star_{i + 1}" for i in range(n)]
        cols += ["aoi_sum_opt", "aoi_sum_p0", "aoi_sum_p1", "certified", "theorem2_bound"]
        return cols

    def points(self):
        k = 0
        for pol in self.policies:
            for v in self.values:
                yield k, float(v), pol
                k += 1


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _policy_label(pol: PreemptionPolicy | None) -> str:
    if pol is None:
        return ""
    return " ".join(repr(float(x)) for x in pol.probs)


def point_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1, dtype=np.uint64)[0])


def evaluate_point(spec: SweepSpec, index: int, value: float, policy: PreemptionPolicy | None) -> dict:
    cfg, pol = spec.apply(value, policy)
    n, m = cfg.n_sensors, cfg.n_processes
    row = {"parameter": spec.parameter, "value": value, "policy": _policy_label(pol)}
    if "analysis" in spec.outputs:
        rep = aoi_sum(cfg, pol)
        for j in range(m):
            row[f"aoi_theory_{j + 1}"] = float(rep.per_process[j])
    if "simulation" in spec.outputs:
        sim = replace(spec.sim, seed=point_seed(spec.sim.seed, index))
        res = simulate(cfg, pol, sim)
        for j in range(m):
            row[f"aoi_sim_{j + 1}"] = float(res.aoi_mean[j])
            row[f"aoi_sim_ci_{j + 1}"] = float(res.aoi_ci_halfwidth[j])
        row["_occupancy"] = res.occupancy.tolist()
    if "optimum" in spec.outputs:
        res = optimize(cfg, spec.epsilon0)
        for i in range(n):
            row[f"p_star_{i + 1}"] = float(res.p_star[i])
        # same evaluation route as the two baselines, so the comparison is exact at the corners
        row["aoi_sum_opt"] = aoi_sum(cfg, PreemptionPolicy(res.p_star)).total
        row["aoi_sum_p0"] = aoi_sum(cfg, PreemptionPolicy.uniform(n, 0.0)).total
        row["aoi_sum_p1"] = aoi_sum(cfg, PreemptionPolicy.uniform(n, 1.0)).total
        row["certified"] = res.certified
    if "bounds" in spec.outputs:
        row["theorem2_bound"] = iteration_upper_bound(cfg, spec.epsilon0)
    return row


def _evaluate(args):
    return evaluate_point(*args)


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[dict]:
    """Evaluate every point; rows come back in sweep order whatever the worker count."""
    tasks = [(spec, k, v, pol) for k, v, pol in spec.points()]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_evaluate, tasks))
    return [_evaluate(t) for t in tasks]


def rows_to_csv(spec: SweepSpec, rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = spec.header()
    w.writerow(header)
    for r in rows:
        w.writerow([r.get(c, "") if c in ("parameter", "policy") else _fmt(r.get(c)) for c in header])
    return buf.getvalue()


def gnuplot_script(spec: SweepSpec, csv_path: str) -> str:
    """Minimal gnuplot script plotting every non-empty numeric column against the sweep value."""
    header = spec.header()
    m = spec.base.n_processes
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set xlabel '{spec.parameter}'",
        f"set title '{spec.name}'",
    ]
    cols = []
    if "analysis" in spec.outputs:
        cols += [header.index(f"aoi_theory_{j + 1}") + 1 for j in range(m)]
    if "simulation" in spec.outputs:
        cols += [header.index(f"aoi_sim_{j + 1}") + 1 for j in range(m)]
    if "optimum" in spec.outputs:
        cols += [header.index(f"p_star_{i + 1}") + 1 for i in range(spec.base.n_sensors)]
    plots = [f"'{csv_path}' using 2:{c} with linespoints" for c in cols]
    lines.append("plot " + ", \\\n     ".join(plots) if plots else "# nothing to plot")
    return "\n".join(lines) + "\n"


# -- presets -------------------------------------------------------------------

_C_HALF = [[1.0, 0.5], [0.5, 1.0]]
_P_FIG3 = tuple(PreemptionPolicy.uniform(2, v) for v in (0.0, 0.5, 1.0))
_LAMBDA_SWEEP = (0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0)


def preset(name: str) -> SweepSpec:
    if name == "fig3a":
        return SweepSpec(
            "lambda_1", (0.5, 1.0, 2.0, 4.0, 8.0), SystemConfig([1.0, 1.0], 2.0, _C_HALF),
            policies=_P_FIG3, outputs=("analysis", "simulation"), name=name,
        )
    if name == "fig3b":
        return SweepSpec(
            "mu", (1.0, 2.0, 4.0, 8.0), SystemConfig([1.0, 6.0], 2.0, _C_HALF),
            policies=_P_FIG3, outputs=("analysis", "simulation"), name=name,
        )
    if name == "fig5a":
        # lambda_2 = 1 and mu = 2 are chosen here, not stated for this experiment
        return SweepSpec(
            "lambda_1", _LAMBDA_SWEEP, SystemConfig([1.0, 1.0], 2.0, np.eye(2)),
            outputs=("optimum", "bounds"), name=name,
        )
    if name == "fig6a":
        return SweepSpec(
            "theta", (0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0),
            SystemConfig([1.0, 4.0], 2.0, np.eye(2)),
            outputs=("optimum", "bounds"), name=name,
        )
    if name == "fig5b":
        return SweepSpec(
            "lambda_1", _LAMBDA_SWEEP, SystemConfig([1.0, 1.0], 2.0, [[1.0, 1.0], [0.0, 1.0]]),
            outputs=("optimum", "bounds"), name=name, illustrative=True,
        )
    if name == "fig6b":
        return SweepSpec(
            "lambda_1", _LAMBDA_SWEEP, SystemConfig([1.0, 4.0], 2.0, [[1.0, 0.3], [0.6, 0.6]]),
            outputs=("optimum", "bounds"), name=name, illustrative=True,
        )
    raise InvalidSweepParameter(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")


PRESETS = ("fig3a", "fig3b", "fig5a", "fig6a", "fig5b", "fig6b")

SPEC_KEYS = {"name", "parameter", "values", "base", "policies", "outputs", "sim", "epsilon"}
SIM_KEYS = {"horizon", "warmup", "seed", "replications"}


def sim_from_dict(doc: dict, default: SimConfig | None = None) -> SimConfig:
    if not isinstance(doc, dict):
        raise ConfigParseError("'sim' must be a JSON object")
    unknown = set(doc) - SIM_KEYS
    if unknown:
        raise ConfigParseError(f"unknown sim keys: {sorted(unknown)}")
    base = default or SimConfig()
    horizon = float(doc.get("horizon", base.horizon))
    warmup = doc.get("warmup")
    if warmup is None and "horizon" not in doc:
        warmup = base.warmup
    return SimConfig(
        horizon=horizon,
        warmup=None if warmup is None else float(warmup),
        seed=int(doc.get("seed", base.seed)),
        replications=int(doc.get("replications", base.replications)),
    )


def spec_from_dict(doc: dict) -> SweepSpec:
    if not isinstance(doc, dict):
        raise ConfigParseError("sweep spec must be a JSON object")
    unknown = set(doc) - SPEC_KEYS
    if unknown:
        raise ConfigParseError(f"unknown sweep keys: {sorted(unknown)}")
    for k in ("parameter", "values", "base"):
        if k not in doc:
            raise ConfigParseError(f"sweep spec is missing {k!r}")
    base, policy = parse_config(doc["base"])
    policies = (policy,)
    if "policies" in doc:
        policies = tuple(PreemptionPolicy(p) for p in doc["policies"])
    kw = {}
    if "sim" in doc:
        kw["sim"] = sim_from_dict(doc["sim"], SimConfig(horizon=1e6, replications=10))
    return SweepSpec(
        parameter=str(doc["parameter"]),
        values=tuple(float(v) for v in doc["values"]),
        base=base,
        policies=policies,
        outputs=tuple(doc.get("outputs", ["analysis"])),
        epsilon0=float(doc.get("epsilon", 0.01)),
        name=str(doc.get("name", "custom")),
        **kw,
    )


def load_spec(path: str | Path) -> SweepSpec:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"{path}: malformed JSON: {exc}") from None
    return spec_from_dict(doc)


def spec_to_dict(spec: SweepSpec) -> dict:
    doc = {
        "name": spec.name,
        "parameter": spec.parameter,
        "values": list(spec.values),
        "base": config_to_dict(spec.base),
        "outputs": list(spec.outputs),
        "sim": {
            "horizon": spec.sim.horizon,
            "warmup": spec.sim.warmup,
            "seed": spec.sim.seed,
            "replications": spec.sim.replications,
        },
        "epsilon": spec.epsilon0,
    }
    if any(p is not None for p in spec.policies):
        doc["policies"] = [p.probs.tolist() for p in spec.policies]
    return doc
