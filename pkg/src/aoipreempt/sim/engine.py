from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from ..analysis import stationary_distribution
from ..model import (
    PreemptionPolicy,
    SystemConfig,
    UncoveredProcess,
    check_policy,
    check_process,
    informative_rates,
    validate_config,
)

COUNT_NAMES = ("arrivals", "preemptions", "drops", "completions", "in_service")


class InvalidHorizon(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    horizon: float = 1e6
    warmup: float | None = None  # defaults to 1% of the horizon
    seed: int = 0
    replications: int = 1

    def __post_init__(self):
        if self.warmup is None:
            object.__setattr__(self, "warmup", 0.01 * self.horizon)
        if not np.isfinite(self.horizon) or self.horizon <= 0:
            raise InvalidHorizon(f"horizon must be positive, got {self.horizon}")
        if self.warmup < 0 or self.warmup >= self.horizon:
            raise InvalidHorizon(f"warmup must lie in [0, horizon), got {self.warmup}")
        if self.replications < 1:
            raise InvalidHorizon("need at least one replication")
        if not 0 <= self.seed < 2**64:
            raise InvalidHorizon("seed must be a 64-bit unsigned integer")

    @property
    def window(self) -> float:
        return self.horizon - self.warmup


@dataclass(frozen=True)
class SimResult:
    aoi_mean: np.ndarray
    aoi_ci_halfwidth: np.ndarray
    counts: dict[str, int]
    occupancy: np.ndarray  # (M, 3) mean time fractions in (idle, informative, uninformative)
    per_replication_aoi: np.ndarray = field(repr=False)
    per_replication_occupancy: np.ndarray = field(repr=False)
    per_replication_counts: np.ndarray = field(repr=False)
    kernel: str = "python"

    @property
    def n_processes(self) -> int:
        return self.aoi_mean.shape[0]

    def to_dict(self) -> dict:
        def clean(a):
            return [None if not np.isfinite(x) else float(x) for x in np.ravel(a)]

        return {
            "aoi_mean": clean(self.aoi_mean),
            "aoi_ci_halfwidth": clean(self.aoi_ci_halfwidth),
            "counts": dict(self.counts),
            "occupancy": [list(map(float, row)) for row in self.occupancy],
            "replications": int(self.per_replication_aoi.shape[0]),
            "kernel": self.kernel,
        }

    def csv_rows(self):
        """One row per (replication, process)."""
        for r, aoi_row in enumerate(self.per_replication_aoi):
            for j, v in enumerate(aoi_row):
                occ = self.per_replication_occupancy[r, j]
                yield [r, j, float(v), float(occ[0]), float(occ[1]), float(occ[2])]


CSV_HEADER = ["replication", "process", "aoi", "pi0", "pi1", "pi2"]


def replication_states(seed: int, replications: int) -> list[np.ndarray]:
    """Independent xoshiro256** states, one per replication, derived from ``seed``."""
    children = np.random.SeedSequence(seed).spawn(replications)
    return [c.generate_state(4, dtype=np.uint64) for c in children]


def _kernel():
    from . import KERNEL, run_replication

    return run_replication, KERNEL


def _one(args):
    rates, probs, corr, mu, horizon, warmup, state = args
    run, _ = _kernel()
    return run(rates, probs, corr, mu, horizon, warmup, state)


def _run(rates, probs, corr, mu, sim: SimConfig, jobs: int = 1) -> SimResult:
    rates = np.ascontiguousarray(rates, dtype=float)
    probs = np.ascontiguousarray(probs, dtype=float)
    corr = np.ascontiguousarray(corr, dtype=float)
    tasks = [
        (rates, probs, corr, float(mu), float(sim.horizon), float(sim.warmup), st)
        for st in replication_states(sim.seed, sim.replications)
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outs = list(pool.map(_one, tasks))
    else:
        outs = [_one(t) for t in tasks]
    _, kernel = _kernel()

    window = sim.window
    aoi = np.array([o[0] for o in outs]) / window
    occ = np.array([o[1] for o in outs]) / window
    counts = np.array([o[2] for o in outs], dtype=np.int64)
    mean = aoi.mean(axis=0)
    R = aoi.shape[0]
    if R > 1:
        half = stats.t.ppf(0.975, R - 1) * aoi.std(axis=0, ddof=1) / np.sqrt(R)
    else:
        half = np.full(aoi.shape[1], np.nan)
    totals = counts.sum(axis=0)
    return SimResult(
        aoi_mean=mean,
        aoi_ci_halfwidth=half,
        counts={k: int(v) for k, v in zip(COUNT_NAMES, totals)},
        occupancy=occ.mean(axis=0),
        per_replication_aoi=aoi,
        per_replication_occupancy=occ,
        per_replication_counts=counts,
        kernel=kernel,
    )


def simulate(config: SystemConfig, policy: PreemptionPolicy, sim: SimConfig, jobs: int = 1) -> SimResult:
    """Simulate the full multi-sensor system and report per-process time-average age."""
    validate_config(config)
    check_policy(config, policy)
    return _run(config.arrival_rates, policy.probs, config.correlation, config.service_rate, sim, jobs)


def reduced_streams(config: SystemConfig, policy: PreemptionPolicy, j: int):
    """Rates, preemption flags and informativeness of the four merged streams seen by process ``j``."""
    r = informative_rates(config, policy)
    lt, ld = r.for_process(j)
    rates = np.array([
        lt,
        ld,
        max(r.channel_preempting - lt, 0.0),
        max(r.channel_nonpreempting - ld, 0.0),
    ])
    probs = np.array([1.0, 0.0, 1.0, 0.0])
    corr = np.array([[1.0], [1.0], [0.0], [0.0]])
    return rates, probs, corr


def simulate_reduced(
    config: SystemConfig, policy: PreemptionPolicy, j: int, sim: SimConfig, jobs: int = 1
) -> SimResult:
    """Simulate process ``j``'s equivalent system built from merged Poisson streams."""
    validate_config(config)
    check_policy(config, policy)
    j = check_process(config, j)
    if config.informative_totals()[j] <= 0.0:
        raise UncoveredProcess(j)
    rates, probs, corr = reduced_streams(config, policy, j)
    return _run(rates, probs, corr, config.service_rate, sim, jobs)


def occupancy_check(result: SimResult, config: SystemConfig, policy: PreemptionPolicy, j: int) -> dict:
    """Largest absolute gap between simulated and stationary state fractions for process ``j``."""
    expected = stationary_distribution(config, policy, j).as_array()
    # a reduced-system result carries only the one process it was built for
    row = j if result.n_processes == config.n_processes else 0
    got = np.asarray(result.occupancy[row])
    dev = np.abs(got - expected)
    return {
        "process": j,
        "empirical": got.tolist(),
        "stationary": expected.tolist(),
        "max_abs_deviation": float(dev.max()),
    }
