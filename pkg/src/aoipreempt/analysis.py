"""Closed-form average age per process and an independent SHS solver.

From process ``j``'s point of view the server is idle (0), busy with a
packet informative for ``j`` (1) or busy with one that is not (2).  The
closed forms below give the stationary law of that chain and the average
age; :func:`shs_oracle_aoi` recomputes the age by assembling and solving
the hybrid-system linear equations directly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    PreemptionPolicy,
    SystemConfig,
    UncoveredProcess,
    check_policy,
    check_process,
    informative_rates,
    validate_config,
)


class SingularSystem(ArithmeticError):
    pass


@dataclass(frozen=True)
class StationaryDistribution:
    pi0: float
    pi1: float
    pi2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.pi0, self.pi1, self.pi2])


@dataclass(frozen=True)
class AoiReport:
    per_process: np.ndarray
    total: float


@dataclass(frozen=True)
class ShsSolution:
    pi: StationaryDistribution
    v_bar: np.ndarray  # (v00, v01, v10, v11, v20, v21)
    aoi: float


def _prepare(config, policy, j):
    validate_config(config)
    check_policy(config, policy)
    return check_process(config, j)


def stationary_distribution(
    config: SystemConfig, policy: PreemptionPolicy, j: int
) -> StationaryDistribution:
    j = _prepare(config, policy, j)
    r = informative_rates(config, policy)
    mu, lc, ltc = config.service_rate, r.channel_total, r.channel_preempting
    lt, ld = r.for_process(j)
    pi0 = mu / (lc + mu)
    pi1 = (lc * lt + ld * mu + lt * mu) / ((lc + mu) * (ltc + mu))
    # pi2 by complement keeps the three entries summing to one
    pi2 = max(1.0 - pi0 - pi1, 0.0)
    return StationaryDistribution(pi0, pi1, pi2)


def aoi_process(config: SystemConfig, policy: PreemptionPolicy, j: int) -> float:
    """Average age of process ``j`` under per-sensor preemption probabilities."""
    j = _prepare(config, policy, j)
    lam, mu, p = config.arrival_rates, config.service_rate, policy.probs
    c = config.correlation[:, j]
    lc = float(lam.sum())
    s = mu + lc
    den = mu * float(np.sum(s * (lc * p + mu) * c * lam))
    if den <= 0.0:
        if config.allow_uncovered:
            return float("inf")
        raise UncoveredProcess(j)
    num = mu * s**2 + float(np.sum((mu * lc * c * (1.0 - p) + s**2 * p) * lam))
    return num / den


def aoi_sum(config: SystemConfig, policy: PreemptionPolicy) -> AoiReport:
    per = np.array([aoi_process(config, policy, j) for j in range(config.n_processes)])
    per.setflags(write=False)
    return AoiReport(per, float(per.sum()))


def _covered_total(config: SystemConfig, j: int) -> float:
    validate_config(config)
    j = check_process(config, j)
    tot = float(config.informative_totals()[j])
    if tot <= 0.0:
        if config.allow_uncovered:
            return 0.0
        raise UncoveredProcess(j)
    return tot


def aoi_full_preemption(config: SystemConfig, j: int) -> float:
    """Age of process ``j`` when every arrival preempts (all ``p_i = 1``)."""
    tot = _covered_total(config, j)
    if tot == 0.0:
        return float("inf")
    mu, lc = config.service_rate, config.total_rate
    return (lc + mu) / (mu * tot)


def aoi_no_preemption(config: SystemConfig, j: int) -> float:
    """Age of process ``j`` when busy-server arrivals are always dropped."""
    tot = _covered_total(config, j)
    if tot == 0.0:
        return float("inf")
    mu, lc = config.service_rate, config.total_rate
    return lc / (mu * (lc + mu)) + (lc + mu) / (mu * tot)


def preemption_gap(config: SystemConfig) -> float:
    """Per-process age difference between never and always preempting."""
    mu, lc = config.service_rate, config.total_rate
    return lc / (mu * (lc + mu))


def aoi_expanded_form(config: SystemConfig, policy: PreemptionPolicy, j: int) -> float:
    """Same average age written as a polynomial ratio in the channel rates.

    Kept as a third evaluation route; it must agree with :func:`aoi_process`.
    """
    j = _prepare(config, policy, j)
    r = informative_rates(config, policy)
    mu, lc, ltc = config.service_rate, r.channel_total, r.channel_preempting
    lt, ld = r.for_process(j)
    num = (
        lc**2 * ltc + lc**2 * mu + lc * ld * mu + 2 * lc * ltc * mu
        + 2 * lc * mu**2 + ltc * mu**2 + mu**3
    )
    den = mu * (lc**2 * lt + lc * ld * mu + 2 * lc * lt * mu + ld * mu**2 + lt * mu**2)
    if den <= 0.0:
        if config.allow_uncovered:
            return float("inf")
        raise UncoveredProcess(j)
    return num / den


# -- stochastic hybrid system route ------------------------------------------


def _nonneg(x: float, scale: float, what: str) -> float:
    if x < -1e-12 * scale:
        raise SingularSystem(f"negative transition rate for {what}: {x}")
    return max(x, 0.0)


def _transition_rates(config, policy, j):
    r = informative_rates(config, policy)
    lt, ld = r.for_process(j)
    lc, ltc = r.channel_total, r.channel_preempting
    scale = max(lc, 1.0)
    # rates out of idle into busy-uninformative, and informative -> uninformative preemption
    idle_to_unin = _nonneg(lc - lt - ld, scale, "idle -> uninformative")
    info_to_unin = _nonneg(ltc - lt, scale, "informative -> uninformative")
    return lt, ld, lc, ltc, idle_to_unin, info_to_unin


def shs_oracle_aoi(config: SystemConfig, policy: PreemptionPolicy, j: int) -> ShsSolution:
    """Average age of process ``j`` from the SHS equations ``v D = pi B + v R``."""
    j = _prepare(config, policy, j)
    if config.informative_totals()[j] <= 0.0:
        if config.allow_uncovered:
            nan = float("nan")
            return ShsSolution(StationaryDistribution(nan, nan, nan), np.full(6, nan), float("inf"))
        raise UncoveredProcess(j)
    mu = config.service_rate
    lt, ld, lc, ltc, idle_to_unin, info_to_unin = _transition_rates(config, policy, j)

    # discrete chain: pi D = pi Q, sum(pi) = 1
    D3 = np.diag([lc, mu + ltc, mu + lt])
    Q = np.array([
        [0.0, lt + ld, idle_to_unin],
        [mu, lt, info_to_unin],
        [mu, lt, 0.0],
    ])
    A = (D3 - Q).T
    A[-1, :] = 1.0
    rhs = np.array([0.0, 0.0, 1.0])
    try:
        pi = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from None

    # age moments: v (D - R) = pi B
    D6 = np.diag([lc, lc, mu + ltc, mu + ltc, mu + lt, mu + lt])
    B = np.zeros((3, 6))
    B[0, 0] = 1.0
    B[1, 2] = B[1, 3] = 1.0
    B[2, 4] = 1.0
    R = np.zeros((6, 6))
    R[0, 2] = lt + ld
    R[0, 4] = idle_to_unin
    R[2, 2] = lt
    R[2, 4] = info_to_unin
    R[3, 0] = mu
    R[4, 0] = mu
    R[4, 2] = lt
    try:
        v = np.linalg.solve((D6 - R).T, pi @ B)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from None
    if not np.all(np.isfinite(v)):
        raise SingularSystem("non-finite SHS solution")
    v.setflags(write=False)
    dist = StationaryDistribution(float(pi[0]), float(pi[1]), float(pi[2]))
    return ShsSolution(dist, v, float(v[0] + v[2] + v[4]))
