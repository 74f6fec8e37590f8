"""Total age as a sum of linear ratios in the preemption probabilities."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..model import SystemConfig, UncoveredProcess, validate_config


class MonotonicityViolated(ArithmeticError):
    pass


class BudgetExceeded(ValueError):
    pass


@dataclass(frozen=True)
class FractionalProgram:
    """``sum_j (g[j] @ p + g0[j]) / (f[j] @ p + f0[j])`` over ``p`` in the unit box.

    ``g`` and ``f`` have shape ``(M, N)``; ``g0`` and ``f0`` shape ``(M,)``.
    """

    g0: np.ndarray
    g: np.ndarray
    f0: np.ndarray
    f: np.ndarray

    @property
    def n_vars(self) -> int:
        return self.g.shape[1]

    @property
    def n_ratios(self) -> int:
        return self.g.shape[0]

    def numerators(self, p) -> np.ndarray:
        return self.g @ np.asarray(p, dtype=float) + self.g0

    def denominators(self, p) -> np.ndarray:
        return self.f @ np.asarray(p, dtype=float) + self.f0

    def scaled(self, s) -> FractionalProgram:
        """Divide ratio ``j``'s numerator and denominator by ``s[j]`` (ratio values unchanged)."""
        s = np.asarray(s, dtype=float)
        return FractionalProgram(self.g0 / s, self.g / s[:, None], self.f0 / s, self.f / s[:, None])


def eval_objective(fp: FractionalProgram, p) -> float:
    return float(np.sum(fp.numerators(p) / fp.denominators(p)))


def eval_objective_many(fp: FractionalProgram, P: np.ndarray) -> np.ndarray:
    """Objective at each row of ``P`` (shape ``(K, N)``)."""
    num = P @ fp.g.T + fp.g0
    den = P @ fp.f.T + fp.f0
    return (num / den).sum(axis=1)


def build_fractional_program(config: SystemConfig) -> FractionalProgram:
    validate_config(config)
    totals = config.informative_totals()
    if np.any(totals <= 0.0):
        raise UncoveredProcess(int(np.flatnonzero(totals <= 0.0)[0]))
    lam, mu, C = config.arrival_rates, config.service_rate, config.correlation
    lc = float(lam.sum())
    s = mu + lc
    Ct = C.T  # (M, N)
    g0 = mu * s**2 + mu * lc * (Ct @ lam)
    g = (s**2 - mu * lc * Ct) * lam
    f0 = s * mu**2 * (Ct @ lam)
    f = lc * mu * s * Ct * lam
    for a in (g0, g, f0, f):
        a.setflags(write=False)
    return FractionalProgram(g0, g, f0, f)


@dataclass(frozen=True)
class EpBounds:
    """Per-ratio numerator and denominator ranges over the unit box."""

    num_min: np.ndarray
    num_max: np.ndarray
    den_min: np.ndarray
    den_max: np.ndarray


def ep_bounds(fp: FractionalProgram, config: SystemConfig | None = None, rtol: float = 1e-9) -> EpBounds:
    """Numerator/denominator ranges from the box corners.

    Every coefficient is nonnegative, so each affine piece is smallest at
    ``p = 0`` and largest at ``p = 1``.  When ``config`` is given the closed
    forms of the extremes are checked as well.
    """
    if np.any(fp.g < 0.0) or np.any(fp.f < 0.0):
        raise MonotonicityViolated("negative coefficient: ratios are not monotone in p")
    num_min = fp.g0.copy()
    num_max = fp.g0 + fp.g.sum(axis=1)
    den_min = fp.f0.copy()
    den_max = fp.f0 + fp.f.sum(axis=1)
    if config is not None:
        mu, lc = config.service_rate, config.total_rate
        tot = config.informative_totals()
        s = mu + lc
        checks = [
            (num_max, np.full_like(num_max, s**3)),
            (den_min, mu**2 * s * tot),
            (den_max, mu * s**2 * tot),
        ]
        for got, want in checks:
            if not np.allclose(got, want, rtol=rtol, atol=0.0):
                raise MonotonicityViolated(f"box extremes {got} disagree with closed form {want}")
    return EpBounds(num_min, num_max, den_min, den_max)


def lipschitz_bound(fp: FractionalProgram) -> float:
    """Euclidean Lipschitz constant of the objective over the unit box (upper bound)."""
    b = ep_bounds(fp)
    # |d/dp_i (G/F)| <= (g_i F + G f_i) / F^2  with F, G at their box extremes
    per = (fp.g * b.den_max[:, None] + b.num_max[:, None] * fp.f) / b.den_min[:, None] ** 2
    return float(np.sqrt(np.sum(per.sum(axis=0) ** 2)))


def grid_points(resolution: float) -> np.ndarray:
    """``0, r, 2r, ...`` plus ``1``; halving ``r`` yields a superset."""
    k = int(math.floor(1.0 / resolution + 1e-12))
    pts = np.arange(k + 1) * resolution
    pts = pts[pts < 1.0]
    return np.append(pts, 1.0)


def grid_oracle(config: SystemConfig, resolution: float, budget: int = 2_000_000, chunk: int = 200_000):
    """Exhaustive minimum of the total age over a uniform grid on ``[0, 1]^N``.

    Returns ``(p_best, objective)``.
    """
    if not 0.0 < resolution <= 0.5:
        raise ValueError("resolution must lie in (0, 0.5]")
    fp = build_fractional_program(config)
    axis = grid_points(resolution)
    n = fp.n_vars
    total = len(axis) ** n
    if total > budget:
        raise BudgetExceeded(f"{len(axis)}^{n} = {total} grid points exceeds budget {budget}")
    best_val, best_idx = np.inf, 0
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        P = axis[np.stack(np.unravel_index(idx, (len(axis),) * n), axis=1)]
        vals = eval_objective_many(fp, P)
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val, best_idx = float(vals[k]), int(idx[k])
    p = axis[np.array(np.unravel_index(best_idx, (len(axis),) * n))]
    return p, best_val


@dataclass(frozen=True)
class BoundTerms:
    delta: float          # widest denominator range
    delta_upper: float    # its channel-rate upper bound
    tau: float
    min_informative: float


def iteration_bound_terms(config: SystemConfig) -> BoundTerms:
    validate_config(config)
    mu, lc = config.service_rate, config.total_rate
    tot = config.informative_totals()
    lmin = float(tot.min())
    if lmin <= 0.0:
        raise UncoveredProcess(int(np.argmin(tot)))
    s = mu + lc
    return BoundTerms(
        delta=float(np.max(s * lc * mu * tot)),
        delta_upper=s * lc**2 * mu,
        tau=4.0 * s / (mu**4 * lmin**2),
        min_informative=lmin,
    )


def iteration_upper_bound(config: SystemConfig, epsilon0: float) -> int:
    """Worst-case iteration count of the outer-space branch-and-bound scheme."""
    if not 0.0 < epsilon0 < 1.0:
        raise ValueError("epsilon0 must lie in (0, 1)")
    terms = iteration_bound_terms(config)
    mu, lc, m = config.service_rate, config.total_rate, config.n_processes
    arg = 4.0 * m * (mu + lc) ** 2 * lc**2 / (epsilon0 * mu**3 * terms.min_informative**2)
    return m * max(math.ceil(math.log2(arg)), 0)
