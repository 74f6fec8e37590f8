import math

import numpy as np
import pytest

from aoipreempt import SystemConfig, UncoveredProcess
from aoipreempt.opt import iteration_bound_terms, iteration_upper_bound

from conftest import random_instance


def _hand(m, mu, lc, lmin, eps):
    return m * math.ceil(math.log2(4 * m * (mu + lc) ** 2 * lc**2 / (eps * mu**3 * lmin**2)))


@pytest.mark.parametrize(
    "cfg,eps,want",
    [
        (SystemConfig([1.0, 1.0], 1.0, np.ones((2, 2))), 0.1, 20),
        (SystemConfig([1.0], 1.0, [[1.0]]), 0.5, 5),
        (SystemConfig([2.0, 2.0], 2.0, np.ones((2, 3))), 0.01, 39),
    ],
)
def test_hand_values(cfg, eps, want):
    assert iteration_upper_bound(cfg, eps) == want


def test_terms_unit():
    t = iteration_bound_terms(SystemConfig([1.0], 1.0, [[1.0]]))
    assert t.min_informative == 1.0 and t.delta == 2.0 and t.delta_upper == 2.0 and t.tau == 8.0


def test_matches_formula_random():
    rng = np.random.default_rng(8)
    for _ in range(200):
        cfg, _ = random_instance(rng)
        eps = float(rng.uniform(0.001, 0.9))
        lmin = float(cfg.informative_totals().min())
        want = _hand(cfg.n_processes, cfg.service_rate, cfg.total_rate, lmin, eps)
        assert iteration_upper_bound(cfg, eps) == want


def test_epsilon_halving():
    rng = np.random.default_rng(12)
    for _ in range(200):
        cfg, _ = random_instance(rng)
        eps = float(rng.uniform(0.001, 0.9))
        a = iteration_upper_bound(cfg, eps)
        b = iteration_upper_bound(cfg, eps / 2)
        assert a <= b <= a + cfg.n_processes


def test_monotone_in_coverage():
    base = np.array([[1.0, 1.0], [0.5, 1.0]])
    prev = None
    for c in (1.0, 0.5, 0.2, 0.05):
        C = base.copy()
        C[:, 0] *= c
        b = iteration_upper_bound(SystemConfig([1.0, 1.0], 1.0, C), 0.01)
        assert prev is None or b >= prev
        prev = b


def test_errors():
    with pytest.raises(UncoveredProcess):
        iteration_upper_bound(SystemConfig([1.0], 1.0, [[0.0]], allow_uncovered=True), 0.1)
    with pytest.raises(ValueError):
        iteration_upper_bound(SystemConfig([1.0], 1.0, [[1.0]]), 1.0)
