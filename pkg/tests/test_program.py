import numpy as np
import pytest
from hypothesis import given, settings

from aoipreempt import SystemConfig, UncoveredProcess, aoi_sum
from aoipreempt.opt import (
    BudgetExceeded,
    FractionalProgram,
    MonotonicityViolated,
    build_fractional_program,
    ep_bounds,
    eval_objective,
    grid_oracle,
    lipschitz_bound,
)
from aoipreempt.opt.program import eval_objective_many, grid_points

from conftest import instances, random_instance


def test_unit_coefficients(unit_config):
    fp = build_fractional_program(unit_config)
    assert fp.g0.tolist() == [5.0]
    assert fp.g.tolist() == [[3.0]]
    assert fp.f0.tolist() == [2.0]
    assert fp.f.tolist() == [[2.0]]
    assert eval_objective(fp, [1.0]) == 2.0
    assert eval_objective(fp, [0.0]) == 2.5


def test_uncovered():
    with pytest.raises(UncoveredProcess):
        build_fractional_program(SystemConfig([1.0], 1.0, [[1.0, 0.0]], allow_uncovered=True))


def test_objective_identity():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        cfg, pol = random_instance(rng)
        fp = build_fractional_program(cfg)
        want = aoi_sum(cfg, pol).total
        assert abs(eval_objective(fp, pol.probs) - want) <= 1e-10 * want


def test_many_matches_single():
    rng = np.random.default_rng(2)
    cfg, _ = random_instance(rng, n=3, m=2)
    fp = build_fractional_program(cfg)
    P = rng.random((20, 3))
    np.testing.assert_allclose(eval_objective_many(fp, P), [eval_objective(fp, p) for p in P], rtol=1e-14)


def test_unit_bounds(unit_config):
    b = ep_bounds(build_fractional_program(unit_config), unit_config)
    assert (b.num_min[0], b.num_max[0], b.den_min[0], b.den_max[0]) == (5.0, 8.0, 2.0, 4.0)


def test_fig3a_num_max(fig3a_config):
    b = ep_bounds(build_fractional_program(fig3a_config), fig3a_config)
    np.testing.assert_allclose(b.num_max, [64.0, 64.0])


@settings(max_examples=200, deadline=None)
@given(instances())
def test_bound_identities(inst):
    cfg, _ = inst
    fp = build_fractional_program(cfg)
    b = ep_bounds(fp, cfg)  # checks the closed forms internally
    mu, s = cfg.service_rate, cfg.service_rate + cfg.total_rate
    assert np.all(b.num_min <= b.num_max) and np.all(b.den_min <= b.den_max)
    np.testing.assert_allclose(b.den_max / b.den_min, s / mu, rtol=1e-12)
    assert np.all(fp.g >= 0) and np.all(fp.f >= 0) and np.all(fp.g0 > 0) and np.all(fp.f0 > 0)
    delta = np.max(b.den_max - b.den_min)
    lc = cfg.total_rate
    assert delta == pytest.approx(np.max(s * lc * mu * cfg.informative_totals()), rel=1e-12)
    assert delta <= s * lc**2 * mu * (1 + 1e-12)


def test_homogeneity():
    rng = np.random.default_rng(9)
    cfg, _ = random_instance(rng)
    k = 2.5
    cfg_k = cfg.replace(arrival_rates=k * cfg.arrival_rates, service_rate=k * cfg.service_rate)
    b = ep_bounds(build_fractional_program(cfg))
    bk = ep_bounds(build_fractional_program(cfg_k))
    np.testing.assert_allclose(bk.num_min, k**3 * b.num_min, rtol=1e-12)
    np.testing.assert_allclose(bk.num_max, k**3 * b.num_max, rtol=1e-12)
    np.testing.assert_allclose(bk.den_min, k**4 * b.den_min, rtol=1e-12)
    np.testing.assert_allclose(bk.den_max, k**4 * b.den_max, rtol=1e-12)


def test_monotonicity_violation():
    fp = FractionalProgram(np.array([1.0]), np.array([[-1.0]]), np.array([1.0]), np.array([[1.0]]))
    with pytest.raises(MonotonicityViolated):
        ep_bounds(fp)


def test_lipschitz_bound_holds():
    rng = np.random.default_rng(4)
    for _ in range(30):
        cfg, _ = random_instance(rng, n_max=3, m_max=3)
        fp = build_fractional_program(cfg)
        L = lipschitz_bound(fp)
        P = rng.random((200, cfg.n_sensors))
        Q = np.clip(P + rng.normal(scale=0.05, size=P.shape), 0, 1)
        dv = np.abs(eval_objective_many(fp, P) - eval_objective_many(fp, Q))
        dist = np.linalg.norm(P - Q, axis=1)
        assert np.all(dv <= L * dist + 1e-12)


def test_grid_unit(unit_config):
    p, v = grid_oracle(unit_config, 0.1)
    assert p.tolist() == [1.0] and v == 2.0


def test_grid_points_superset():
    a = set(grid_points(0.1).round(12))
    b = set(grid_points(0.05).round(12))
    assert a <= b and grid_points(0.3)[-1] == 1.0


def test_grid_refinement_never_worse():
    rng = np.random.default_rng(1)
    for _ in range(10):
        cfg, _ = random_instance(rng, n=2, m=2)
        v = [grid_oracle(cfg, r)[1] for r in (0.2, 0.1, 0.05)]
        assert v[0] >= v[1] >= v[2]


def test_grid_budget():
    cfg = SystemConfig(np.ones(4), 1.0, np.ones((4, 1)))
    with pytest.raises(BudgetExceeded):
        grid_oracle(cfg, 0.01, budget=10_000)
    with pytest.raises(ValueError):
        grid_oracle(cfg, 0.7)


@settings(max_examples=100, deadline=None)
@given(instances())
def test_endpoint_dominance(inst):
    cfg, _ = inst
    fp = build_fractional_program(cfg)
    n = cfg.n_sensors
    assert eval_objective(fp, np.ones(n)) < eval_objective(fp, np.zeros(n))
