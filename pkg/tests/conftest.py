import numpy as np
import pytest
from hypothesis import strategies as st

from aoipreempt import PreemptionPolicy, SystemConfig


def random_instance(rng, n_max=5, m_max=5, lo=0.1, hi=10.0, n=None, m=None):
    """Random covered config and policy: rates uniform in [lo, hi], C and p uniform in [0, 1]."""
    n = n or int(rng.integers(1, n_max + 1))
    m = m or int(rng.integers(1, m_max + 1))
    lam = rng.uniform(lo, hi, n)
    mu = rng.uniform(lo, hi)
    C = rng.uniform(0.0, 1.0, (n, m))
    p = rng.uniform(0.0, 1.0, n)
    return SystemConfig(lam, mu, C), PreemptionPolicy(p)


@st.composite
def instances(draw, n_max=4, m_max=4):
    n = draw(st.integers(1, n_max))
    m = draw(st.integers(1, m_max))
    rate = st.floats(0.1, 10.0)
    unit = st.floats(0.0, 1.0)
    lam = draw(st.lists(rate, min_size=n, max_size=n))
    mu = draw(rate)
    C = np.array(draw(st.lists(unit, min_size=n * m, max_size=n * m))).reshape(n, m)
    # keep every process covered
    C[draw(st.integers(0, n - 1)), :] = np.maximum(C[0, :], 0.05)
    p = draw(st.lists(unit, min_size=n, max_size=n))
    return SystemConfig(lam, mu, C), PreemptionPolicy(p)


@pytest.fixture
def unit_config():
    return SystemConfig([1.0], 1.0, [[1.0]])


@pytest.fixture
def fig3a_config():
    return SystemConfig([1.0, 1.0], 2.0, [[1.0, 0.5], [0.5, 1.0]])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        ok, detail = RESULTS[k]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}")
