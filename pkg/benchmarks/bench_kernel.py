"""Compare the compiled and pure-Python event kernels on the same replication.

    python3 benchmarks/bench_kernel.py [--horizon 2e4] [--repeat 3]

Both kernels consume the same xoshiro256** stream, so the outputs are also
checked for bit-identity.
"""
import argparse
import time

import numpy as np

from aoipreempt.sim import _pykernel, replication_states

try:
    from aoipreempt.sim import _ckernel
except ImportError:
    _ckernel = None


def _time(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizon", type=float, default=2e4)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    rates = np.array([1.0, 1.0])
    probs = np.array([0.5, 0.5])
    corr = np.array([[1.0, 0.5], [0.5, 1.0]])
    mu, horizon = 2.0, args.horizon
    state = replication_states(0, 1)[0]
    call = (rates, probs, corr, mu, horizon, 0.01 * horizon, state)

    t_py, out_py = _time(lambda: _pykernel.run_replication(*call), args.repeat)
    print(f"python : {t_py:8.4f} s  ({horizon / t_py:12.0f} time units/s)")
    if _ckernel is None:
        print("cython : extension not built")
        return 0
    t_c, out_c = _time(lambda: _ckernel.run_replication(*call), args.repeat)
    print(f"cython : {t_c:8.4f} s  ({horizon / t_c:12.0f} time units/s)")
    print(f"speedup: {t_py / t_c:8.1f}x")
    same = all(np.array_equal(np.asarray(a), np.asarray(b)) for a, b in zip(out_py, out_c))
    print(f"bit-identical: {same}")
    return 0 if same else 1


if __name__ == "__main__":
    raise SystemExit(main())
