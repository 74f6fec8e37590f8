"""Pure-Python event loop; the reference the compiled kernel must reproduce bit for bit.

Random numbers come from xoshiro256** so both kernels consume the exact same
stream.  Keep the order of random draws and floating-point operations here
in lockstep with ``_ckernel.pyx``.
"""
from math import inf, log

import numpy as np

MASK = 0xFFFFFFFFFFFFFFFF
TWO_M53 = 1.0 / 9007199254740992.0


class Xoshiro256:
    __slots__ = ("s0", "s1", "s2", "s3")

    def __init__(self, state):
        self.s0, self.s1, self.s2, self.s3 = (int(x) & MASK for x in state)

    def next(self) -> int:
        s1 = self.s1
        x = (s1 * 5) & MASK
        r = (((x << 7) | (x >> 57)) & MASK) * 9 & MASK
        t = (s1 << 17) & MASK
        self.s2 ^= self.s0
        self.s3 ^= self.s1
        self.s1 ^= self.s2
        self.s0 ^= self.s3
        self.s2 ^= t
        self.s3 = ((self.s3 << 45) | (self.s3 >> 19)) & MASK
        return r

    def uniform(self) -> float:
        return (self.next() >> 11) * TWO_M53

    def expo(self, rate: float) -> float:
        return -log(1.0 - self.uniform()) / rate


def run_replication(rates, probs, corr, mu, horizon, warmup, state):
    """Simulate one replication.

    Returns ``(area, occupancy, counts)``: the age integral per process over
    ``[warmup, horizon]``, the time spent in states (idle, informative,
    uninformative) per process over the same window, and the integer counters
    (arrivals, preemptions, drops, completions, in_service_at_horizon).
    """
    n, m = corr.shape
    rates = [float(x) for x in rates]
    probs = [float(x) for x in probs]
    corr = [[float(x) for x in row] for row in corr]
    rng = Xoshiro256(state)

    area = [0.0] * m
    occ = [[0.0, 0.0, 0.0] for _ in range(m)]
    last_gen = [0.0] * m
    info = [False] * m
    arrivals = preemptions = drops = completions = 0

    next_arr = [inf] * n
    for i in range(n):
        if rates[i] > 0.0:
            next_arr[i] = rng.expo(rates[i])
    busy = False
    svc_end = inf
    cur_gen = 0.0
    t = 0.0

    while True:
        tn = svc_end
        kind = -1
        for i in range(n):
            if next_arr[i] < tn:
                tn = next_arr[i]
                kind = i
        stop = tn > horizon
        if stop:
            tn = horizon
        a = t if t > warmup else warmup
        if tn > a:
            dt = tn - a
            for j in range(m):
                area[j] += dt * ((a - last_gen[j]) + (tn - last_gen[j])) * 0.5
                if not busy:
                    occ[j][0] += dt
                elif info[j]:
                    occ[j][1] += dt
                else:
                    occ[j][2] += dt
        t = tn
        if stop:
            break
        if kind < 0:
            completions += 1
            for j in range(m):
                if info[j]:
                    last_gen[j] = cur_gen
            busy = False
            svc_end = inf
            continue
        arrivals += 1
        enter = True
        if busy:
            p = probs[kind]
            if p >= 1.0:
                enter = True
            elif p <= 0.0:
                enter = False
            else:
                enter = rng.uniform() < p
            if enter:
                preemptions += 1
            else:
                drops += 1
        if enter:
            row = corr[kind]
            for j in range(m):
                c = row[j]
                if c >= 1.0:
                    info[j] = True
                elif c <= 0.0:
                    info[j] = False
                else:
                    info[j] = rng.uniform() < c
            busy = True
            cur_gen = t
            svc_end = t + rng.expo(mu)
        next_arr[kind] = t + rng.expo(rates[kind])

    counts = np.array([arrivals, preemptions, drops, completions, 1 if busy else 0], dtype=np.int64)
    return np.array(area), np.array(occ), counts
