# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled event loop.  Mirrors ``_pykernel.run_replication`` operation for operation."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, INFINITY
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

cdef double TWO_M53 = 1.0 / 9007199254740992.0


cdef struct Rng:
    uint64_t s0, s1, s2, s3


cdef inline uint64_t rotl(uint64_t x, int k) nogil:
    return (x << k) | (x >> (64 - k))


cdef inline uint64_t rng_next(Rng* r) nogil:
    cdef uint64_t res = rotl(r.s1 * 5, 7) * 9
    cdef uint64_t t = r.s1 << 17
    r.s2 ^= r.s0
    r.s3 ^= r.s1
    r.s1 ^= r.s2
    r.s0 ^= r.s3
    r.s2 ^= t
    r.s3 = rotl(r.s3, 45)
    return res


cdef inline double rng_uniform(Rng* r) nogil:
    return <double>(rng_next(r) >> 11) * TWO_M53


cdef inline double rng_expo(Rng* r, double rate) nogil:
    return -log(1.0 - rng_uniform(r)) / rate


def run_replication(rates, probs, corr, double mu, double horizon, double warmup, state):
    cdef const double[::1] lam = np.ascontiguousarray(rates, dtype=np.float64)
    cdef const double[::1] pp = np.ascontiguousarray(probs, dtype=np.float64)
    cdef const double[:, ::1] cc = np.ascontiguousarray(corr, dtype=np.float64)
    cdef Py_ssize_t n = cc.shape[0], m = cc.shape[1]
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] st = np.asarray(state, dtype=np.uint64)
    cdef Rng rng
    rng.s0 = st[0]
    rng.s1 = st[1]
    rng.s2 = st[2]
    rng.s3 = st[3]

    area_a = np.zeros(m)
    occ_a = np.zeros((m, 3))
    last_a = np.zeros(m)
    info_a = np.zeros(m, dtype=np.uint8)
    next_a = np.full(n, np.inf)
    cdef double[::1] area = area_a
    cdef double[:, ::1] occ = occ_a
    cdef double[::1] last_gen = last_a
    cdef unsigned char[::1] info = info_a
    cdef double[::1] next_arr = next_a

    cdef int64_t arrivals = 0, preemptions = 0, drops = 0, completions = 0
    cdef Py_ssize_t i, j, kind
    cdef bint busy = False, stop, enter
    cdef double svc_end = INFINITY, cur_gen = 0.0, t = 0.0, tn, a, dt, p, c

    with nogil:
        for i in range(n):
            if lam[i] > 0.0:
                next_arr[i] = rng_expo(&rng, lam[i])
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
                        occ[j, 0] += dt
                    elif info[j]:
                        occ[j, 1] += dt
                    else:
                        occ[j, 2] += dt
            t = tn
            if stop:
                break
            if kind < 0:
                completions += 1
                for j in range(m):
                    if info[j]:
                        last_gen[j] = cur_gen
                busy = False
                svc_end = INFINITY
                continue
            arrivals += 1
            enter = True
            if busy:
                p = pp[kind]
                if p >= 1.0:
                    enter = True
                elif p <= 0.0:
                    enter = False
                else:
                    enter = rng_uniform(&rng) < p
                if enter:
                    preemptions += 1
                else:
                    drops += 1
            if enter:
                for j in range(m):
                    c = cc[kind, j]
                    if c >= 1.0:
                        info[j] = 1
                    elif c <= 0.0:
                        info[j] = 0
                    else:
                        info[j] = rng_uniform(&rng) < c
                busy = True
                cur_gen = t
                svc_end = t + rng_expo(&rng, mu)
            next_arr[kind] = t + rng_expo(&rng, lam[kind])

    counts = np.array([arrivals, preemptions, drops, completions, 1 if busy else 0], dtype=np.int64)
    return area_a, occ_a, counts
