# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Signatures mirror ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, lgamma, floor

cnp.import_array()

BACKEND = "cython"


def pb_convolve(probs):
    cdef const double[::1] pv = np.ascontiguousarray(probs, dtype=np.float64)
    cdef Py_ssize_t d = pv.shape[0]
    out = np.zeros(d + 1, dtype=np.float64)
    cdef double[::1] dist = out
    cdef Py_ssize_t t, k
    cdef double p, q
    dist[0] = 1.0
    for t in range(d):
        p = pv[t]
        q = 1.0 - p
        k = t + 1
        while k > 0:
            dist[k] = dist[k] * q + dist[k - 1] * p
            k -= 1
        dist[0] *= q
    for k in range(d + 1):
        if dist[k] < 0.0:
            dist[k] = 0.0
    return out


def multilinear(indptr, indices, x, weights, phi_table):
    cdef const long[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const long[::1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[::1] ph = np.ascontiguousarray(phi_table, dtype=np.float64)
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t a, t, k, d, lo, maxd = 0
    for a in range(n):
        if ip[a + 1] - ip[a] > maxd:
            maxd = ip[a + 1] - ip[a]
    buf = np.zeros(maxd + 1, dtype=np.float64)
    cdef double[::1] dist = buf
    cdef double total = 0.0, acc, p, q
    for a in range(n):
        lo = ip[a]
        d = ip[a + 1] - lo
        if d == 0:
            continue
        dist[0] = 1.0
        for t in range(d):
            p = xv[ix[lo + t]]
            q = 1.0 - p
            dist[t + 1] = dist[t] * p
            k = t
            while k > 0:
                dist[k] = dist[k] * q + dist[k - 1] * p
                k -= 1
            dist[0] *= q
        acc = 0.0
        for k in range(1, d + 1):
            acc += dist[k] * ph[k]
        total += w[a] * acc
    return total


def coverage_value(indptr, indices, selected, weights, phi_table):
    cdef const long[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const long[::1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const cnp.uint8_t[::1] sel = np.ascontiguousarray(selected, dtype=np.uint8)
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[::1] ph = np.ascontiguousarray(phi_table, dtype=np.float64)
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t a, t, c
    cdef double total = 0.0
    for a in range(n):
        c = 0
        for t in range(ip[a], ip[a + 1]):
            if sel[ix[t]]:
                c += 1
        if c:
            total += w[a] * ph[c]
    return total


cdef inline double _phi_at(const double[::1] values, double tail, long k) noexcept nogil:
    cdef long L = values.shape[0] - 1
    if k <= L:
        return values[k]
    return values[L] + tail * (k - L)


def poisson_expectation(values, double tail, double x, double eps):
    cdef const double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    if x == 0.0:
        return 0.0
    cdef double half = 0.5 * eps
    cdef long mode = <long>floor(x)
    cdef double pm = exp(-x + mode * log(x) - lgamma(mode + 1.0))
    cdef double total = _phi_at(v, tail, mode) * pm
    cdef double p = pm, r
    cdef long k = mode
    while True:
        p *= x / (k + 1)
        k += 1
        total += _phi_at(v, tail, k) * p
        r = x / (k + 1)
        if r < 1.0 and x * p / (1.0 - r) <= half:
            break
    p = pm
    k = mode
    while k > 0:
        p *= k / x
        k -= 1
        if k == 0:
            break
        total += _phi_at(v, tail, k) * p
        if k > 1:
            r = (k - 1) / x
            if r < 1.0 and k * p * (k - 1) / x / (1.0 - r) <= half:
                break
    return total
