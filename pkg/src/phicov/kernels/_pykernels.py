"""Pure-Python reference implementations of the hot kernels.

Every function here has a compiled twin in ``_ckernels.pyx`` with the same
signature; :mod:`phicov.kernels` picks one at import time.
"""

import math

import numpy as np

BACKEND = "python"


def pb_convolve(probs):
    """Poisson-binomial pmf of independent Bernoulli(probs) by iterative folding."""
    d = len(probs)
    dist = [0.0] * (d + 1)
    dist[0] = 1.0
    for t in range(d):
        p = float(probs[t])
        q = 1.0 - p
        for k in range(t + 1, 0, -1):
            dist[k] = dist[k] * q + dist[k - 1] * p
        dist[0] *= q
    out = np.asarray(dist, dtype=float)
    out[out < 0.0] = 0.0
    return out


def multilinear(indptr, indices, x, weights, phi_table):
    """Sum_a w_a E[phi(|X|_a)] with X_i ~ Bernoulli(x_i) independent.

    ``indptr``/``indices`` is the CSR element -> sets incidence, ``phi_table``
    holds phi(0..max degree).
    """
    n = len(weights)
    dist = [0.0] * (int(np.max(np.diff(indptr), initial=0)) + 1)
    total = 0.0
    for a in range(n):
        lo, hi = indptr[a], indptr[a + 1]
        d = hi - lo
        if d == 0:
            continue
        dist[0] = 1.0
        for t in range(d):
            p = float(x[indices[lo + t]])
            q = 1.0 - p
            dist[t + 1] = dist[t] * p
            for k in range(t, 0, -1):
                dist[k] = dist[k] * q + dist[k - 1] * p
            dist[0] *= q
        acc = 0.0
        for k in range(1, d + 1):
            acc += dist[k] * phi_table[k]
        total += weights[a] * acc
    return total


def coverage_value(indptr, indices, selected, weights, phi_table):
    """Sum_a w_a phi(|S|_a) for a 0/1 selection mask."""
    n = len(weights)
    total = 0.0
    for a in range(n):
        c = 0
        for t in range(indptr[a], indptr[a + 1]):
            if selected[indices[t]]:
                c += 1
        if c:
            total += weights[a] * phi_table[c]
    return total


def _phi_at(values, tail, k):
    L = len(values) - 1
    if k <= L:
        return values[k]
    return values[L] + tail * (k - L)


def poisson_expectation(values, tail, x, eps):
    """E[phi(Poi(x))] within absolute error ``eps``.

    Terms are generated outward from the mode by the ratio recurrence
    p_{k+1} = p_k x / (k+1). Both truncated tails are bounded using
    phi(k) <= k and geometric domination of the Poisson tail.
    """
    if x == 0.0:
        return 0.0
    half = 0.5 * eps
    mode = int(math.floor(x))
    pm = math.exp(-x + mode * math.log(x) - math.lgamma(mode + 1))
    total = _phi_at(values, tail, mode) * pm
    # upward: remainder sum_{k>K} phi(k) p_k <= x * sum_{k>=K} p_k
    #         <= x * p_K / (1 - x/(K+1)) once K+1 > x
    p = pm
    k = mode
    while True:
        p *= x / (k + 1)
        k += 1
        total += _phi_at(values, tail, k) * p
        r = x / (k + 1)
        if r < 1.0 and x * p / (1.0 - r) <= half:
            break
    # downward: sum_{k<K} phi(k) p_k <= K * p_{K-1} / (1 - (K-1)/x)
    p = pm
    k = mode
    while k > 0:
        p *= k / x
        k -= 1
        if k == 0:
            break
        total += _phi_at(values, tail, k) * p
        if k > 1:
            r = (k - 1) / x
            if r < 1.0 and k * p * (k - 1) / x / (1.0 - r) <= half:
                break
    return total
