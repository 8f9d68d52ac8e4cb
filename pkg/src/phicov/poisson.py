"""Poisson concavity ratio and the expectations it is built from.

``alpha(x) = E[phi(Poi(x))] / phi(x)`` and ``alpha_phi = min over positive
integers x``. The minimum is found by scanning integers; the scan range is
shortened to ``[1, l]`` when ``phi`` is affine from ``l`` on, which is always
the case for a :class:`~phicov.counting.CountingFunction` since it continues
linearly past its horizon.
"""

import math
import sys
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from phicov import kernels
from phicov.counting import is_geometrically_dominant, value_at
from phicov.errors import DomainError, ResourceLimitError

DEFAULT_EPS = 1e-9
DEFAULT_MAX_EVALS = 10**7


@dataclass
class RatioReport:
    alpha: float
    argmin_x: int
    search_bound: int
    epsilon: float
    curve: list = field(repr=False)
    curvature_ratio: float
    curvature_m: int
    geometrically_dominant: bool = False


def poisson_expectation(phi, x, eps=1e-12):
    """E[phi(Poi(x))] with absolute error at most ``eps``."""
    if not x >= 0:
        raise DomainError(f"x must be >= 0, got {x}")
    if not eps > 0:
        raise DomainError(f"eps must be > 0, got {eps}")
    return kernels.poisson_expectation(phi.array, phi.tail_slope, float(x), float(eps))


def ratio_at(phi, x, eps=1e-12):
    """alpha(x) = E[phi(Poi(x))] / phi(x), with alpha(0) = 1."""
    if not x >= 0:
        raise DomainError(f"x must be >= 0, got {x}")
    if x == 0:
        return 1.0
    denom = value_at(phi, x)
    # phi(x) >= min(x, 1) for normalized concave phi, so this keeps the ratio error <= eps
    tol = max(eps * min(1.0, denom), sys.float_info.min)
    return poisson_expectation(phi, x, tol) / denom


def curvature_ratio(phi, m):
    """1 - c/e with curvature bound c = 1 - (phi(m) - phi(m-1))."""
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")
    c = 1.0 - (phi.at(m) - phi.at(m - 1))
    return 1.0 - c * math.exp(-1.0)


def scan_bound(eps):
    """Integer N beyond which alpha(x) >= 1 - eps holds for every valid phi."""
    if eps >= 1.0:
        return 1
    return math.ceil((6.0 / eps) ** 4)


def concavity_ratio(phi, eps=DEFAULT_EPS, m_hint=None, max_evals=DEFAULT_MAX_EVALS):
    """Compute alpha_phi and its smallest argmin.

    The result is exact to within ``2 * eps``. ``m_hint`` only selects the
    ``m`` used for the reported curvature ratio (defaults to the horizon).
    """
    if not eps > 0:
        raise DomainError(f"eps must be > 0, got {eps}")
    bound = min(phi.linear_from(), scan_bound(eps))
    if bound > max_evals:
        raise ResourceLimitError(
            f"scan needs {bound} evaluations, cap is {max_evals}"
        )
    try:
        dominant = phi.horizon >= 3 and is_geometrically_dominant(phi, phi.horizon - 2)
    except DomainError:
        dominant = False

    curve = []
    best_x, best = 1, math.inf
    for x in range(1, bound + 1):
        r = ratio_at(phi, x, eps)
        curve.append((x, r))
        if r < best:
            best_x, best = x, r
    if dominant and best_x != 1:
        alpha1 = curve[0][1]
        if alpha1 - best > 2 * eps:
            raise RuntimeError(
                f"dominance implies argmin 1 but alpha({best_x}) = {best} < alpha(1) = {alpha1}"
            )
        best_x, best = 1, alpha1

    m = phi.horizon if m_hint is None else m_hint
    return RatioReport(
        alpha=min(best, 1.0),
        argmin_x=best_x,
        search_bound=bound,
        epsilon=eps,
        curve=curve,
        curvature_ratio=curvature_ratio(phi, m),
        curvature_m=m,
        geometrically_dominant=dominant,
    )


def certified_bound(phi, m, eps=1e-12):
    """min over j in [m] of alpha(j): the guarantee for instances with m sets."""
    return min(ratio_at(phi, j, eps) for j in range(1, m + 1))


def closed_form_ratio(family):
    """Analytic alpha_phi for families that have one, else None."""
    if family is None:
        return None
    if family.kind == "threshold":
        ell = family.l
        return 1.0 - math.exp(ell * math.log(ell) - ell - math.lgamma(ell + 1))
    if family.kind == "geo":
        return -math.expm1(-family.p) / family.p
    if family.kind == "power":
        return power_series_ratio(family.d)
    return None


def power_series_ratio(d):
    """e^{-1} * sum_{k>=1} k^d / k!, stopped once a term drops below 1e-16."""
    total = 0.0
    inv_fact = 1.0
    k = 1
    while True:
        inv_fact /= k
        term = k**d * inv_fact
        total += term
        if term < 1e-16:
            break
        k += 1
    return math.exp(-1.0) * total


def binomial_expectation(phi, k, q):
    """E[phi(Bin(k, q))] as an exact finite sum."""
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"q must lie in [0, 1], got {q}")
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    if k == 0:
        return 0.0
    pmf = stats.binom.pmf(np.arange(k + 1), k, q)
    return float(np.dot(pmf, phi.table(k)))
