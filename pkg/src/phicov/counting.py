"""Counting functions: normalized, nondecreasing, concave maps from multiplicity to utility.

A :class:`CountingFunction` stores the integer values ``phi(0..L)`` for a finite
horizon ``L`` and a tail slope used to continue ``phi`` linearly beyond ``L``.
Between integers it is the piecewise linear interpolation.

Built-in families are created from descriptor strings::

    threshold:l=<int>        min(j, l)
    pav                      harmonic numbers H_j
    pav-cap:l=<int>          H_min(j, l)
    geo:p=<float>            (1 - (1-p)^j) / p
    geo-cap:p=<float>,l=<int>
    power:d=<float>          j^d
    custom:<v0>,<v1>,...[;tail=<float>]
"""

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from phicov.errors import DomainError, ParseError

DEFAULT_HORIZON = 64
TOL = 1e-12

FAMILY_KINDS = ("threshold", "pav", "pav-cap", "geo", "geo-cap", "power", "custom")


@dataclass(frozen=True)
class Family:
    """Analytic provenance of a counting function."""

    kind: str
    l: int | None = None
    p: float | None = None
    d: float | None = None

    @property
    def capped(self):
        return self.kind in ("threshold", "pav-cap", "geo-cap")

    def spec(self):
        """Descriptor string that rebuilds this family."""
        if self.kind == "threshold":
            return f"threshold:l={self.l}"
        if self.kind == "pav":
            return "pav"
        if self.kind == "pav-cap":
            return f"pav-cap:l={self.l}"
        if self.kind == "geo":
            return f"geo:p={self.p!r}"
        if self.kind == "geo-cap":
            return f"geo-cap:p={self.p!r},l={self.l}"
        if self.kind == "power":
            return f"power:d={self.d!r}"
        raise ValueError(f"no descriptor for family {self.kind!r}")

    def value(self, j):
        """phi(j) at a nonnegative integer, straight from the family formula."""
        k = self.kind
        if k == "threshold":
            return float(min(j, self.l))
        if k in ("pav", "pav-cap"):
            top = j if k == "pav" else min(j, self.l)
            return math.fsum(1.0 / i for i in range(1, top + 1))
        if k in ("geo", "geo-cap"):
            top = j if k == "geo" else min(j, self.l)
            return -math.expm1(top * math.log1p(-self.p)) / self.p
        if k == "power":
            return float(j) ** self.d if j > 0 else 0.0
        raise ValueError(f"family {k!r} has no formula")

    def increment(self, i):
        """w_i = phi(i) - phi(i-1) for i >= 1, without cancellation where possible."""
        k = self.kind
        if k == "threshold":
            return 1.0 if i <= self.l else 0.0
        if k == "pav":
            return 1.0 / i
        if k == "pav-cap":
            return 1.0 / i if i <= self.l else 0.0
        if k == "geo":
            return (1.0 - self.p) ** (i - 1)
        if k == "geo-cap":
            return (1.0 - self.p) ** (i - 1) if i <= self.l else 0.0
        if k == "power":
            return float(i) ** self.d - float(i - 1) ** self.d
        raise ValueError(f"family {k!r} has no formula")


@dataclass(frozen=True)
class CountingFunction:
    """phi(0..L) plus a linear tail.

    Construction does not validate; use :func:`validate` or build through
    :func:`make_family` / :func:`from_values`, which do.
    """

    values: tuple
    tail_slope: float
    family: Family | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "tail_slope", float(self.tail_slope))
        if len(self.values) < 2:
            raise DomainError("a counting function needs at least phi(0) and phi(1)")

    @property
    def horizon(self):
        return len(self.values) - 1

    @cached_property
    def array(self):
        a = np.asarray(self.values, dtype=float)
        a.setflags(write=False)
        return a

    @property
    def spec(self):
        if self.family is not None and self.family.kind != "custom":
            return self.family.spec()
        body = ",".join(repr(v) for v in self.values)
        return f"custom:{body};tail={self.tail_slope!r}"

    def at(self, j):
        """phi at a nonnegative integer, including the linear tail."""
        L = self.horizon
        if j <= L:
            return self.values[j]
        return self.values[L] + self.tail_slope * (j - L)

    def increment(self, i):
        """w_i = phi(i) - phi(i-1) for i >= 1."""
        if self.family is not None and self.family.kind != "custom":
            return self.family.increment(i)
        if i > self.horizon:
            return self.tail_slope
        return self.values[i] - self.values[i - 1]

    def table(self, upto):
        """numpy array phi(0..upto), extended through the tail when needed."""
        if upto <= self.horizon:
            return self.array[: upto + 1]
        extra = self.values[-1] + self.tail_slope * np.arange(1, upto - self.horizon + 1)
        return np.concatenate([self.array, extra])

    def extended(self, horizon):
        """Same function with at least ``horizon`` explicit values.

        Family functions are regenerated from their formula, custom ones are
        continued along the tail.
        """
        if horizon <= self.horizon:
            return self
        if self.family is not None and self.family.kind != "custom":
            return _build_family(self.family, horizon)
        return CountingFunction(tuple(self.table(horizon)), self.tail_slope, self.family)

    def linearized_at(self, m):
        """phi on [0, m], continued linearly with slope phi(m) - phi(m-1).

        This is the function an instance with ``m`` cover sets actually sees.
        """
        if m < 1:
            raise DomainError("m must be >= 1")
        vals = tuple(self.at(j) for j in range(m + 1))
        return CountingFunction(vals, vals[m] - vals[m - 1], Family("custom"))

    def linear_from(self):
        """Smallest l >= 1 such that phi is affine on [l, inf)."""
        L = self.horizon
        ell = L
        while ell > 1 and abs(self.increment(ell) - self.tail_slope) <= TOL:
            ell -= 1
        return ell


def value_at(phi, x):
    """Piecewise linear extension of ``phi`` at a real ``x >= 0``."""
    if x < 0 or math.isnan(x):
        raise DomainError(f"phi is defined on x >= 0, got {x}")
    L = phi.horizon
    if x >= L:
        return phi.values[L] + phi.tail_slope * (x - L)
    lo = math.floor(x)
    frac = x - lo
    if frac == 0.0:
        return phi.values[lo]
    return (1.0 - frac) * phi.values[lo] + frac * phi.values[lo + 1]


def validate(phi):
    """List the violated invariants of ``phi``; empty when it is valid."""
    v = phi.values
    out = []
    if abs(v[0]) > TOL:
        out.append(f"phi(0) = {v[0]!r} != 0")
    if abs(v[1] - 1.0) > TOL:
        out.append(f"phi(1) = {v[1]!r} != 1")
    for j in range(len(v) - 1):
        if v[j + 1] < v[j] - TOL:
            out.append(f"monotonicity at j={j}: phi({j + 1}) < phi({j})")
    if phi.tail_slope < -TOL:
        out.append(f"tail_slope = {phi.tail_slope!r} < 0")
    for j in range(len(v) - 2):
        if v[j + 2] - v[j + 1] > v[j + 1] - v[j] + TOL:
            out.append(
                f"concavity at j={j}: phi({j + 2}) - phi({j + 1}) > phi({j + 1}) - phi({j})"
            )
    L = len(v) - 1
    if phi.tail_slope > v[L] - v[L - 1] + TOL:
        out.append(f"concavity at tail: tail_slope > phi({L}) - phi({L - 1})")
    return out


def is_geometrically_dominant(phi, up_to):
    """True iff w_i * w_{i+2} >= w_{i+1}^2 for 1 <= i <= up_to.

    Raises DomainError when a zero increment occurs in the checked range,
    where dominance is undefined.
    """
    if up_to < 1:
        raise DomainError("up_to must be >= 1")
    if up_to + 2 > phi.horizon:
        raise DomainError(f"up_to + 2 = {up_to + 2} exceeds horizon {phi.horizon}")
    w = [phi.increment(i) for i in range(1, up_to + 3)]
    for i, wi in enumerate(w, start=1):
        if wi <= 0.0:
            raise DomainError(f"zero increment w_{i}; geometric dominance undefined")
    for i in range(up_to):
        lhs = w[i] * w[i + 2]
        rhs = w[i + 1] * w[i + 1]
        if lhs < rhs * (1.0 - TOL):
            return False
    return True


def _build_family(fam, horizon):
    if fam.l is not None:
        horizon = max(horizon, fam.l + 1)
    vals = tuple(fam.value(j) for j in range(horizon + 1))
    tail = 0.0 if fam.capped else fam.increment(horizon)
    return CountingFunction(vals, tail, fam)


def _parse_params(body, allowed, spec):
    out = {}
    if not body:
        return out
    for part in body.split(","):
        key, sep, raw = part.partition("=")
        key = key.strip()
        if not sep or key not in allowed:
            raise ParseError(f"bad parameter {part!r} in {spec!r}")
        if key in out:
            raise ParseError(f"duplicate parameter {key!r} in {spec!r}")
        try:
            out[key] = int(raw) if key == "l" else float(raw)
        except ValueError:
            raise ParseError(f"cannot parse {key}={raw!r} in {spec!r}") from None
    return out


def parse_family(spec):
    """Parse a descriptor into a :class:`Family` (custom values excluded)."""
    if not isinstance(spec, str) or not spec.strip():
        raise ParseError("empty family descriptor")
    spec = spec.strip()
    kind, _, body = spec.partition(":")
    required = {
        "threshold": {"l"},
        "pav": set(),
        "pav-cap": {"l"},
        "geo": {"p"},
        "geo-cap": {"p", "l"},
        "power": {"d"},
    }
    if kind == "custom":
        return Family("custom")
    if kind not in required:
        raise ParseError(f"unknown family {kind!r} in {spec!r}")
    params = _parse_params(body, required[kind], spec)
    missing = required[kind] - params.keys()
    if missing:
        raise ParseError(f"missing parameter(s) {sorted(missing)} in {spec!r}")
    if "l" in params and params["l"] < 1:
        raise DomainError(f"l must be a positive integer, got {params['l']}")
    for key in ("p", "d"):
        if key in params and not 0.0 < params[key] < 1.0:
            raise DomainError(f"{key} must lie in (0, 1), got {params[key]}")
    return Family(kind, **params)


def _parse_custom(spec):
    body = spec.strip().partition(":")[2]
    vals_raw, _, tail_raw = body.partition(";")
    try:
        vals = [float(t) for t in vals_raw.split(",") if t.strip()]
    except ValueError:
        raise ParseError(f"cannot parse custom values in {spec!r}") from None
    if len(vals) < 2:
        raise ParseError(f"custom function needs at least two values: {spec!r}")
    if tail_raw:
        key, sep, raw = tail_raw.partition("=")
        if key.strip() != "tail" or not sep:
            raise ParseError(f"bad tail clause {tail_raw!r} in {spec!r}")
        try:
            tail = float(raw)
        except ValueError:
            raise ParseError(f"cannot parse tail {raw!r} in {spec!r}") from None
    else:
        tail = vals[-1] - vals[-2]
    return from_values(vals, tail)


def from_values(values, tail_slope=None):
    """Validated custom counting function from explicit values."""
    values = [float(v) for v in values]
    if len(values) < 2:
        raise DomainError("need at least phi(0) and phi(1)")
    if tail_slope is None:
        tail_slope = values[-1] - values[-2]
    phi = CountingFunction(tuple(values), tail_slope, Family("custom"))
    problems = validate(phi)
    if problems:
        raise DomainError("invalid counting function: " + "; ".join(problems))
    return phi


def make_family(spec, horizon=DEFAULT_HORIZON):
    """Build a validated counting function from a descriptor string."""
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    fam = parse_family(spec)
    if fam.kind == "custom":
        return _parse_custom(spec)
    phi = _build_family(fam, horizon)
    problems = validate(phi)
    if problems:
        raise DomainError(f"{spec!r} produced an invalid function: " + "; ".join(problems))
    return phi
