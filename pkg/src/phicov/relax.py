"""LP relaxation of phi-MaxCoverage.

Variables are ``x_0..x_{m-1}`` (set indicators relaxed to [0, 1]) followed by
``c_0..c_{n-1}`` (per-element coverage). The concave constraint
``c_a <= phi(|x|_a)`` is written as one row per linear piece
``phi_j(t) = w_j t + phi(j) - j w_j`` with ``w_j = phi(j) - phi(j-1)``.
"""

from dataclasses import dataclass

import numpy as np

from phicov import simplex
from phicov.counting import value_at
from phicov.errors import InfeasibleError

FEAS_TOL = 1e-8


@dataclass
class LPModel:
    m: int
    n: int
    objective: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    upper: np.ndarray
    ub_labels: list
    eq_labels: list

    @property
    def num_vars(self):
        return self.m + self.n

    def census(self):
        """(variables, coverage rows, box rows, equality rows)."""
        return self.num_vars, self.A_ub.shape[0], self.m, self.A_eq.shape[0]

    def var_name(self, v):
        return f"x{v}" if v < self.m else f"c{v - self.m}"


@dataclass
class FractionalSolution:
    x: np.ndarray
    c: np.ndarray
    objective: float


def pieces(phi, m, dedupe=True):
    """[(j, slope, intercept)] for j in 1..m, skipping repeated slopes when ``dedupe``."""
    table = phi.table(m)
    out = []
    prev = None
    for j in range(1, m + 1):
        slope = float(table[j] - table[j - 1])
        if dedupe and prev is not None and slope == prev:
            continue
        out.append((j, slope, float(table[j] - j * slope)))
        prev = slope
    return out


def build_lp(inst, phi, constraint, dedupe=True):
    m, n = inst.m, inst.n
    nv = m + n
    obj = np.zeros(nv)
    obj[m:] = inst.weight_array

    lines = pieces(phi, max(m, 1), dedupe)
    rows, rhs, labels = [], [], []
    for a, members in enumerate(inst.incidence):
        for j, slope, intercept in lines:
            row = np.zeros(nv)
            row[m + a] = 1.0
            if members:
                row[list(members)] = -slope
            rows.append(row)
            rhs.append(intercept)
            labels.append(f"cov[a={a},j={j}]")
    A_ub = np.array(rows).reshape(len(rows), nv)

    parts, caps = constraint.parts(m)
    A_eq = np.zeros((len(parts), nv))
    for p, part in enumerate(parts):
        A_eq[p, list(part)] = 1.0
    eq_labels = [f"part[{p}]" for p in range(len(parts))]

    upper = np.full(nv, np.inf)
    upper[:m] = 1.0
    return LPModel(
        m=m,
        n=n,
        objective=obj,
        A_ub=A_ub,
        b_ub=np.array(rhs, dtype=float),
        A_eq=A_eq,
        b_eq=np.array(caps, dtype=float),
        upper=upper,
        ub_labels=labels,
        eq_labels=eq_labels,
    )


def solve_lp(model):
    """Optimal basic solution; raises InfeasibleError when the model has none."""
    res = simplex.maximize(
        model.objective,
        model.A_ub,
        model.b_ub,
        model.A_eq,
        model.b_eq,
        upper=model.upper,
    )
    x = np.clip(res.x[: model.m], 0.0, 1.0)
    c = res.x[model.m :].copy()
    if model.A_eq.size and np.max(np.abs(model.A_eq @ res.x - model.b_eq)) > FEAS_TOL:
        raise InfeasibleError("simplex returned a point violating the equality rows")
    return FractionalSolution(x=x, c=c, objective=res.objective)


def check_solution(inst, phi, constraint, sol, tol=FEAS_TOL):
    """Raise InfeasibleError if ``sol`` violates the relaxation's constraints."""
    parts, caps = constraint.parts(inst.m)
    for p, (part, d) in enumerate(zip(parts, caps)):
        s = float(sol.x[list(part)].sum())
        if abs(s - d) > tol:
            raise InfeasibleError(f"part {p} sums to {s}, expected {d}")
    if np.any(sol.x < -tol) or np.any(sol.x > 1 + tol):
        raise InfeasibleError("x leaves the unit box")
    for a, members in enumerate(inst.incidence):
        load = float(sol.x[list(members)].sum()) if members else 0.0
        if sol.c[a] > value_at(phi, load) + tol:
            raise InfeasibleError(f"c[{a}] = {sol.c[a]} exceeds phi(|x|_a)")


def _fmt(v):
    return repr(float(v))


def dump(model, path):
    """Write the model as plain text.

    Format, one item per line::

        vars <count>
        var <name> <lower> <upper>
        max <name>:<coef> ...
        row <label> <name>:<coef> ... <= <rhs>
        row <label> <name>:<coef> ... = <rhs>

    Only nonzero coefficients are listed; numbers use Python's shortest
    round-trip repr, ``inf`` for an absent upper bound.
    """
    out = [f"vars {model.num_vars}"]
    for v in range(model.num_vars):
        out.append(f"var {model.var_name(v)} 0.0 {_fmt(model.upper[v])}")

    def terms(row):
        return " ".join(f"{model.var_name(v)}:{_fmt(row[v])}" for v in np.flatnonzero(row))

    out.append(f"max {terms(model.objective)}")
    for label, row, b in zip(model.ub_labels, model.A_ub, model.b_ub):
        out.append(f"row {label} {terms(row)} <= {_fmt(b)}")
    for label, row, b in zip(model.eq_labels, model.A_eq, model.b_eq):
        out.append(f"row {label} {terms(row)} = {_fmt(b)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")
