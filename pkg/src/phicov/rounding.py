"""Multilinear extension and pipage rounding, plus the end-to-end LP solve."""

from dataclasses import dataclass, field

import numpy as np

from phicov import kernels
from phicov.errors import InfeasibleError
from phicov.instance import is_feasible, selection_value
from phicov.poisson import certified_bound
from phicov.relax import build_lp, check_solution, solve_lp

SNAP_TOL = 1e-9
FEAS_TOL = 1e-8
GUARANTEE_TOL = 1e-6


def _check_probs(probs):
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or np.any(p < 0) or np.any(p > 1):
        raise ValueError("probabilities must be a vector in [0, 1]")
    return p


def pb_distribution(probs):
    """Poisson-binomial pmf over 0..d by iterative convolution."""
    return kernels.pb_convolve(_check_probs(probs))


def pb_distribution_dft(probs):
    """Same pmf via the roots-of-unity formula; kept as a cross-check only."""
    p = _check_probs(probs)
    N = p.size + 1
    omega = np.exp(2j * np.pi * np.arange(N) / N)
    G = np.prod(1.0 + np.outer(omega - 1.0, p), axis=1) if p.size else np.ones(1)
    # fft sums G_l * omega^{-lk}
    dist = np.fft.fft(G).real / N
    dist[dist < 0.0] = 0.0
    return dist


def _phi_table(inst, phi):
    return phi.table(max(inst.max_degree, 1))


def multilinear_value(inst, phi, x, table=None):
    """F(x) = sum_a w_a E[phi(|X|_a)] for independent X_i ~ Bernoulli(x_i)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (inst.m,):
        raise ValueError(f"x must have length {inst.m}")
    if np.any(x < -SNAP_TOL) or np.any(x > 1 + SNAP_TOL):
        raise ValueError("x must lie in the unit box")
    if table is None:
        table = _phi_table(inst, phi)
    indptr, indices = inst.csr
    return kernels.multilinear(indptr, indices, np.clip(x, 0.0, 1.0), inst.weight_array, table)


def _snap(x):
    x[np.abs(x) <= SNAP_TOL] = 0.0
    x[np.abs(x - 1.0) <= SNAP_TOL] = 1.0
    return x


def check_base(constraint, x, tol=FEAS_TOL):
    m = x.size
    if np.any(x < -tol) or np.any(x > 1 + tol):
        raise InfeasibleError("x leaves the unit box")
    parts, caps = constraint.parts(m)
    for p, (part, d) in enumerate(zip(parts, caps)):
        s = float(x[list(part)].sum())
        if abs(s - d) > tol:
            raise InfeasibleError(f"part {p} sums to {s}, expected {d}")


def pipage_round(inst, phi, x, constraint, trajectory=None):
    """Round a base-polytope point to a base without decreasing F.

    Each step takes the lexicographically smallest fractional pair (i, j)
    sharing a part and moves along e_i - e_j to whichever extreme point has
    the larger F (ties raise x_i). ``trajectory``, if given, receives one
    dict per step. Returns the selected indices.
    """
    x = np.array(x, dtype=float)
    check_base(constraint, x)
    x = _snap(np.clip(x, 0.0, 1.0))
    table = _phi_table(inst, phi)
    parts, _ = constraint.parts(inst.m)
    part_of = np.empty(inst.m, dtype=np.int64)
    for p, part in enumerate(parts):
        part_of[list(part)] = p

    F = multilinear_value(inst, phi, x, table)
    if trajectory is not None:
        trajectory.append({"step": 0, "i": None, "j": None, "F": F})
    step = 0
    while True:
        frac = np.flatnonzero((x > 0.0) & (x < 1.0))
        pair = None
        for t, i in enumerate(frac):
            mates = frac[t + 1 :][part_of[frac[t + 1 :]] == part_of[i]]
            if mates.size:
                pair = int(i), int(mates[0])
                break
        if pair is None:
            break
        i, j = pair
        up = x.copy()
        d = min(1.0 - x[i], x[j])
        up[i] += d
        up[j] -= d
        if 1.0 - x[i] <= x[j]:
            up[i] = 1.0
        else:
            up[j] = 0.0
        down = x.copy()
        d = min(x[i], 1.0 - x[j])
        down[i] -= d
        down[j] += d
        if x[i] <= 1.0 - x[j]:
            down[i] = 0.0
        else:
            down[j] = 1.0
        f_up = multilinear_value(inst, phi, _snap(up), table)
        f_down = multilinear_value(inst, phi, _snap(down), table)
        best = max(f_up, f_down)
        # F is convex along e_i - e_j, so an endpoint is never below the start
        if best < F - SNAP_TOL * (1.0 + abs(F)):
            raise RuntimeError(f"pipage step ({i}, {j}) lowered F from {F} to {best}")
        x, F = (up, f_up) if f_up >= f_down else (down, f_down)
        step += 1
        if trajectory is not None:
            trajectory.append({"step": step, "i": i, "j": j, "F": F})
        if step > inst.m:
            raise RuntimeError("pipage did not terminate within m steps")

    selected = tuple(int(i) for i in np.flatnonzero(x > 0.5))
    if not is_feasible(constraint, inst.m, selected):
        raise InfeasibleError("pipage produced an infeasible selection")
    return selected


@dataclass
class SolveResult:
    selection: object
    lp_objective: float
    multilinear_at_lp: float
    certified_ratio_bound: float
    method: str
    trajectory: list = field(default_factory=list, repr=False)
    lp_model: object = field(default=None, repr=False)


def solve(inst, phi, constraint):
    """LP relaxation, pipage rounding and the certified bound min_j alpha(j)."""
    constraint.check(inst.m)
    phi = phi.extended(inst.m + 2)
    model = build_lp(inst, phi, constraint)
    sol = solve_lp(model)
    check_solution(inst, phi, constraint, sol)
    f_lp = multilinear_value(inst, phi, sol.x)
    trajectory = []
    selected = pipage_round(inst, phi, sol.x, constraint, trajectory)
    sel = selection_value(inst, phi, selected)
    bound = certified_bound(phi, inst.m)
    if sel.value < f_lp - GUARANTEE_TOL:
        raise RuntimeError(f"rounded value {sel.value} below F(x*) = {f_lp}")
    if sel.value < bound * sol.objective - GUARANTEE_TOL:
        raise RuntimeError(
            f"rounded value {sel.value} below {bound} * LP optimum {sol.objective}"
        )
    return SolveResult(
        selection=sel,
        lp_objective=sol.objective,
        multilinear_at_lp=f_lp,
        certified_ratio_bound=bound,
        method="lp-pipage",
        trajectory=trajectory,
        lp_model=model,
    )

