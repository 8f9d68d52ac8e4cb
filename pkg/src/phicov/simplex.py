"""Dense two-phase primal simplex.

Dantzig's rule picks the entering column until the method stalls on a run
of degenerate pivots, after which Bland's rule takes over for the rest of
the phase; that combination cannot cycle. All choices break ties by the
smallest variable index, so results are deterministic.
"""

from dataclasses import dataclass

import numpy as np

from phicov.errors import InfeasibleError

PIVOT_TOL = 1e-9
COST_TOL = 1e-10
FEAS_TOL = 1e-8
DEGENERATE_RUN = 25


@dataclass
class SimplexResult:
    x: np.ndarray
    objective: float
    iterations: int


class UnboundedError(RuntimeError):
    pass


class _Tableau:
    def __init__(self, A, b, basis):
        self.T = np.hstack([A, b[:, None]]).astype(float)
        self.basis = list(basis)
        self.iterations = 0

    def pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        nz = np.flatnonzero(np.abs(col) > 0.0)
        if nz.size:
            T[nz] -= np.outer(col[nz], T[r])
        T[:, j] = 0.0
        T[r, j] = 1.0
        self.basis[r] = j
        self.iterations += 1

    def reduced_row(self, cost, ncols):
        """row0 = c_B B^-1 A - c; the column with the most negative entry improves."""
        cb = cost[self.basis]
        row = cb @ self.T[:, :ncols] - cost[:ncols]
        return row, float(cb @ self.T[:, -1])

    def optimize(self, cost, allowed, max_iter):
        ncols = len(allowed)
        bland = False
        degenerate = 0
        while True:
            row, _ = self.reduced_row(cost, ncols)
            row[~allowed] = 0.0
            candidates = np.flatnonzero(row < -COST_TOL)
            if candidates.size == 0:
                return
            if bland:
                j = int(candidates[0])
            else:
                j = int(candidates[np.argmin(row[candidates])])
            col = self.T[:, j]
            pos = np.flatnonzero(col > PIVOT_TOL)
            if pos.size == 0:
                raise UnboundedError(f"column {j} is unbounded")
            ratios = self.T[pos, -1] / col[pos]
            best = ratios.min()
            ties = pos[ratios <= best + 1e-12 * max(1.0, abs(best))]
            r = int(min(ties, key=lambda i: self.basis[i]))
            if best <= 1e-12:
                degenerate += 1
                if degenerate >= DEGENERATE_RUN:
                    bland = True
            else:
                degenerate = 0
            self.pivot(r, j)
            if self.iterations > max_iter:
                raise RuntimeError("simplex iteration limit reached")


def maximize(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, upper=None, max_iter=100_000):
    """Maximize c @ v subject to A_ub v <= b_ub, A_eq v = b_eq, 0 <= v <= upper."""
    c = np.asarray(c, dtype=float)
    nv = c.size
    blocks, rhs, senses = [], [], []

    def add(A, b, sense):
        if A is None:
            return
        A = np.atleast_2d(np.asarray(A, dtype=float))
        if A.size == 0:
            return
        blocks.append(A)
        rhs.append(np.asarray(b, dtype=float))
        senses.extend([sense] * A.shape[0])

    add(A_ub, b_ub, "<=")
    if upper is not None:
        upper = np.asarray(upper, dtype=float)
        finite = np.flatnonzero(np.isfinite(upper))
        if finite.size:
            U = np.zeros((finite.size, nv))
            U[np.arange(finite.size), finite] = 1.0
            add(U, upper[finite], "<=")
    add(A_eq, b_eq, "=")
    if not blocks:
        if np.any(c > 0):
            raise UnboundedError("no constraints")
        return SimplexResult(np.zeros(nv), 0.0, 0)

    A = np.vstack(blocks)
    b = np.concatenate(rhs)
    senses = np.array(senses)
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1
    senses[flip & (senses == "<=")] = ">="
    R = A.shape[0]

    n_slack = int(np.sum(senses != "="))
    n_art = int(np.sum(senses != "<="))
    ncols = nv + n_slack + n_art
    full = np.zeros((R, ncols))
    full[:, :nv] = A
    basis = []
    s = nv
    art = nv + n_slack
    art_cols = []
    for i, sense in enumerate(senses):
        if sense == "<=":
            full[i, s] = 1.0
            basis.append(s)
            s += 1
        elif sense == ">=":
            full[i, s] = -1.0
            s += 1
            full[i, art] = 1.0
            basis.append(art)
            art_cols.append(art)
            art += 1
        else:
            full[i, art] = 1.0
            basis.append(art)
            art_cols.append(art)
            art += 1

    tab = _Tableau(full, b, basis)
    is_art = np.zeros(ncols, dtype=bool)
    is_art[art_cols] = True

    if n_art:
        phase1 = np.zeros(ncols)
        phase1[is_art] = -1.0
        tab.optimize(phase1, np.ones(ncols, dtype=bool), max_iter)
        _, infeas = tab.reduced_row(phase1, ncols)
        if infeas < -FEAS_TOL * max(1.0, float(np.abs(b).max())):
            raise InfeasibleError(f"phase one ended with infeasibility {-infeas:.3g}")
        # drive zero-level artificials out of the basis; drop redundant rows
        keep = []
        for r in range(R):
            if not is_art[tab.basis[r]]:
                keep.append(r)
                continue
            cand = np.flatnonzero((np.abs(tab.T[r, :ncols]) > PIVOT_TOL) & ~is_art)
            if cand.size:
                tab.pivot(r, int(cand[0]))
                keep.append(r)
        tab.T = tab.T[keep]
        tab.basis = [tab.basis[r] for r in keep]

    cost = np.zeros(ncols)
    cost[:nv] = c
    tab.optimize(cost, ~is_art, max_iter)

    v = np.zeros(ncols)
    v[tab.basis] = tab.T[:, -1]
    x = v[:nv]
    x[np.abs(x) < 1e-13] = 0.0
    return SimplexResult(x=x, objective=float(c @ x), iterations=tab.iterations)
