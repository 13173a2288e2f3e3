"""Dense two-phase simplex for small linear programs.

Problems are stated as::

    minimize    c @ z
    subject to  A_ge @ z >= b_ge
                A_eq @ z == b_eq
                lower <= z <= upper

with finite lower bounds (default 0) and optional upper bounds (default
``inf``).  Pricing is Dantzig's most-negative reduced cost, switching to
Bland's rule after a run of degenerate pivots so the method cannot cycle.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-7
ROUNDOFF = 1e-13
STALL_LIMIT = 50
HARRIS_TOL = 1e-9
RELATIVE_PIVOT = 1e-6
DRIFT_CHECK_EVERY = 50
DRIFT_TOL = 1e-9

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class LpError(RuntimeError):
    """The solver hit an internal limit (never raised for infeasible/unbounded)."""


@dataclass
class LinearProgram:
    c: np.ndarray
    A_ge: np.ndarray | None = None
    b_ge: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        n = len(self.c)
        self.A_ge, self.b_ge = _rows(self.A_ge, self.b_ge, n, "A_ge")
        self.A_eq, self.b_eq = _rows(self.A_eq, self.b_eq, n, "A_eq")
        self.lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float)
        self.upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float)
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise ValueError("bounds must have one entry per variable")
        if not np.all(np.isfinite(self.lower)):
            raise ValueError("lower bounds must be finite")
        for arr in (self.c, self.A_ge, self.b_ge, self.A_eq, self.b_eq, self.upper):
            if np.any(np.isnan(arr)):
                raise ValueError("NaN in linear program")

    @property
    def n_vars(self) -> int:
        return len(self.c)

    def residual(self, z) -> float:
        """Largest constraint or bound violation at ``z``."""
        z = np.asarray(z, dtype=float)
        parts = [0.0]
        if len(self.b_ge):
            parts.append(float(np.max(self.b_ge - self.A_ge @ z)))
        if len(self.b_eq):
            parts.append(float(np.max(np.abs(self.A_eq @ z - self.b_eq))))
        parts.append(float(np.max(self.lower - z, initial=0.0)))
        fin = np.isfinite(self.upper)
        if fin.any():
            parts.append(float(np.max(z[fin] - self.upper[fin])))
        return max(parts)


def _rows(A, b, n, name):
    if A is None:
        return np.zeros((0, n)), np.zeros(0)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    if A.size == 0:
        A = A.reshape(0, n)
    if A.shape[1] != n or A.shape[0] != len(b):
        raise ValueError(f"{name} has shape {A.shape}, expected (len(b), {n})")
    return A, b


@dataclass
class LpSolution:
    status: str
    z: np.ndarray = field(default_factory=lambda: np.zeros(0))
    objective_value: float = float("nan")
    iterations: int = 0


class _Tableau:
    def __init__(self, T, basis):
        self.T = T
        self.original = T.copy()
        self.basis = basis
        self.iterations = 0

    def refactor(self):
        """Rebuild the tableau from the original rows to shed round-off."""
        B = self.original[:, self.basis]
        try:
            self.T[:] = np.linalg.solve(B, self.original)
        except np.linalg.LinAlgError:
            return
        self.T[np.abs(self.T) < ROUNDOFF] = 0.0
        rhs = self.T[:, -1]
        rhs[(rhs < 0) & (rhs > -FEAS_TOL)] = 0.0

    def drift(self) -> float:
        """Residual of the current basic solution against the original rows."""
        x = self.T[:, -1]
        return float(np.max(np.abs(self.original[:, self.basis] @ x - self.original[:, -1]), initial=0.0))

    def restrict(self, keep_rows, n_cols):
        """Drop rows and trailing (artificial) columns after phase one."""
        def cut(X):
            return np.hstack([X[keep_rows][:, :n_cols], X[keep_rows][:, -1:]])
        self.T = cut(self.T)
        self.original = cut(self.original)
        self.basis = self.basis[keep_rows]

    def pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        rows = np.nonzero(col)[0]
        cols = np.nonzero(T[r])[0]
        if len(rows) and len(cols):
            # only the (rows x cols) block changes; tableaux here stay sparse
            block = T[np.ix_(rows, cols)] - np.outer(col[rows], T[r, cols])
            block[np.abs(block) < ROUNDOFF] = 0.0
            T[np.ix_(rows, cols)] = block
        T[rows, j] = 0.0
        rhs = T[:, -1]
        rhs[(rhs < 0) & (rhs > -FEAS_TOL)] = 0.0
        self.basis[r] = j
        self.iterations += 1

    def run(self, cost, max_iter, rule):
        """Minimize ``cost`` from the current basis.  Returns False if unbounded.

        ``rule="bland"`` always uses Bland's smallest-index rule.  ``"hybrid"``
        prices by most negative reduced cost and falls back to Bland's rule
        after STALL_LIMIT consecutive degenerate pivots, until the objective
        strictly improves again; cycling is therefore impossible.
        """
        T = self.T
        stall = 0
        since_refactor = 0
        red = None
        while True:
            if self.iterations >= max_iter:
                raise LpError(f"simplex exceeded {max_iter} pivots")
            if since_refactor >= DRIFT_CHECK_EVERY:
                if self.drift() > DRIFT_TOL:
                    self.refactor()
                    red = None
                since_refactor = 0
            if red is None:
                # reduced costs r_j = cost_j - cost_B @ T[:, j]
                red = cost - cost[self.basis] @ T[:, :-1]
                red[self.basis] = 0.0
            cand = np.nonzero(red < -PIVOT_TOL)[0]
            if len(cand) == 0:
                if since_refactor and self.drift() > DRIFT_TOL:
                    # confirm optimality on a freshly factored tableau
                    self.refactor()
                    since_refactor = 0
                    red = None
                    continue
                return True
            bland = rule == "bland" or stall >= STALL_LIMIT
            j = cand[0] if bland else cand[np.argmin(red[cand])]
            colj = T[:, j]
            rows = np.nonzero(colj > PIVOT_TOL)[0]
            if len(rows) == 0:
                return False
            r, step = self._leaving_row(rows, colj, bland)
            stall = stall + 1 if step <= PIVOT_TOL else 0
            self.pivot(r, j)
            since_refactor += 1
            red -= red[j] * T[r, :-1]
            red[self.basis] = 0.0

    def _leaving_row(self, rows, colj, bland):
        """Harris two-pass ratio test.

        Pass one bounds the step with every row allowed to go HARRIS_TOL
        infeasible; pass two picks, among rows reaching that bound, the
        largest pivot (or with Bland's rule the smallest basic index among
        pivots that are not tiny relative to the largest).
        """
        rhs = self.T[rows, -1]
        a = colj[rows]
        bound = np.min((rhs + HARRIS_TOL) / a)
        ratios = rhs / a
        ok = ratios <= bound
        cand, a_ok = rows[ok], a[ok]
        if bland:
            big = a_ok >= RELATIVE_PIVOT * a_ok.max()
            cand, a_ok = cand[big], a_ok[big]
            r = cand[np.argmin(self.basis[cand])]
        else:
            r = cand[np.argmax(a_ok)]
        return r, max(float(self.T[r, -1] / colj[r]), 0.0)

    def crash(self, columns, rows):
        """Pivot hinted ``columns`` into ``rows`` (artificial rows) where possible."""
        T = self.T
        free = list(rows)
        for j in columns:
            best, r = PIVOT_TOL, None
            for i in free:
                if abs(T[i, j]) > best:
                    best, r = abs(T[i, j]), i
            if r is not None:
                self.pivot(r, j)
                free.remove(r)
        return np.all(T[:, -1] >= -FEAS_TOL)


def _initial_tableau(M, b, n):
    """Slack basis where a slack enters a row with +1, artificials elsewhere."""
    m, cols = M.shape
    basis = np.full(m, -1, dtype=np.int64)
    for i in range(m):
        for c in np.nonzero(M[i, n:] == 1.0)[0]:
            if np.count_nonzero(M[:, n + c]) == 1:
                basis[i] = n + c
                break
    need_art = np.nonzero(basis < 0)[0]
    T = np.zeros((m, cols + len(need_art) + 1))
    T[:, :cols] = M
    T[:, -1] = b
    for a, i in enumerate(need_art):
        T[i, cols + a] = 1.0
        basis[i] = cols + a
    return _Tableau(T, basis), need_art


def solve(lp: LinearProgram, max_iter: int = 200_000, rule: str = "hybrid",
          start=None) -> LpSolution:
    """Solve ``lp``; deterministic for a fixed input.

    ``start`` optionally lists variable indices expected to be basic at a
    known feasible vertex.  They are pivoted in before phase one; if the
    resulting basis is feasible, phase one finishes without further pivots.
    """
    if rule not in ("bland", "hybrid"):
        raise ValueError(f"unknown pivot rule {rule!r}")
    n = lp.n_vars
    lo, hi = lp.lower, lp.upper
    if np.any(hi < lo - FEAS_TOL):
        return LpSolution(INFEASIBLE)

    # shift z = lo + w, w >= 0
    rows, rhs, kinds = [], [], []
    if len(lp.b_ge):
        rows.append(lp.A_ge)
        rhs.append(lp.b_ge - lp.A_ge @ lo)
        kinds += ["ge"] * len(lp.b_ge)
    if len(lp.b_eq):
        rows.append(lp.A_eq)
        rhs.append(lp.b_eq - lp.A_eq @ lo)
        kinds += ["eq"] * len(lp.b_eq)
    ub = np.nonzero(np.isfinite(hi))[0]
    if len(ub):
        U = np.zeros((len(ub), n))
        U[np.arange(len(ub)), ub] = 1.0
        rows.append(U)
        rhs.append(hi[ub] - lo[ub])
        kinds += ["le"] * len(ub)

    if not kinds:
        # only bounds: each variable goes to whichever bound the cost prefers
        if np.any((lp.c < 0) & ~np.isfinite(hi)):
            return LpSolution(UNBOUNDED, z=lo.copy())
        z = np.where(lp.c < 0, hi, lo)
        return LpSolution(OPTIMAL, z=z, objective_value=float(lp.c @ z))

    A = np.vstack(rows)
    b = np.concatenate(rhs)
    m = len(b)
    n_slack = sum(k != "eq" for k in kinds)
    # slack columns: ge rows get -1 (surplus), le rows get +1
    S = np.zeros((m, n_slack))
    s = 0
    for i, kind in enumerate(kinds):
        if kind == "ge":
            S[i, s] = -1.0
            s += 1
        elif kind == "le":
            S[i, s] = 1.0
            s += 1
    M = np.hstack([A, S])
    # flip rows so b >= 0; a >= row with b == 0 is flipped too so that its
    # surplus column becomes a +1 slack usable as a starting basic variable
    is_ge = np.array([k == "ge" for k in kinds])
    neg = (b < 0) | (is_ge & (b == 0))
    M[neg] *= -1.0
    b = np.where(neg, -b, b)

    tab, need_art = _initial_tableau(M, b, n)
    n_art = len(need_art)
    width = n + n_slack + n_art
    T = tab.T

    if n_art:
        if start is not None and not tab.crash([int(j) for j in start], list(need_art)):
            # hint was not a feasible vertex; fall back to the slack basis
            tab, _ = _initial_tableau(M, b, n)
            T = tab.T
        cost1 = np.zeros(width)
        cost1[n + n_slack:] = 1.0
        tab.run(cost1, max_iter, rule)
        basis = tab.basis
        infeas = float(T[basis >= n + n_slack, -1].sum())
        if infeas > FEAS_TOL * max(1.0, float(np.abs(b).max())):
            return LpSolution(INFEASIBLE, iterations=tab.iterations)
        # drive remaining artificials out of the basis, dropping redundant rows
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if tab.basis[i] >= n + n_slack:
                nz = np.nonzero(np.abs(T[i, : n + n_slack]) > PIVOT_TOL)[0]
                if len(nz):
                    tab.pivot(i, nz[0])
                else:
                    keep[i] = False
        tab.restrict(keep, n + n_slack)
        T = tab.T
        width = n + n_slack

    cost2 = np.zeros(width)
    cost2[:n] = lp.c
    if not tab.run(cost2, max_iter, rule):
        return LpSolution(UNBOUNDED, iterations=tab.iterations)

    w = np.zeros(width)
    w[tab.basis] = tab.T[:, -1]
    w = np.where((w < 0) & (w > -FEAS_TOL), 0.0, w)
    z = lo + w[:n]
    z = np.where((z > hi) & (z <= hi + FEAS_TOL), hi, z)
    res = lp.residual(z)
    if res > FEAS_TOL * max(1.0, float(np.abs(b).max())):
        raise LpError(f"solution residual {res:.3g} exceeds tolerance")
    return LpSolution(OPTIMAL, z=z, objective_value=float(lp.c @ z), iterations=tab.iterations)
