"""Loss-minimizing envy-free classifiers on a finite sample.

Losses are reported as the *mean* expected loss over the sample, so values
are comparable across sample sizes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lp as _lp
from .core import (
    ENVY_EPS,
    ContractError,
    RandomizedAssignment,
    Sample,
    TableModel,
    _payoffs,
)

DETERMINISTIC_BUDGET = 10**7
_CHUNK_CELLS = 1 << 22


class BudgetExceeded(RuntimeError):
    """An exhaustive search would exceed its configured size budget."""


class ErmSolverError(RuntimeError):
    """The LP solver failed on a program that must be feasible."""


@dataclass
class ErmResult:
    assignment: RandomizedAssignment | None
    loss: float
    status: str

    @property
    def total_loss(self) -> float:
        """Summed (rather than mean) expected loss over the sample."""
        return self.loss * len(self.assignment)


@dataclass
class MixtureFit:
    weights: np.ndarray | None
    loss: float
    status: str


def _instance(S, u, loss, k):
    S = Sample.of(S)
    if len(S) == 0:
        raise ContractError("sample must be nonempty")
    S.require_unique_ids()
    k = getattr(k, "k", k)
    U = _payoffs(u, S)
    L = _payoffs(loss, S)
    if U.shape[1] != k or L.shape[1] != k:
        raise ContractError("utility/loss outcome count does not match k")
    return S, U, L, int(k)


def ef_program(U: np.ndarray, L: np.ndarray) -> _lp.LinearProgram:
    """LP over row-major variables ``p[i, y]`` for the randomized EF ERM."""
    n, k = U.shape
    c = L.reshape(-1) / n
    ii, jj = np.nonzero(~np.eye(n, dtype=bool))
    A = np.zeros((len(ii), n * k))
    r = np.arange(len(ii))[:, None]
    cols = np.arange(k)[None, :]
    A[r, ii[:, None] * k + cols] += U[ii]
    A[r, jj[:, None] * k + cols] -= U[ii]
    E = np.kron(np.eye(n), np.ones((1, k)))
    return _lp.LinearProgram(c=c, A_ge=A, b_ge=np.zeros(len(ii)), A_eq=E, b_eq=np.ones(n))


def solve_randomized_ef_erm(S, u, loss, k) -> ErmResult:
    """Minimum mean-loss randomized classifier that is EF on ``S``.

    Always feasible: giving everyone their favorite outcome is EF.
    """
    S, U, L, k = _instance(S, u, loss, k)
    program = ef_program(U, L)
    favorite = np.arange(len(S)) * k + np.argmax(U, axis=1)
    sol = _lp.solve(program, start=favorite)
    if sol.status != _lp.OPTIMAL:
        raise ErmSolverError(
            f"EF program reported {sol.status} after {sol.iterations} pivots "
            f"(n={len(S)}, k={k}); the favorite assignment is always feasible"
        )
    rows = np.clip(sol.z.reshape(len(S), k), 0.0, None)
    rows /= rows.sum(axis=1, keepdims=True)
    mean_loss = float(np.mean(np.sum(rows * L, axis=1)))
    return ErmResult(RandomizedAssignment(S, rows), mean_loss, _lp.OPTIMAL)


def _assignment_chunks(n, k, total):
    """Yield ``(start, labels)`` blocks of assignments in lexicographic order."""
    powers = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
    chunk = max(1, _CHUNK_CELLS // (n * n))
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        yield start, (codes[:, None] // powers[None, :]) % k


def solve_deterministic_ef_erm(S, u, loss, k, budget: int = DETERMINISTIC_BUDGET) -> ErmResult:
    """Exhaustive search over all ``k**n`` deterministic assignments.

    Ties in loss keep the lexicographically first assignment.
    """
    S, U, L, k = _instance(S, u, loss, k)
    n = len(S)
    total = k**n
    if total > budget:
        raise BudgetExceeded(f"{k}^{n} = {total} assignments exceeds budget {budget}")
    rows = np.arange(n)
    best_loss, best = np.inf, None
    for _, labels in _assignment_chunks(n, k, total):
        # own[a, i] = U[i, a_i]; envy if U[i, a_j] - own[a, i] > eps for some j
        own = U[rows, labels]
        cross = U[rows[None, :, None], labels[:, None, :]]
        ef = np.all(cross - own[:, :, None] <= ENVY_EPS, axis=(1, 2))
        if not ef.any():
            continue
        losses = L[rows, labels[ef]].mean(axis=1)
        a = int(np.argmin(losses))
        if losses[a] < best_loss:
            best_loss, best = float(losses[a]), labels[ef][a]
    if best is None:
        raise ErmSolverError("no deterministic EF assignment found; favorite assignment should be EF")
    return ErmResult(RandomizedAssignment.point_masses(S, best, k), best_loss, _lp.OPTIMAL)


def _labels(components, S):
    return np.stack([np.asarray(g.predict(S), dtype=np.int64) for g in components])


def mixture_program(G: np.ndarray, U: np.ndarray, L: np.ndarray, pairs=None) -> _lp.LinearProgram:
    """LP over mixing weights for fixed component labels ``G`` (m x n).

    ``pairs`` is an optional ``(first_idx, second_idx)`` pair of index arrays;
    the default is every ordered pair of distinct individuals.
    """
    m, n = G.shape
    if pairs is None:
        first, second = np.nonzero(~np.eye(n, dtype=bool))
    else:
        first, second = (np.asarray(p, dtype=np.int64) for p in pairs)
    own = U[first[None, :], G[:, first]]
    other = U[first[None, :], G[:, second]]
    A = (own - other).T
    # rows with no negative coefficient hold for every mixture
    A = A[A.min(axis=1) < -ENVY_EPS]
    if len(A):
        A = np.unique(A, axis=0)
    c = L[np.arange(n)[None, :], G].mean(axis=1)
    return _lp.LinearProgram(
        c=c, A_ge=A, b_ge=np.zeros(len(A)), A_eq=np.ones((1, m)), b_eq=np.ones(1)
    )


def _solve_by_generation(program: _lp.LinearProgram) -> _lp.LpSolution:
    """Solve a program with few variables and many ``>=`` rows lazily.

    Starts from a handful of rows and repeatedly adds the most violated
    ones.  The final answer satisfies every row and is optimal for a
    relaxation, hence optimal for the full program; an infeasible
    relaxation proves the full program infeasible.
    """
    A, b = program.A_ge, program.b_ge
    n_vars = len(program.c)
    batch = 4 * n_vars + 8
    if len(A) <= 4 * batch:
        return _lp.solve(program)
    active = np.zeros(len(A), dtype=bool)
    active[np.argsort(A.min(axis=1), kind="stable")[:batch]] = True
    while True:
        sub = _lp.LinearProgram(c=program.c, A_ge=A[active], b_ge=b[active],
                                A_eq=program.A_eq, b_eq=program.b_eq)
        sol = _lp.solve(sub)
        if sol.status != _lp.OPTIMAL:
            return sol
        slack = A @ sol.z - b
        slack[active] = np.inf
        worst = np.argsort(slack, kind="stable")[:batch]
        worst = worst[slack[worst] < -_lp.FEAS_TOL * 1e-2]
        if len(worst) == 0:
            return sol
        active[worst] = True


def optimize_mixture_weights(components, S, u, loss, pairs=None) -> MixtureFit:
    """Best weights on the simplex for a fixed list of deterministic components."""
    if len(components) < 1:
        raise ContractError("need at least one component")
    S = Sample.of(S)
    U, L = _payoffs(u, S), _payoffs(loss, S)
    G = _labels(components, S)
    sol = _solve_by_generation(mixture_program(G, U, L, pairs))
    if sol.status != _lp.OPTIMAL:
        return MixtureFit(None, float("nan"), _lp.INFEASIBLE)
    w = np.clip(sol.z, 0.0, None)
    w /= w.sum()
    mean_loss = float(L[np.arange(len(S))[None, :], G].mean(axis=1) @ w)
    return MixtureFit(w, mean_loss, _lp.OPTIMAL)



def gap_instance(gamma: float):
    """Two individuals, three outcomes, where randomization is ``gamma`` times cheaper.

    The zero-loss assignment ``(y0, y2)`` makes the first individual envy
    the second; every deterministic EF assignment has total loss at least 1,
    while mixing in ``y1`` with weight ``1/gamma`` is EF at total loss
    ``1/gamma``.  Returns ``(sample, utility, loss, k)``.
    """
    if not gamma > 1:
        raise ContractError("gamma must exceed 1")
    S = Sample([0, 1], np.zeros((2, 0)))
    u = TableModel([0, 1], [[0.0, 1.0, 1.0 / gamma], [0.0, 0.0, 1.0]])
    loss = TableModel([0, 1], [[0.0, 1.0, 1.0], [1.0, 1.0, 0.0]])
    return S, u, loss, 3
