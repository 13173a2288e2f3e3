"""Deterministic classifier families, mixtures over them, and their combinatorics.

Deterministic classifiers expose ``predict(sample) -> int labels`` and a
label-space size ``k``.  Finite families are analysed through their label
matrix on a fixed domain (one row per member, one column per point).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import erm
from .core import (
    SIMPLEX_ATOL,
    ContractError,
    FavoriteClassifier,
    Sample,
    _payoffs,
    one_hot,
)

COVER_BUDGET = 10**7
FAMILY_BUDGET = 10**4
DOMAIN_BUDGET = 20


class BudgetExceeded(RuntimeError):
    """An enumeration would exceed its configured size budget."""


# ---------------------------------------------------------------------------
# Deterministic classifiers


class OneHotFeatureMap:
    """``Psi(x, y) = e_y (x) [x, 1]``: one weight block per outcome.

    With this map a linear-argmax classifier is a one-vs-all linear scorer,
    and the weight dimension is ``k * (q + 1)``.
    """

    def __init__(self, k: int, q: int, bias: bool = True):
        self.k, self.q, self.bias = int(k), int(q), bias
        self.dim = self.k * (self.q + int(bias))

    def __call__(self, features: np.ndarray) -> np.ndarray:
        n = len(features)
        x = np.hstack([features, np.ones((n, 1))]) if self.bias else features
        width = x.shape[1]
        out = np.zeros((n, self.k, self.dim))
        for y in range(self.k):
            out[:, y, y * width:(y + 1) * width] = x
        return out


class LinearArgmaxClassifier:
    """``g(x) = argmax_y w . Psi(x, y)``, ties to the smallest outcome."""

    def __init__(self, w, feature_map: Callable[[np.ndarray], np.ndarray], k: int):
        self.w = np.asarray(w, dtype=float)
        self.feature_map = feature_map
        self.k = int(k)

    def scores(self, sample: Sample) -> np.ndarray:
        return self.feature_map(sample.features) @ self.w

    def predict(self, sample: Sample) -> np.ndarray:
        return np.argmax(self.scores(sample), axis=1)

    def distributions(self, sample: Sample) -> np.ndarray:
        return one_hot(self.predict(sample), self.k)


class LookupClassifier:
    """Labels looked up by individual id; for explicit finite families."""

    def __init__(self, labels: dict[int, int], k: int):
        self.labels = {int(i): int(y) for i, y in labels.items()}
        self.k = int(k)

    def predict(self, sample: Sample) -> np.ndarray:
        try:
            return np.array([self.labels[int(i)] for i in sample.ids], dtype=np.int64)
        except KeyError as exc:
            raise ContractError(f"no label for individual {exc.args[0]}") from None

    def distributions(self, sample: Sample) -> np.ndarray:
        return one_hot(self.predict(sample), self.k)


class ConstantLabel:
    def __init__(self, y: int, k: int):
        self.y, self.k = int(y), int(k)

    def predict(self, sample: Sample) -> np.ndarray:
        return np.full(len(sample), self.y, dtype=np.int64)

    def distributions(self, sample: Sample) -> np.ndarray:
        return one_hot(self.predict(sample), self.k)


class PairClassifier:
    """``(g1, g2)(x) = (g1(x), g2(x))`` encoded as ``g1(x) * k + g2(x)``."""

    def __init__(self, first, second):
        if first.k != second.k:
            raise ContractError("paired classifiers must share a label space")
        self.first, self.second = first, second
        self.base_k = first.k
        self.k = first.k**2

    def predict(self, sample: Sample) -> np.ndarray:
        return self.first.predict(sample) * self.base_k + self.second.predict(sample)

    def decode(self, labels):
        return np.divmod(np.asarray(labels), self.base_k)


# ---------------------------------------------------------------------------
# Mixtures


@dataclass
class MixtureClassifier:
    components: Sequence
    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if len(self.components) < 1 or len(self.weights) != len(self.components):
            raise ContractError("need one weight per component, at least one component")
        if np.any(self.weights < -SIMPLEX_ATOL) or abs(self.weights.sum() - 1) > SIMPLEX_ATOL:
            raise ContractError("mixing weights must lie on the simplex")
        self.k = self.components[0].k

    def distributions(self, sample: Sample) -> np.ndarray:
        out = np.zeros((len(sample), self.k))
        rows = np.arange(len(sample))
        for g, a in zip(self.components, self.weights):
            np.add.at(out, (rows, g.predict(sample)), a)
        return out


def mixture_distribution(h: MixtureClassifier, x) -> np.ndarray:
    """Outcome distribution of one individual under a mixture."""
    return h.distributions(Sample.of([x]))[0]


# ---------------------------------------------------------------------------
# Finite families


@dataclass
class FiniteFamily:
    members: Sequence
    domain: Sample
    k: int

    def __post_init__(self):
        if len(self.members) == 0:
            raise ContractError("a family needs at least one member")
        self.domain = Sample.of(self.domain)

    def label_matrix(self, S: Sample | None = None) -> np.ndarray:
        S = self.domain if S is None else Sample.of(S)
        return np.stack([np.asarray(g.predict(S), dtype=np.int64) for g in self.members])

    @classmethod
    def from_labels(cls, labels, domain: Sample, k: int) -> "FiniteFamily":
        """Family of lookup classifiers, one per row of ``labels``."""
        labels = np.asarray(labels, dtype=np.int64)
        ids = domain.ids
        members = [LookupClassifier(dict(zip(ids.tolist(), row.tolist())), k) for row in labels]
        return cls(members, domain, k)


def restrict_family(G: FiniteFamily, S) -> list[tuple[int, ...]]:
    """Distinct labelings of ``S`` realized by members of ``G`` (sorted)."""
    S = Sample.of(S)
    if len(S) == 0:
        raise ContractError("S must be nonempty")
    uniq = np.unique(G.label_matrix(S), axis=0)
    return [tuple(int(v) for v in row) for row in uniq]


def natarajan_bound(n_points: int, d: int, k: int) -> int:
    """Natarajan's analogue of Sauer's lemma: ``|G|_S| <= |S|^d k^(2d)``."""
    return n_points**d * k ** (2 * d)


def _shattered(cols: np.ndarray) -> bool:
    """Whether the label rows ``cols`` (r x n) multi-class shatter n points.

    Chooses a label pair per column depth-first.  After t columns the rows
    still consistent with the chosen pairs must realize all ``2^t`` patterns
    on those columns (any projection of a shattered set is shattered), which
    prunes most branches early.
    """
    n = cols.shape[1]
    need = 1 << n
    if len(cols) < need:
        return False

    K = int(cols.max()) + 1

    def common_labels(rows: np.ndarray, codes: np.ndarray, width: int) -> np.ndarray:
        # labels of each column that occur in every pattern class: (n, K) mask
        present = np.zeros((width, n, K), dtype=bool)
        present[codes[:, None], np.arange(n)[None, :], rows] = True
        return present.all(axis=0)

    def search(c: int, rows: np.ndarray, codes: np.ndarray) -> bool:
        if c == n:
            return True
        # every later column must still split every pattern class in two
        common = common_labels(rows, codes, 1 << c)
        if np.any(common[c:].sum(axis=1) < 2):
            return False
        col = rows[:, c]
        for a, b in itertools.combinations(np.flatnonzero(common[c]).tolist(), 2):
            keep = (col == a) | (col == b)
            if np.count_nonzero(keep) < need:
                continue
            sub_codes = codes[keep] * 2 + (col[keep] == a)
            if len(np.unique(sub_codes)) < (1 << (c + 1)):
                continue
            if search(c + 1, rows[keep], sub_codes):
                return True
        return False

    return search(0, cols, np.zeros(len(cols), dtype=np.int64))


def natarajan_dim(G: FiniteFamily, budget_domain: int = DOMAIN_BUDGET,
                  budget_family: int = FAMILY_BUDGET) -> int:
    """Brute-force Natarajan dimension of ``G`` on its domain.

    Branch and bound over point sets in increasing index order, choosing a
    label pair per point.  A partial choice survives only if every later
    point could still split each pattern class in two, and a branch is cut
    once it cannot beat the best size found (shattering n more points
    needs ``2^n`` distinct members inside every pattern class).
    """
    if len(G.domain) > budget_domain or len(G.members) > budget_family:
        raise BudgetExceeded(
            f"domain {len(G.domain)} / family {len(G.members)} exceeds "
            f"budget {budget_domain} / {budget_family}"
        )
    M = np.unique(G.label_matrix(), axis=0)
    if M.shape[1] == 0 or len(M) < 2:
        return 0
    K = int(M.max()) + 1
    if K ** M.shape[1] * 2 ** M.shape[1] >= 2**62:
        raise BudgetExceeded("label patterns do not fit the 64-bit row encoding")
    best = 0

    def search(t: int, rows: np.ndarray, codes: np.ndarray):
        # rows: consistent members restricted to the columns not yet
        # considered; codes: their pattern on the t chosen columns
        nonlocal best
        best = max(best, t)
        n_cols = rows.shape[1]
        # to beat ``best`` every pattern class must still hold 2^(best+1-t) rows
        if n_cols == 0 or np.bincount(codes, minlength=1 << t).min() < (1 << (best + 1 - t)):
            return
        present = np.zeros((1 << t, n_cols, K), dtype=bool)
        present[codes[:, None], np.arange(n_cols)[None, :], rows] = True
        common = present.all(axis=0)
        viable = np.flatnonzero(common.sum(axis=1) >= 2)
        for rank, c in enumerate(viable):
            if t + len(viable) - rank <= best:
                return
            col = rows[:, c]
            for a, b in itertools.combinations(np.flatnonzero(common[c]).tolist(), 2):
                keep = (col == a) | (col == b)
                if np.count_nonzero(keep) < (1 << (t + 1)):
                    continue
                sub_rows = rows[keep][:, c + 1:]
                sub_codes = codes[keep] * 2 + (col[keep] == a)
                # drop members that agree on the pattern and all later points
                key = sub_codes * K ** sub_rows.shape[1] + sub_rows @ K ** np.arange(sub_rows.shape[1])
                _, first = np.unique(key, return_index=True)
                search(t + 1, sub_rows[first], sub_codes[first])

    search(0, M, np.zeros(len(M), dtype=np.int64))
    return best


def product_family(G: FiniteFamily, budget: int = FAMILY_BUDGET) -> FiniteFamily:
    """All ordered pairs ``(g1, g2)`` acting into the product label space."""
    size = len(G.members) ** 2
    if size > budget:
        raise BudgetExceeded(f"|G|^2 = {size} exceeds budget {budget}")
    members = [PairClassifier(a, b) for a in G.members for b in G.members]
    return FiniteFamily(members, G.domain, G.k**2)


def disagreement(pair: PairClassifier, sample: Sample) -> np.ndarray:
    """``1{g1(x) != g2(x)}`` computed from the product label."""
    a, b = pair.decode(pair.predict(sample))
    return (a != b).astype(int)


# ---------------------------------------------------------------------------
# Weight covers of the simplex


@dataclass
class WeightCover:
    m: int
    gamma: float
    resolution: int
    points: np.ndarray

    def nearest(self, p) -> np.ndarray:
        """Largest-remainder rounding of ``p`` onto the cover grid.

        The result lies in the cover and is within L1 distance
        ``m / resolution <= gamma`` of ``p``.
        """
        return round_to_grid(p, self.resolution)


def cover_resolution(m: int, gamma: float) -> int:
    # m / gamma can land a hair above an integer (2 / 0.1 = 20.000000000000004)
    return max(1, math.ceil(round(m / gamma, 9)))


def build_weight_cover(m: int, gamma: float, budget: int = COVER_BUDGET) -> WeightCover:
    """All points of the simplex whose coordinates are multiples of ``1/N``.

    ``N = ceil(m / gamma)``; every ``p`` on the simplex has a cover point
    within L1 distance ``gamma``.
    """
    if m < 1 or not 0 < gamma <= 1:
        raise ContractError("need m >= 1 and 0 < gamma <= 1")
    N = cover_resolution(m, gamma)
    size = math.comb(N + m - 1, m - 1)
    if size > budget:
        raise BudgetExceeded(f"cover has {size} points, budget {budget}")
    # compositions of N into m parts via stars and bars, lexicographic
    pts = np.empty((size, m), dtype=np.int64)
    for row, bars in enumerate(itertools.combinations(range(N + m - 1), m - 1)):
        edges = (-1,) + bars + (N + m - 1,)
        pts[row] = np.diff(edges) - 1
    return WeightCover(m, float(gamma), N, pts / N)


def round_to_grid(p, N: int) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    scaled = p * N
    base = np.floor(scaled).astype(np.int64)
    short = N - int(base.sum())
    order = np.argsort(-(scaled - base), kind="stable")
    base[order[:short]] += 1
    return base / N


# ---------------------------------------------------------------------------
# Fitting a mixture from a pool


@dataclass
class MixtureResult:
    mixture: MixtureClassifier
    loss: float
    restart: int
    used_fallback: bool


def fit_ef_mixture(pool: FiniteFamily | Sequence, m: int, S, u, loss, seed: int = 0,
                   restarts: int = 10, pairs=None) -> MixtureResult:
    """Pick m components from ``pool`` and EF-optimal weights for them.

    Each restart draws m pool members (without replacement when the pool is
    large enough) and solves for the loss-minimizing EF weights.  The lowest
    loss wins, ties to the earliest restart.  If every restart is infeasible
    the favorite classifier is added, which alone is EF, so a result always
    exists.
    """
    members = list(pool.members if isinstance(pool, FiniteFamily) else pool)
    if not members:
        raise ContractError("pool must be nonempty")
    if m < 1:
        raise ContractError("m must be positive")
    S = Sample.of(S)
    rng = np.random.default_rng(seed)
    best = None
    for r in range(restarts):
        idx = rng.choice(len(members), size=m, replace=len(members) < m)
        comps = [members[i] for i in idx]
        fit = erm.optimize_mixture_weights(comps, S, u, loss, pairs=pairs)
        if fit.status == "optimal" and (best is None or fit.loss < best[1] - 1e-12):
            best = (MixtureClassifier(comps, fit.weights), fit.loss, r)
    if best is not None:
        return MixtureResult(*best, used_fallback=False)

    extra = rng.choice(len(members), size=m - 1, replace=len(members) < m - 1)
    comps = [FavoriteClassifier(u)] + [members[i] for i in extra]
    fit = erm.optimize_mixture_weights(comps, S, u, loss, pairs=pairs)
    if fit.status != "optimal":
        raise erm.ErmSolverError("mixture containing the favorite classifier must be feasible")
    return MixtureResult(MixtureClassifier(comps, fit.weights), fit.loss, restarts, used_fallback=True)


def mean_loss(h, loss, S: Sample) -> float:
    return float(np.mean(np.sum(h.distributions(S) * _payoffs(loss, S), axis=1)))
