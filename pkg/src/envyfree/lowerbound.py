"""Adversarial grid instance showing that extending EF classifiers needs huge samples.

``[0, 1]^q`` is cut into ``4^q`` cubes of side 1/4.  Each cube center gets a
random favorite outcome in {0, 1}; utility for the favorite is a tent that
peaks at ``L * s / 2`` on the center and vanishes on the cube boundary, and
utility for the other outcome is zero.  The individual distribution is
uniform over the centers, so envy rates are computed exactly over all
ordered center pairs.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    ConstantClassifier,
    ContractError,
    EnvyReport,
    RandomizedAssignment,
    Sample,
    exact_ef_rate,
)
from .extension import EUCLIDEAN, Metric, extend

SIDE = 0.25
MAX_Q = 8
MAX_L = 2.0 / SIDE
BETA_OFFSET = 1e-9
# reference balance slack from the argument's concentration step
BALANCE_EPS = 0.1


@dataclass(frozen=True)
class GridWorld:
    q: int
    L: float
    favorites: np.ndarray
    s: float = SIDE

    @property
    def per_axis(self) -> int:
        return round(1 / self.s)

    @property
    def m(self) -> int:
        return self.per_axis**self.q

    @property
    def centers(self) -> np.ndarray:
        """Cube centers in row-major order (last coordinate varies fastest)."""
        ticks = (np.arange(self.per_axis) + 0.5) * self.s
        return np.array(list(itertools.product(ticks, repeat=self.q)))

    def center_sample(self) -> Sample:
        return Sample(np.arange(self.m), self.centers)

    def cube_index(self, X) -> np.ndarray:
        """Row-major index of the cube containing each row of ``X``.

        Cubes are half-open ``[a, a + s)`` except the last one per axis,
        which is closed, so every point of ``[0, 1]^q`` has exactly one cube.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        cell = np.clip(np.floor(X / self.s).astype(np.int64), 0, self.per_axis - 1)
        powers = self.per_axis ** np.arange(self.q - 1, -1, -1)
        return cell @ powers


def build_grid(q: int, L: float, seed: int) -> GridWorld:
    """Grid world with i.i.d. Bernoulli(1/2) favorites drawn from ``seed``."""
    if not 1 <= q <= MAX_Q:
        raise ContractError(f"q must lie in [1, {MAX_Q}]")
    if not 0 < L <= MAX_L:
        raise ContractError(f"L must lie in (0, {MAX_L}] to keep utilities in [0, 1]")
    m = round(1 / SIDE) ** q
    favorites = np.random.default_rng([seed, 0]).integers(0, 2, size=m)
    favorites.setflags(write=False)
    return GridWorld(q=q, L=float(L), favorites=favorites)


class GridUtility:
    """Tent utility of the grid world; a payoff model over features."""

    kind = "grid"
    k = 2

    def __init__(self, world: GridWorld):
        self.world = world
        self._centers = world.centers

    def values(self, sample: Sample) -> np.ndarray:
        w = self.world
        X = sample.features
        if X.shape[1] != w.q:
            raise ContractError("feature dimension does not match the grid")
        j = w.cube_index(X)
        dist = np.abs(X - self._centers[j]).max(axis=1)
        peak = np.clip(w.L * (w.s / 2 - dist), 0.0, None)
        out = np.zeros((len(X), 2))
        out[np.arange(len(X)), w.favorites[j]] = peak
        return out


def grid_utility(world: GridWorld, x, y: int) -> float:
    x = np.asarray(x, dtype=float).reshape(1, -1)
    return float(GridUtility(world).values(Sample([0], x))[0, int(y)])


def favorite_classifier(world: GridWorld, sample_indices) -> RandomizedAssignment:
    """Point mass on each sampled center's favorite."""
    idx = np.asarray(sample_indices, dtype=np.int64)
    if np.any(idx < 0) or np.any(idx >= world.m):
        raise ContractError("center index out of range")
    S = Sample(idx, world.centers[idx])
    return RandomizedAssignment.point_masses(S, world.favorites[idx], 2)


# ---------------------------------------------------------------------------
# Extension strategies: (base assignment, world) -> classifier on [0, 1]^q


def nn_strategy(metric: Metric = EUCLIDEAN) -> Callable:
    def strategy(base, world):
        return extend(base, metric)
    strategy.__name__ = f"nn_{metric.variant}"
    return strategy


def constant_strategy(base, world):
    """Everyone gets the sample's average distribution; never envied."""
    return ConstantClassifier(base.rows.mean(axis=0))


STRATEGIES = {"nn": nn_strategy(), "constant": constant_strategy}


@dataclass
class AdversarialRunResult:
    seed: int
    sample_indices: np.ndarray
    theta: float
    y_star: int
    favorite_balance: tuple[int, int]
    envy_report: EnvyReport

    @property
    def balanced(self) -> bool:
        """Sample favorites within the reference slack of an even split."""
        n = sum(self.favorite_balance)
        return abs(self.favorite_balance[0] / n - 0.5) <= BALANCE_EPS


def run_adversarial_experiment(world: GridWorld, extension_strategy="nn", seed: int = 0,
                               beta: float | None = None) -> AdversarialRunResult:
    """Sample half the centers, extend the favorite classifier, measure envy exactly.

    ``beta`` defaults to just below ``L * s / 2``, the size of every envy gap
    at the centers.
    """
    strategy = STRATEGIES[extension_strategy] if isinstance(extension_strategy, str) else extension_strategy
    m = world.m
    rng = np.random.default_rng([seed, 1])
    idx = np.sort(rng.choice(m, size=m // 2, replace=False))
    base = favorite_classifier(world, idx)
    h = strategy(base, world)

    centers = world.center_sample()
    D = h.distributions(centers)
    out = np.ones(m, dtype=bool)
    out[idx] = False
    mass = D[out].mean(axis=0) if out.any() else np.full(2, 0.5)
    y_star = int(np.argmax(mass))
    if beta is None:
        beta = world.L * world.s / 2 - BETA_OFFSET
    # P is uniform on the centers, so h only matters through D
    report = exact_ef_rate(RandomizedAssignment(centers, D), GridUtility(world), centers, beta)
    fav = world.favorites[idx]
    balance = (int(np.count_nonzero(fav == 0)), int(np.count_nonzero(fav == 1)))
    return AdversarialRunResult(seed, idx, float(mass[y_star]), y_star, balance, report)


def verify_lipschitz(world: GridWorld, n_pairs: int, p_norm=np.inf, seed: int = 0,
                     scale: float | None = None) -> float:
    """Largest ``|u(x,y) - u(x',y)| / ||x - x'||_p`` over random pairs and both outcomes.

    Pairs are uniform on the cube, or with ``scale`` set, ``x'`` is ``x``
    plus a uniform perturbation of that half-width (clipped to the cube),
    which probes cube boundaries far more often.  Identical pairs are skipped.
    """
    if n_pairs < 1:
        raise ContractError("n_pairs must be positive")
    if p_norm not in (1, 2, np.inf):
        raise ContractError("p_norm must be 1, 2 or inf")
    rng = np.random.default_rng([seed, 2])
    X = rng.random((n_pairs, world.q))
    if scale is None:
        Y = rng.random((n_pairs, world.q))
    else:
        Y = np.clip(X + rng.uniform(-scale, scale, size=X.shape), 0.0, 1.0)
    dist = np.linalg.norm(X - Y, ord=p_norm, axis=1)
    keep = dist > 0
    u = GridUtility(world)
    ids = np.arange(int(keep.sum()))
    ux = u.values(Sample(ids, X[keep]))
    uy = u.values(Sample(ids, Y[keep]))
    if not keep.any():
        return 0.0
    return float((np.abs(ux - uy).max(axis=1) / dist[keep]).max())
