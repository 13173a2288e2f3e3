"""Nearest-neighbor extension of a sample classifier to the whole space."""
from __future__ import annotations

import math

import numpy as np

from .core import ContractError, Individual, RandomizedAssignment, Sample

# beyond this, int64 sample sizes overflow
_MAX_SIZE = 2**63


class Metric:
    """Distance on feature vectors: ``"euclidean"`` or ``"linf"``."""

    def __init__(self, variant: str = "euclidean"):
        if variant not in ("euclidean", "linf"):
            raise ContractError(f"unknown metric {variant!r}")
        self.variant = variant

    def pairwise(self, A, B) -> np.ndarray:
        A = np.atleast_2d(np.asarray(A, dtype=float))
        B = np.atleast_2d(np.asarray(B, dtype=float))
        diff = np.abs(A[:, None, :] - B[None, :, :])
        if self.variant == "linf":
            return diff.max(axis=2) if diff.shape[2] else np.zeros(diff.shape[:2])
        return np.sqrt((diff**2).sum(axis=2))

    def __call__(self, a, b) -> float:
        return float(self.pairwise(a, b)[0, 0])

    def __repr__(self):
        return f"Metric({self.variant!r})"


EUCLIDEAN = Metric("euclidean")
LINF = Metric("linf")

_BATCH = 4096


def _nearest(S: Sample, queries, metric: Metric):
    if len(S) == 0:
        raise ContractError("S must be nonempty")
    X = queries.features if isinstance(queries, Sample) else np.atleast_2d(queries)
    idx = np.empty(len(X), dtype=np.int64)
    dist = np.empty(len(X))
    # bound the (batch x |S|) distance block to a few million entries
    batch = max(1, min(_BATCH, 4_000_000 // max(1, len(S))))
    for lo in range(0, len(X), batch):
        D = metric.pairwise(X[lo:lo + batch], S.features)
        j = np.argmin(D, axis=1)
        idx[lo:lo + batch] = j
        dist[lo:lo + batch] = D[np.arange(len(j)), j]
    return idx, dist


def nearest_indices(S: Sample, queries, metric: Metric = EUCLIDEAN) -> np.ndarray:
    """Index in ``S`` of each query's nearest neighbor, ties to the smallest index."""
    return _nearest(S, queries, metric)[0]


def nearest_neighbor(S, x, metric: Metric = EUCLIDEAN) -> int:
    """Index of the point of ``S`` nearest to ``x`` (an Individual or a feature vector)."""
    S = Sample.of(S)
    feats = x.features if isinstance(x, Individual) else np.asarray(x, dtype=float)
    return int(nearest_indices(S, feats.reshape(1, -1), metric)[0])


class NnExtension:
    """``h(x) = base(NN_S(x))``: a classifier on the whole feature space."""

    def __init__(self, base: RandomizedAssignment, metric: Metric = EUCLIDEAN):
        self.base = base
        self.metric = metric
        self.k = base.k

    def neighbors(self, sample: Sample) -> np.ndarray:
        return nearest_indices(self.base.sample, sample, self.metric)

    def distributions(self, sample: Sample) -> np.ndarray:
        return self.base.rows[self.neighbors(sample)]


def extend(base: RandomizedAssignment, metric: Metric = EUCLIDEAN) -> NnExtension:
    return NnExtension(base, metric)


def net_radius(S, test_points, metric: Metric = EUCLIDEAN) -> float:
    """Largest distance from a test point to its nearest sample point."""
    S, T = Sample.of(S), Sample.of(test_points)
    if len(S) == 0 or len(T) == 0:
        raise ContractError("both point sets must be nonempty")
    return float(_nearest(S, T, metric)[1].max())


class SampleSizeTooLarge(OverflowError):
    pass


def covering_sample_size(alpha: float, beta: float, L: float, D: float, q: int, delta: float) -> int:
    """Sample size that makes S a ``beta/(2L)``-net on mass ``1 - alpha`` w.p. ``1 - delta``.

    Covers the bounding cube of side D with ``m = ceil(D/s)^q`` cells of side
    ``s = beta / (2 L sqrt(q))`` and returns ``ceil((m/alpha) ln(m/delta))``.
    """
    if min(alpha, beta, L, D, delta) <= 0 or q < 1:
        raise ContractError("all parameters must be positive")
    if not (alpha < 1 and delta < 1):
        raise ContractError("alpha and delta must lie in (0, 1)")
    s = beta / (2.0 * L * math.sqrt(q))
    per_axis = math.ceil(round(D / s, 9))
    m = per_axis**q
    if m >= _MAX_SIZE:
        raise SampleSizeTooLarge(f"{m} cells exceeds 2^63")
    n = (m / alpha) * math.log(m / delta)
    if not math.isfinite(n) or n >= _MAX_SIZE:
        raise SampleSizeTooLarge(f"sample size {n:.3g} exceeds 2^63")
    return math.ceil(n)
