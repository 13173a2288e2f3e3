"""Individuals, utility/loss models, and envy-freeness measurement.

Everything here works on a :class:`Sample` (ids plus an ``(n, q)`` feature
matrix) so that models and classifiers evaluate whole batches at once.  A
single :class:`Individual` is a one-row view used by the scalar helpers.

A *classifier* is any object with ``distributions(sample) -> (n, k)`` array
whose rows lie on the probability simplex.  A *payoff model* (utility or
loss) is any object with ``k`` and ``values(sample) -> (n, k)`` in ``[0, 1]``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

# Def. of envy is strict; a violation needs gap > beta + ENVY_EPS so that
# floating point ties are never counted.
ENVY_EPS = 1e-12
SIMPLEX_ATOL = 1e-9
PAIR_BLOCK = 1024


class ContractError(ValueError):
    """Raised when an input violates a documented precondition."""


@dataclass(frozen=True)
class Individual:
    id: int
    features: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        f = np.asarray(self.features, dtype=float).reshape(-1)
        if not np.all(np.isfinite(f)):
            raise ContractError(f"individual {self.id} has non-finite features")
        f.setflags(write=False)
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "id", int(self.id))


class Sample:
    """An ordered batch of individuals stored column-wise."""

    def __init__(self, ids, features):
        ids = np.asarray(ids, dtype=np.int64).reshape(-1)
        features = np.asarray(features, dtype=float)
        if features.ndim == 1:
            features = features.reshape(len(ids), -1) if features.size else np.zeros((len(ids), 0))
        if features.shape[0] != len(ids):
            raise ContractError("ids and features disagree on sample size")
        if not np.all(np.isfinite(features)):
            raise ContractError("features must be finite")
        ids.setflags(write=False)
        features.setflags(write=False)
        self.ids = ids
        self.features = features

    @classmethod
    def of(cls, individuals: Iterable[Individual] | "Sample") -> "Sample":
        if isinstance(individuals, Sample):
            return individuals
        individuals = list(individuals)
        if not individuals:
            return cls(np.zeros(0, dtype=np.int64), np.zeros((0, 0)))
        q = {len(x.features) for x in individuals}
        if len(q) != 1:
            raise ContractError("individuals have differing feature dimension")
        return cls([x.id for x in individuals], np.stack([x.features for x in individuals]))

    @classmethod
    def from_features(cls, features, start_id: int = 0) -> "Sample":
        features = np.atleast_2d(np.asarray(features, dtype=float))
        return cls(np.arange(start_id, start_id + len(features)), features)

    def __len__(self):
        return len(self.ids)

    def __getitem__(self, i):
        if isinstance(i, (int, np.integer)):
            return Individual(int(self.ids[i]), self.features[i])
        return Sample(self.ids[i], self.features[i])

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def require_unique_ids(self):
        if len(np.unique(self.ids)) != len(self.ids):
            raise ContractError("ids must be unique within a sample")


@dataclass(frozen=True)
class OutcomeSpace:
    k: int

    def __post_init__(self):
        if int(self.k) < 1:
            raise ContractError("an outcome space needs at least one outcome")


def check_distribution(p, k: int | None = None) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if k is not None and p.shape[-1] != k:
        raise ContractError(f"distribution has {p.shape[-1]} entries, expected {k}")
    if np.any(p < -SIMPLEX_ATOL) or np.any(np.abs(p.sum(axis=-1) - 1.0) > SIMPLEX_ATOL):
        raise ContractError("not a probability distribution")
    return p


# ---------------------------------------------------------------------------
# Payoff models.  The same classes back both utilities and losses.


class TableModel:
    """Dense ``n x k`` payoff table addressed by individual id."""

    kind = "table"

    def __init__(self, ids, table):
        table = np.asarray(table, dtype=float)
        if table.ndim != 2:
            raise ContractError("payoff table must be two-dimensional")
        if np.any(table < 0) or np.any(table > 1) or not np.all(np.isfinite(table)):
            raise ContractError("payoff values must lie in [0, 1]")
        ids = np.asarray(ids, dtype=np.int64)
        if len(ids) != table.shape[0] or len(np.unique(ids)) != len(ids):
            raise ContractError("table ids must be unique, one per row")
        self.ids = ids
        self.table = table
        self.k = table.shape[1]
        self._row = {int(i): r for r, i in enumerate(ids)}

    def rows_for(self, ids) -> np.ndarray:
        try:
            return np.array([self._row[int(i)] for i in ids], dtype=np.int64)
        except KeyError as exc:
            raise ContractError(f"no table row for individual {exc.args[0]}") from None

    def values(self, sample: Sample) -> np.ndarray:
        return self.table[self.rows_for(sample.ids)]

    @classmethod
    def from_csv(cls, path) -> "TableModel":
        return read_table_csv(path)


class LinearFeatureModel:
    """``clip(features @ weights[y] + bias[y], 0, 1)`` for each outcome y."""

    kind = "linear-feature"

    def __init__(self, weights, bias=None):
        self.weights = np.atleast_2d(np.asarray(weights, dtype=float))
        self.k = self.weights.shape[0]
        self.bias = np.zeros(self.k) if bias is None else np.asarray(bias, dtype=float)
        if self.bias.shape != (self.k,):
            raise ContractError("bias must have one entry per outcome")

    def values(self, sample: Sample) -> np.ndarray:
        if sample.dim != self.weights.shape[1]:
            raise ContractError("feature dimension does not match model weights")
        return np.clip(sample.features @ self.weights.T + self.bias, 0.0, 1.0)

    def lipschitz(self, ord=2) -> float:
        """Lipschitz constant w.r.t. the norm ``ord`` on features.

        Uses the dual norm of each weight row; clipping never increases it.
        """
        dual = {2: 2, np.inf: 1, 1: np.inf}[ord]
        return float(max(np.linalg.norm(w, dual) for w in self.weights))


def _payoffs(model, sample: Sample) -> np.ndarray:
    return np.asarray(model.values(sample), dtype=float)


def expected_utility(u, x: Individual, p) -> float:
    p = check_distribution(p, u.k)
    return float(_payoffs(u, Sample.of([x]))[0] @ p)


def expected_loss(loss, x: Individual, p) -> float:
    return expected_utility(loss, x, p)


# ---------------------------------------------------------------------------
# Classifiers on a finite sample.


class RandomizedAssignment:
    """Outcome distributions for the individuals of a fixed sample."""

    def __init__(self, sample, rows):
        sample = Sample.of(sample)
        sample.require_unique_ids()
        rows = np.array(rows, dtype=float)
        if rows.ndim != 2 or rows.shape[0] != len(sample):
            raise ContractError("need exactly one distribution row per individual")
        check_distribution(rows)
        rows.setflags(write=False)
        self.sample = sample
        self.rows = rows
        self.k = rows.shape[1]
        self._row = {int(i): r for r, i in enumerate(sample.ids)}

    def __len__(self):
        return len(self.sample)

    def distributions(self, sample: Sample) -> np.ndarray:
        try:
            idx = [self._row[int(i)] for i in sample.ids]
        except KeyError as exc:
            raise ContractError(f"individual {exc.args[0]} is not in the assignment") from None
        return self.rows[idx]

    @classmethod
    def point_masses(cls, sample, labels, k: int) -> "RandomizedAssignment":
        labels = np.asarray(labels, dtype=np.int64)
        rows = np.zeros((len(labels), k))
        rows[np.arange(len(labels)), labels] = 1.0
        return cls(sample, rows)


class ConstantClassifier:
    """Gives every individual the same outcome distribution."""

    def __init__(self, p):
        self.p = check_distribution(np.asarray(p, dtype=float))
        self.k = len(self.p)

    def distributions(self, sample: Sample) -> np.ndarray:
        return np.tile(self.p, (len(sample), 1))


class FavoriteClassifier:
    """Deterministic: each individual gets its utility-maximizing outcome.

    Ties go to the smallest outcome index.
    """

    def __init__(self, u):
        self.u = u
        self.k = u.k

    def predict(self, sample: Sample) -> np.ndarray:
        return np.argmax(_payoffs(self.u, sample), axis=1)

    def distributions(self, sample: Sample) -> np.ndarray:
        return one_hot(self.predict(sample), self.k)


def one_hot(labels, k: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    out = np.zeros((len(labels), k))
    out[np.arange(len(labels)), labels] = 1.0
    return out


# ---------------------------------------------------------------------------
# Envy measurement.


@dataclass(frozen=True)
class EnvyReport:
    beta: float
    alpha_hat: float
    worst_gap: float
    n_pairs: int
    exact: bool
    ci_halfwidth: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.alpha_hat <= 1.0 or self.n_pairs < 1 or self.ci_halfwidth < 0:
            raise ContractError("inconsistent envy report")


def envy_matrix(h, u, sample: Sample) -> np.ndarray:
    """``gap[i, j] = u(x_i, h(x_j)) - u(x_i, h(x_i))`` for all ordered pairs."""
    U = _payoffs(u, sample)
    D = h.distributions(sample)
    cross = U @ D.T
    return cross - np.diag(cross)[:, None]


def pair_gaps(h, u, first: Sample, second: Sample) -> np.ndarray:
    """Envy gap of ``first[i]`` towards ``second[i]`` for each i."""
    U = _payoffs(u, first)
    own = np.einsum("ij,ij->i", U, h.distributions(first))
    other = np.einsum("ij,ij->i", U, h.distributions(second))
    return other - own


def is_ef_on_sample(h: RandomizedAssignment, u, tol: float = 0.0) -> bool:
    if tol < 0:
        raise ContractError("tol must be nonnegative")
    if len(h.sample) == 0:
        raise ContractError("empty sample")
    gap = envy_matrix(h, u, h.sample)
    return bool(np.all(gap <= tol + ENVY_EPS))


def _violations(gaps: np.ndarray, beta: float) -> np.ndarray:
    return gaps > beta + ENVY_EPS


def pairwise_ef_rate(h, pairs, u, beta: float) -> EnvyReport:
    """Fraction of ordered ``(x, x')`` pairs where x envies x' by more than beta.

    ``pairs`` is either a sequence of ``(Individual, Individual)`` tuples or a
    ``(first, second)`` tuple of equal-length :class:`Sample` objects.
    """
    if beta < 0:
        raise ContractError("beta must be nonnegative")
    first, second = as_pair_samples(pairs)
    if len(first) == 0:
        raise ContractError("need at least one pair")
    gaps = pair_gaps(h, u, first, second)
    return EnvyReport(
        beta=float(beta),
        alpha_hat=float(np.mean(_violations(gaps, beta))),
        worst_gap=float(np.max(gaps)),
        n_pairs=len(gaps),
        exact=True,
    )


def as_pair_samples(pairs) -> tuple[Sample, Sample]:
    if isinstance(pairs, tuple) and len(pairs) == 2 and all(isinstance(s, Sample) for s in pairs):
        if len(pairs[0]) != len(pairs[1]):
            raise ContractError("pair samples differ in length")
        return pairs
    pairs = list(pairs)
    return Sample.of(a for a, _ in pairs), Sample.of(b for _, b in pairs)


def all_ordered_pairs(sample: Sample) -> tuple[Sample, Sample]:
    n = len(sample)
    i, j = np.divmod(np.arange(n * n), n)
    return sample[i], sample[j]


def exact_ef_rate(h, u, sample: Sample, beta: float) -> EnvyReport:
    """Envy rate when P is uniform over ``sample`` (all n^2 ordered pairs)."""
    gap = envy_matrix(h, u, sample)
    return EnvyReport(
        beta=float(beta),
        alpha_hat=float(np.mean(_violations(gap, beta))),
        worst_gap=float(gap.max()),
        n_pairs=gap.size,
        exact=True,
    )


def hoeffding_halfwidth(n: int, delta: float) -> float:
    return math.sqrt(math.log(2.0 / delta) / (2.0 * n))


# ---------------------------------------------------------------------------
# Samplers and counter-based pair streams.


class UniformCube:
    """Uniform on ``[0, 1]^q``."""

    def __init__(self, q: int):
        self.q = int(q)
        self.width = self.q

    def from_uniforms(self, U: np.ndarray, ids: np.ndarray) -> Sample:
        return Sample(ids, U)


class UniformOver:
    """Uniform over a finite set of individuals (ids are kept)."""

    width = 1

    def __init__(self, population: Sample):
        self.population = Sample.of(population)
        if len(self.population) == 0:
            raise ContractError("cannot sample from an empty population")

    def from_uniforms(self, U: np.ndarray, ids: np.ndarray) -> Sample:
        n = len(self.population)
        idx = np.minimum((U[:, 0] * n).astype(np.int64), n - 1)
        return self.population[idx]


def pair_stream(sampler, seed: int, start: int, stop: int) -> tuple[Sample, Sample]:
    """Draw the ordered pairs with indices ``start..stop-1``.

    Pair ``i`` depends only on ``(seed, i)``: it is read from a Philox stream
    keyed by ``(seed, i // PAIR_BLOCK)``, so any partitioning of the index
    range reproduces the same pairs.
    """
    if stop <= start:
        raise ContractError("empty pair range")
    w = sampler.width
    chunks = []
    for block in range(start // PAIR_BLOCK, (stop - 1) // PAIR_BLOCK + 1):
        key = (int(seed) % (1 << 64)) | (block << 64)
        rng = np.random.Generator(np.random.Philox(key=key))
        U = rng.random((PAIR_BLOCK, 2 * w))
        lo = max(start - block * PAIR_BLOCK, 0)
        hi = min(stop - block * PAIR_BLOCK, PAIR_BLOCK)
        chunks.append(U[lo:hi])
    U = np.concatenate(chunks)
    idx = np.arange(start, stop, dtype=np.int64)
    first = sampler.from_uniforms(U[:, :w], 2 * idx)
    second = sampler.from_uniforms(U[:, w:], 2 * idx + 1)
    return first, second


def estimate_ef(h, sampler, u, beta: float, n_pairs: int, seed: int, delta: float = 0.05,
                workers: int = 1) -> EnvyReport:
    """Monte Carlo (alpha, beta)-EF estimate from ``n_pairs`` i.i.d. ordered pairs."""
    if n_pairs < 1:
        raise ContractError("n_pairs must be positive")
    if not 0 < delta < 1:
        raise ContractError("delta must lie in (0, 1)")
    bounds = np.linspace(0, n_pairs, max(1, min(workers, n_pairs)) + 1).astype(int)
    hits, worst = 0, -np.inf
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        if hi <= lo:
            continue
        first, second = pair_stream(sampler, seed, lo, hi)
        gaps = pair_gaps(h, u, first, second)
        hits += int(np.count_nonzero(_violations(gaps, beta)))
        worst = max(worst, float(gaps.max()))
    return EnvyReport(
        beta=float(beta),
        alpha_hat=hits / n_pairs,
        worst_gap=worst,
        n_pairs=int(n_pairs),
        exact=False,
        ci_halfwidth=hoeffding_halfwidth(n_pairs, delta),
    )


# ---------------------------------------------------------------------------
# CSV instances.


def read_table_csv(path) -> TableModel:
    """Load ``id,y0,...,y{k-1}`` rows into a :class:`TableModel`."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ContractError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        k = len(header) - 1
        if k < 1 or header[0] != "id" or header[1:] != [f"y{j}" for j in range(k)]:
            raise ContractError(f"{path}: header must be id,y0,...,y{{k-1}}")
        ids, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != k + 1:
                raise ContractError(f"{path}:{lineno}: expected {k + 1} fields")
            try:
                ids.append(int(row[0]))
                rows.append([float(v) for v in row[1:]])
            except ValueError:
                raise ContractError(f"{path}:{lineno}: malformed number") from None
    if not rows:
        raise ContractError(f"{path}: no data rows")
    return TableModel(ids, np.array(rows))


def write_table_csv(path, ids: Sequence[int], table) -> None:
    table = np.asarray(table, dtype=float)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id"] + [f"y{j}" for j in range(table.shape[1])])
        for i, row in zip(ids, table):
            w.writerow([int(i)] + [repr(float(v)) for v in row])
