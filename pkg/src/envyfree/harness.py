"""Config-driven experiments: dispatch, persistence and reports.

A run reads an :class:`ExperimentConfig` (JSON), executes one experiment,
and writes ``results.csv``, ``manifest.json`` and optionally an SVG chart
to the output directory.  CSV content depends only on the config, never on
the worker count or on whether plotting succeeds.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import erm, families, lowerbound
from .core import (
    ContractError,
    LinearFeatureModel,
    Sample,
    UniformCube,
    UniformOver,
    estimate_ef,
    exact_ef_rate,
    pair_gaps,
    pair_stream,
    pairwise_ef_rate,
    read_table_csv,
)
from .extension import EUCLIDEAN, LINF, extend, net_radius

TOOL_VERSION = "0.1.0"
SCHEMA_VERSION = 1

EXPERIMENTS = ("erm", "lowerbound", "mixture-gen", "natarajan", "example1", "extension-check")

# Experiment-specific parameters and their defaults; anything else is rejected.
PARAMS: dict[str, dict[str, Any]] = {
    "example1": {"gammas": [2, 4, 8]},
    "erm": {"method": "both", "budget": erm.DETERMINISTIC_BUDGET},
    "lowerbound": {"q": 5, "L": 8.0, "seeds": 100, "strategy": "nn", "metric": "euclidean"},
    "mixture-gen": {
        "q": 2, "k": 3, "m": 3, "pool_size": 20, "restarts": 5, "trials": 20,
        "beta": 0.0, "holdout": 100_000, "noise": 0.5, "slope": 3.0, "control_trials": 0,
    },
    "natarajan": {"families": 20, "max_members": 64, "max_domain": 8, "max_k": 3},
    "extension-check": {"q": 2, "k": 3, "L": 1.0, "n": 30, "holdout": 10_000, "trials": 10},
}
DEFAULT_SIZES = {"mixture-gen": [100, 200, 400, 800, 1600, 3200]}


class ConfigError(ContractError):
    """Invalid configuration; a usage error."""


class DataError(RuntimeError):
    """Unreadable or malformed input, or an unwritable output directory."""


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int = 0
    delta: float = 0.05
    gamma: float = 0.1
    sizes: list[int] = field(default_factory=list)
    utility: str | None = None
    loss: str | None = None
    pool: str | None = None
    out: str = "results"
    workers: int = 1
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        for name in ("delta", "gamma"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not 0 < v < 1:
                raise ConfigError(f"{name} must lie in (0, 1)")
        if not self.sizes:
            self.sizes = list(DEFAULT_SIZES.get(self.experiment, []))
        sizes = list(self.sizes)
        if any(isinstance(n, bool) or not isinstance(n, int) or n < 1 for n in sizes):
            raise ConfigError("sizes must be positive integers")
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ConfigError("sizes must be strictly increasing")
        self.sizes = sizes
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError("workers must be a positive integer")
        if not isinstance(self.params, dict):
            raise ConfigError("params must be a JSON object")
        allowed = PARAMS[self.experiment]
        unknown = sorted(set(self.params) - set(allowed))
        if unknown:
            raise ConfigError(f"unknown params for {self.experiment}: {', '.join(unknown)}")
        self.params = {**allowed, **self.params}

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(doc) - names)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        if "experiment" not in doc:
            raise ConfigError("config needs an 'experiment'")
        return cls(**doc)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def digest(self) -> str:
        """sha256 of the result-relevant fields; key order does not matter."""
        doc = self.to_dict()
        for key in ("out", "workers"):
            doc.pop(key)
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class RunManifest:
    experiment: str
    config_digest: str
    seed: int
    columns: list[str]
    rows: list[list]
    summary: dict = field(default_factory=dict)
    wall_time: float = 0.0
    tool_version: str = TOOL_VERSION
    schema_version: int = SCHEMA_VERSION
    plot: dict | None = None

    def to_json(self) -> str:
        doc = dataclasses.asdict(self)
        doc.pop("plot")
        return json.dumps(doc, indent=2, sort_keys=True, default=_plain)


def _plain(v):
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"not serializable: {type(v).__name__}")


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def _pmap(fn, items, workers):
    """Ordered map, optionally over worker processes."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _stream_seed(*key: int) -> int:
    return int(np.random.SeedSequence(list(key)).generate_state(2, dtype=np.uint64)[0])


# ---------------------------------------------------------------------------
# example1: the randomized/deterministic gap family


def _example1(cfg: ExperimentConfig):
    rows = []
    for g in cfg.params["gammas"]:
        if not g > 1:
            raise ConfigError("example1 gammas must exceed 1")
        inst = erm.gap_instance(g)
        rnd = erm.solve_randomized_ef_erm(*inst)
        det = erm.solve_deterministic_ef_erm(*inst)
        rows.append([float(g), rnd.total_loss, det.total_loss, det.total_loss / rnd.total_loss,
                     rnd.loss, det.loss])
    cols = ["gamma", "randomized_loss", "deterministic_loss", "ratio",
            "randomized_mean_loss", "deterministic_mean_loss"]
    return cols, rows, {}, None


# ---------------------------------------------------------------------------
# erm: assignments for a CSV instance


def _read_model(path, what):
    if path is None:
        raise ConfigError(f"erm needs a '{what}' CSV path")
    try:
        return read_table_csv(path)
    except OSError as exc:
        raise DataError(f"cannot read {what} table {path}: {exc.strerror}") from None
    except ContractError as exc:
        raise DataError(str(exc)) from None


def _erm(cfg: ExperimentConfig):
    u = _read_model(cfg.utility, "utility")
    loss = _read_model(cfg.loss, "loss")
    if set(u.ids.tolist()) != set(loss.ids.tolist()):
        raise DataError("utility and loss tables list different individuals")
    if u.k != loss.k:
        raise DataError("utility and loss tables have different outcome counts")
    method = cfg.params["method"]
    if method not in ("randomized", "deterministic", "both"):
        raise ConfigError("erm method must be randomized, deterministic or both")
    S = Sample(u.ids, np.zeros((len(u.ids), 0)))
    solvers = []
    if method in ("randomized", "both"):
        solvers.append(("randomized", lambda: erm.solve_randomized_ef_erm(S, u, loss, u.k)))
    if method in ("deterministic", "both"):
        budget = cfg.params["budget"]
        solvers.append(("deterministic", lambda: erm.solve_deterministic_ef_erm(S, u, loss, u.k, budget)))
    rows, summary = [], {}
    for name, solve in solvers:
        try:
            res = solve()
        except erm.BudgetExceeded as exc:
            summary[name] = {"status": "skipped", "reason": str(exc)}
            continue
        summary[name] = {"status": res.status, "mean_loss": res.loss, "total_loss": res.total_loss}
        for i, row in zip(S.ids, res.assignment.rows):
            rows.append([name, int(i)] + [float(v) for v in row])
    cols = ["method", "id"] + [f"y{j}" for j in range(u.k)]
    return cols, rows, summary, None


# ---------------------------------------------------------------------------
# lowerbound: the adversarial grid


def _lowerbound_seed(args):
    q, L, strategy, metric, seed = args
    world = lowerbound.build_grid(q, L, seed)
    strat = lowerbound.nn_strategy(LINF if metric == "linf" else EUCLIDEAN) if strategy == "nn" else strategy
    r = lowerbound.run_adversarial_experiment(world, strat, seed)
    rep = r.envy_report
    return [seed, r.theta, r.y_star, rep.alpha_hat, rep.worst_gap, *r.favorite_balance]


def _lowerbound(cfg: ExperimentConfig):
    p = cfg.params
    if p["strategy"] not in ("nn", "constant"):
        raise ConfigError("strategy must be nn or constant")
    if p["metric"] not in ("euclidean", "linf"):
        raise ConfigError("metric must be euclidean or linf")
    try:
        lowerbound.build_grid(p["q"], p["L"], 0)
    except ContractError as exc:
        raise ConfigError(str(exc)) from None
    seeds = range(cfg.seed, cfg.seed + int(p["seeds"]))
    jobs = [(p["q"], float(p["L"]), p["strategy"], p["metric"], s) for s in seeds]
    rows = _pmap(_lowerbound_seed, jobs, cfg.workers)
    cols = ["seed", "theta", "y_star", "alpha_hat", "worst_gap", "favorites_0", "favorites_1"]
    alpha = np.array([r[3] for r in rows])
    summary = {
        "m": 4 ** p["q"],
        "beta": p["L"] / 8 - lowerbound.BETA_OFFSET,
        "seeds_with_alpha_at_least_1_25": int(np.count_nonzero(alpha >= 1 / 25)),
        "mean_alpha_hat": float(alpha.mean()) if len(alpha) else None,
    }
    plot = {"kind": "lowerbound", "x": [r[0] for r in rows], "y": alpha.tolist()}
    return cols, rows, summary, plot


# ---------------------------------------------------------------------------
# mixture-gen: generalization of EF mixtures


def synthetic_world(q: int, k: int, seed: int, slope: float = 3.0):
    """Reference synthetic distribution: uniform features, linear payoffs.

    Utility is a clipped linear function of the features with random
    weights scaled by ``slope``; the loss is one minus the unclipped utility
    (also clipped), so the lowest-loss outcome is the one an individual
    likes least and envy-freeness genuinely constrains the learner.
    """
    rng = np.random.default_rng([seed, 10])
    W = rng.uniform(-1, 1, (k, q)) * slope / q
    b = rng.uniform(0.3, 0.7, k)
    return UniformCube(q), LinearFeatureModel(W, b), LinearFeatureModel(-W, 1 - b)


def random_pool(u: LinearFeatureModel, size: int, noise: float, seed: int) -> list:
    """Linear-argmax classifiers scattered around the utility's own argmax.

    Perturbing the favorite rule gives components that are nearly EF, so
    mixtures are feasible at small n and increasingly constrained as n grows.
    """
    k, q = u.weights.shape
    fmap = families.OneHotFeatureMap(k, q)
    base = np.hstack([u.weights, u.bias[:, None]]).reshape(-1)
    rng = np.random.default_rng([seed, 11])
    scale = noise * np.abs(base).mean()
    return [families.LinearArgmaxClassifier(base + rng.normal(0, scale, base.shape), fmap, k)
            for _ in range(size)]


def load_pool(path) -> list:
    """Read a pool specification.

    The JSON document has ``feature_map`` (only ``"onehot"``), ``k``, ``q``,
    optional ``bias`` (default true) and ``weights``: a list of flat weight
    vectors of length ``k * (q + bias)``.
    """
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise DataError(f"cannot read pool {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"pool {path} is not valid JSON: {exc}") from None
    try:
        if doc.get("feature_map", "onehot") != "onehot":
            raise DataError(f"unknown feature map {doc['feature_map']!r}")
        fmap = families.OneHotFeatureMap(int(doc["k"]), int(doc["q"]), bool(doc.get("bias", True)))
        W = np.asarray(doc["weights"], dtype=float)
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise DataError(f"malformed pool {path}: {exc}") from None
    if W.ndim != 2 or W.shape[1] != fmap.dim or len(W) == 0:
        raise DataError(f"pool weights must be a nonempty list of length-{fmap.dim} vectors")
    return [families.LinearArgmaxClassifier(w, fmap, fmap.k) for w in W]


def _sweep_trial(args):
    cfg_doc, trial = args
    cfg = ExperimentConfig.from_dict(cfg_doc)
    p = cfg.params
    seed = cfg.seed + trial
    sampler, u, loss = synthetic_world(p["q"], p["k"], seed, p["slope"])
    pool = load_pool(cfg.pool) if cfg.pool else random_pool(u, p["pool_size"], p["noise"], seed)
    rows = []
    for n in cfg.sizes:
        first, second = pair_stream(sampler, _stream_seed(seed, n, 1), 0, n)
        S = Sample(np.concatenate([first.ids, second.ids]),
                   np.vstack([first.features, second.features]))
        pairs = (np.arange(n), n + np.arange(n))
        fit = families.fit_ef_mixture(pool, p["m"], S, u, loss, seed=_stream_seed(seed, n, 3),
                                      restarts=p["restarts"], pairs=pairs)
        h = fit.mixture
        train = pairwise_ef_rate(h, (first, second), u, p["beta"]).alpha_hat
        test = estimate_ef(h, sampler, u, p["beta"] + 4 * cfg.gamma, p["holdout"],
                           _stream_seed(seed, 2), cfg.delta).alpha_hat
        rows.append([n, trial, train, test, test - train, fit.loss, fit.used_fallback])
    return rows


SWEEP_COLUMNS = ["n", "trial", "train_alpha", "test_alpha", "gap", "mean_loss", "used_fallback"]


def generalization_sweep(cfg: ExperimentConfig) -> list[list]:
    """Train/test envy of fitted EF mixtures across training sizes.

    For each trial and each ``n`` in ``cfg.sizes``: draw ``n`` training
    pairs, fit an m-component mixture that is EF on those pairs, record the
    training envy rate at ``beta`` and the holdout rate at ``beta + 4 gamma``.
    Rows follow :data:`SWEEP_COLUMNS`, ordered by trial then n.
    """
    doc = cfg.to_dict()
    rows = _pmap(_sweep_trial, [(doc, t) for t in range(cfg.params["trials"])], cfg.workers)
    return [r for trial_rows in rows for r in trial_rows]


def sweep_means(rows: list[list]) -> list[tuple[int, float, float, float]]:
    """Per-n averages ``(n, train_alpha, test_alpha, gap)`` of sweep rows."""
    out = []
    for n in sorted({r[0] for r in rows}):
        sel = np.array([r[2:5] for r in rows if r[0] == n], dtype=float)
        out.append((n, *(float(v) for v in sel.mean(axis=0))))
    return out


def finite_class_sample_size(n_classifiers: int, gamma: float, delta: float) -> int:
    """Pairs needed so every classifier's envy rate is within gamma of the truth."""
    return math.ceil(math.log(n_classifiers / delta) / (2 * gamma**2))


def finite_class_control(trials: int = 100, n_classifiers: int = 20, gamma: float = 0.1,
                         delta: float = 0.05, beta: float = 0.05, population: int = 200,
                         q: int = 2, k: int = 3, seed: int = 0) -> list[dict]:
    """Finite-class generalization check with an explicit sample size.

    Each trial fixes a finite population (so the true envy rate is exact),
    ``n_classifiers`` random linear-argmax classifiers and a training set of
    :func:`finite_class_sample_size` pairs.  A trial fails when some classifier's
    true rate exceeds its training rate by more than ``gamma``; the failure
    probability is at most ``delta``.
    """
    n = finite_class_sample_size(n_classifiers, gamma, delta)
    out = []
    for t in range(trials):
        s = seed + t
        rng = np.random.default_rng([s, 20])
        pop = Sample.from_features(rng.random((population, q)))
        _, u, _ = synthetic_world(q, k, s)
        fmap = families.OneHotFeatureMap(k, q)
        H = [families.LinearArgmaxClassifier(rng.normal(size=fmap.dim), fmap, k)
             for _ in range(n_classifiers)]
        pairs = pair_stream(UniformOver(pop), _stream_seed(s, 21), 0, n)
        excess = [exact_ef_rate(h, u, pop, beta).alpha_hat - pairwise_ef_rate(h, pairs, u, beta).alpha_hat
                  for h in H]
        out.append({"trial": t, "n": n, "max_excess": float(max(excess)),
                    "violated": bool(max(excess) > gamma)})
    return out


def _mixture_gen(cfg: ExperimentConfig):
    if cfg.pool:
        load_pool(cfg.pool)  # fail fast on a bad pool file
    rows = generalization_sweep(cfg)
    means = sweep_means(rows)
    summary = {"means": [dict(zip(["n", "train_alpha", "test_alpha", "gap"], m)) for m in means]}
    if cfg.params["control_trials"]:
        ctl = finite_class_control(cfg.params["control_trials"], gamma=cfg.gamma, delta=cfg.delta,
                                   seed=cfg.seed)
        summary["finite_class_control"] = {
            "trials": len(ctl), "n": ctl[0]["n"],
            "violations": sum(c["violated"] for c in ctl),
        }
    plot = {"kind": "sweep", "x": [m[0] for m in means], "y": [m[3] for m in means]}
    return SWEEP_COLUMNS, rows, summary, plot


# ---------------------------------------------------------------------------
# natarajan: dimension and growth-bound checks on random finite families


def random_family(rng: np.random.Generator, max_members: int, max_domain: int, max_k: int):
    n_dom = int(rng.integers(2, max_domain + 1))
    k = int(rng.integers(2, max_k + 1))
    size = int(rng.integers(1, max_members + 1))
    domain = Sample.from_features(np.arange(n_dom, dtype=float)[:, None])
    return families.FiniteFamily.from_labels(rng.integers(0, k, (size, n_dom)), domain, k)


def _natarajan(cfg: ExperimentConfig):
    p = cfg.params
    rng = np.random.default_rng([cfg.seed, 30])
    rows = []
    for f in range(p["families"]):
        G = random_family(rng, p["max_members"], p["max_domain"], p["max_k"])
        d = families.natarajan_dim(G)
        worst = 0.0
        for n in range(1, len(G.domain) + 1):
            S = G.domain[np.sort(rng.choice(len(G.domain), n, replace=False))]
            worst = max(worst, len(families.restrict_family(G, S)) / families.natarajan_bound(n, d, G.k))
        d2 = families.natarajan_dim(families.product_family(G))
        rows.append([f, len(G.members), len(G.domain), G.k, d, worst, worst <= 1, d2, d2 <= 2 * d])
    cols = ["family", "members", "domain", "k", "dim", "max_growth_ratio", "growth_ok",
            "product_dim", "product_ok"]
    return cols, rows, {}, None


# ---------------------------------------------------------------------------
# extension-check: envy of the NN extension against the net-radius bound


def lipschitz_world(q: int, k: int, L: float, seed: int):
    """Clipped linear utility with Euclidean Lipschitz constant exactly ``L``."""
    rng = np.random.default_rng([seed, 40])
    W = rng.normal(size=(k, q))
    W *= L / np.linalg.norm(W, axis=1).max()
    u = LinearFeatureModel(W, rng.uniform(0.2, 0.8, k))
    loss = LinearFeatureModel(rng.uniform(-1, 1, (k, q)) / q, rng.uniform(0.3, 0.7, k))
    return u, loss


def _extension_trial(q, k, L, n, holdout, seed):
    u, loss = lipschitz_world(q, k, L, seed)
    S = Sample.from_features(np.random.default_rng([seed, 41]).random((n, q)))
    base = erm.solve_randomized_ef_erm(S, u, loss, k).assignment
    h = extend(base, EUCLIDEAN)
    first, second = pair_stream(UniformCube(q), _stream_seed(seed, 42), 0, holdout)
    r = net_radius(S, first)
    worst = float(pair_gaps(h, u, first, second).max())
    return r, worst


def _extension_check(cfg: ExperimentConfig):
    p = cfg.params
    rows = []
    for t in range(p["trials"]):
        r, worst = _extension_trial(p["q"], p["k"], p["L"], p["n"], p["holdout"], cfg.seed + t)
        bound = 2 * p["L"] * r
        rows.append([t, p["n"], r, worst, bound, worst <= bound + 1e-9])
    cols = ["trial", "n", "net_radius", "max_gap", "bound", "within_bound"]
    return cols, rows, {}, None


# ---------------------------------------------------------------------------
# sample-size guidance


def sample_size_helper(d: int, m: int, k: int, gamma: float, delta: float,
                       tail: str = "gamma") -> tuple[int, int]:
    """Order-of-magnitude sample sizes with every hidden constant set to 1.

    Returns ``(mixture, single)``: the pair count for m-component mixtures
    over a family of Natarajan dimension ``d`` with ``k`` outcomes, and the
    single-classifier count ``(d log k + log 1/delta) / gamma^2``.  These
    are guidance, not guarantees.  The mixture bound as usually displayed
    ends in ``log(1/gamma)`` where ``log(1/delta)`` would be expected;
    ``tail`` picks which one is used.
    """
    if min(d, m, k, gamma, delta) <= 0:
        raise ContractError("all arguments must be positive")
    if tail not in ("gamma", "delta"):
        raise ContractError("tail must be 'gamma' or 'delta'")
    return math.ceil(_mixture_size(d, m, k, gamma, delta, tail)), math.ceil(_single_size(d, k, gamma, delta))


def _mixture_size(d, m, k, gamma, delta, tail="gamma") -> float:
    inner = math.log(d * m * k * math.log(m * k / gamma)) / gamma
    last = math.log(1 / gamma) if tail == "gamma" else math.log(1 / delta)
    return (d * m**2 * inner + last) / gamma**2


def _single_size(d, k, gamma, delta) -> float:
    return (d * math.log(k) + math.log(1 / delta)) / gamma**2


# ---------------------------------------------------------------------------
# running and reporting

RUNNERS = {
    "example1": _example1,
    "erm": _erm,
    "lowerbound": _lowerbound,
    "mixture-gen": _mixture_gen,
    "natarajan": _natarajan,
    "extension-check": _extension_check,
}


def run(cfg: ExperimentConfig, out: str | Path | None = None, plots: bool = True) -> RunManifest:
    """Run the configured experiment and write its outputs."""
    out_dir = Path(out if out is not None else cfg.out)
    _prepare(out_dir)
    t0 = time.perf_counter()
    cols, rows, summary, plot = RUNNERS[cfg.experiment](cfg)
    manifest = RunManifest(
        experiment=cfg.experiment,
        config_digest=cfg.digest(),
        seed=cfg.seed,
        columns=list(cols),
        rows=[[_cell(v) for v in r] for r in rows],
        summary=summary,
        wall_time=time.perf_counter() - t0,
        plot=plot if plots else None,
    )
    emit_report(manifest, out_dir)
    return manifest


def _prepare(out_dir: Path):
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise DataError(f"output directory {out_dir} is not writable: {exc.strerror}") from None


def write_results_csv(path, columns, rows):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, quoting=csv.QUOTE_NONNUMERIC, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(v) for v in r])


def emit_report(manifest: RunManifest, out_dir) -> list[Path]:
    """Write ``results.csv``, ``manifest.json`` and the chart, if any."""
    out_dir = Path(out_dir)
    _prepare(out_dir)
    written = [out_dir / "results.csv", out_dir / "manifest.json"]
    try:
        write_results_csv(written[0], manifest.columns, manifest.rows)
        written[1].write_text(manifest.to_json() + "\n")
    except OSError as exc:
        raise DataError(f"cannot write results to {out_dir}: {exc.strerror}") from None
    if manifest.plot and manifest.plot["x"]:
        written.append(_plot(manifest.plot, out_dir))
    return written


def _plot(plot: dict, out_dir: Path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "envyfree", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        if plot["kind"] == "sweep":
            ax.plot(plot["x"], plot["y"], marker="o")
            ax.set_xscale("log")
            ax.set_xlabel("training pairs n")
            ax.set_ylabel("mean test envy - train envy")
            name = "gap_vs_n.svg"
        else:
            ax.plot(plot["x"], plot["y"], marker=".", linestyle="none")
            ax.axhline(1 / 25, color="gray", linestyle="--", linewidth=1)
            ax.set_xlabel("seed")
            ax.set_ylabel("alpha_hat")
            name = "alpha_vs_seed.svg"
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        path = out_dir / name
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
