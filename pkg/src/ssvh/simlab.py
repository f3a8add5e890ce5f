"""Simulation laboratory: synthetic simplex data, repeated runs, summaries.

Each repetition draws its own generator from ``base_seed + rep`` so a rep's
data never depends on the order in which reps execute.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import SvsConfig, sketched_vertex_search, successive_projection
from .config import DEFAULT_TOLERANCES, Tolerances
from .core import matched_loss, weights_to_labels
from .engine import AlphaMethod, ssvh
from .errors import InputError, SSVHError

log = logging.getLogger(__name__)

RNG_ID = "numpy.random.PCG64(SeedSequence(base_seed+rep))"

__all__ = [
    "WeightScheme",
    "ExperimentConfig",
    "ExperimentRecord",
    "Instance",
    "gen_b",
    "gen_vertices",
    "gen_weights",
    "synthesize_instance",
    "run_method",
    "run_experiment",
    "summarize",
    "write_records_csv",
    "write_summary_csv",
]


class WeightScheme(str, Enum):
    balanced_dirichlet = "balanced_dirichlet"
    dirichlet_with_pure = "dirichlet_with_pure"
    large_k_scheme = "large_k_scheme"


METHODS = ("ssvh", "sp", "svs")


@dataclass(frozen=True)
class ExperimentConfig:
    id: str
    n: int = 1000
    K: int = 3
    sigma: float = 0.2
    label_ratio: float | None = 0.03
    label_count: int | None = None
    weight_scheme: WeightScheme = WeightScheme.balanced_dirichlet
    alpha_method: AlphaMethod = AlphaMethod.variance
    methods: tuple[str, ...] = ("ssvh", "sp")
    reps: int = 50
    base_seed: int = 0
    svs_L: int | None = None
    timing: bool = True

    def __post_init__(self):
        object.__setattr__(self, "weight_scheme", WeightScheme(self.weight_scheme))
        object.__setattr__(self, "alpha_method", AlphaMethod(self.alpha_method))
        object.__setattr__(self, "methods", tuple(self.methods))
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise InputError(f"unknown methods {sorted(unknown)}; choose from {METHODS}")
        if self.reps < 1:
            raise InputError("reps must be >= 1")
        if not self.sigma >= 0:
            raise InputError("sigma must be >= 0")
        if self.n < self.K or self.K < 1:
            raise InputError("need n >= K >= 1")
        if self.N < self.K:
            raise InputError(f"label count {self.N} is below K={self.K}")
        if self.N > self.n:
            raise InputError(f"label count {self.N} exceeds n={self.n}")

    @property
    def N(self) -> int:
        """Number of labeled points."""
        if self.label_count is not None:
            return int(self.label_count)
        if self.label_ratio is None:
            if self.weight_scheme is WeightScheme.large_k_scheme:
                return 4 * self.K
            raise InputError("give label_ratio or label_count")
        return int(round(self.label_ratio * self.n))

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise InputError(f"unknown config fields {sorted(unknown)}")
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            raise InputError(f"invalid experiment config: {exc}") from exc

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"{path}: {exc}") from exc
        if not isinstance(data, dict):
            raise InputError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["weight_scheme"] = self.weight_scheme.value
        d["alpha_method"] = self.alpha_method.value
        d["methods"] = list(self.methods)
        return d


@dataclass(frozen=True)
class ExperimentRecord:
    config_id: str
    rep: int
    method: str
    matched_loss: float
    matched_loss_squared: float
    wall_time_ms: float
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class Instance:
    X: np.ndarray
    S: np.ndarray
    PiS: np.ndarray
    V: np.ndarray
    b: np.ndarray
    W: np.ndarray


def gen_b(K: int, rng: np.random.Generator) -> np.ndarray:
    b = rng.uniform(0.9, 1.1, size=K)
    return b / np.linalg.norm(b)


def gen_vertices(K: int, rng: np.random.Generator) -> np.ndarray:
    V = rng.uniform(0.0, 1.0 / K, size=(K, K))
    np.fill_diagonal(V, 1.0)
    return V


def _dirichlet(rng, conc, size) -> np.ndarray:
    return rng.dirichlet(conc, size=size)


def gen_weights(scheme, n: int, K: int, S, rng: np.random.Generator) -> np.ndarray:
    """All ``n`` weight rows under one of the simulation recipes.

    ``balanced_dirichlet``
        Every row from ``Dirichlet(1/K, ..., 1/K)``.
    ``dirichlet_with_pure``
        Per vertex k: 2 labeled rows from ``0.1 Dir(1/K) + 0.9 e_k`` and 30
        unlabeled rows equal to ``e_k``; the rest ``Dir(1/K)``.
    ``large_k_scheme``
        Per vertex k: 2 labeled rows from ``0.1 Dir(1) + 0.9 e_k`` and 10
        unlabeled rows equal to ``e_k``; 2 labeled rows from
        ``0.1 Dir(1) + 0.9/K``; everything else ``Dir(1)``.
    """
    scheme = WeightScheme(scheme)
    S = np.asarray(S, dtype=np.int64)
    N = S.size
    Sc = np.setdiff1d(np.arange(n), S)

    if scheme is WeightScheme.balanced_dirichlet:
        return _dirichlet(rng, np.full(K, 1.0 / K), n)

    if scheme is WeightScheme.dirichlet_with_pure:
        conc, near_pure, pure_per_k, center = np.full(K, 1.0 / K), 2, 30, 0
    else:
        conc, near_pure, pure_per_k, center = np.ones(K), 2, 10, 2
    if N < near_pure * K + center:
        raise InputError(f"{scheme.value} needs at least {near_pure * K + center} labeled rows, got {N}")
    if Sc.size < pure_per_k * K:
        raise InputError(f"{scheme.value} needs at least {pure_per_k * K} unlabeled rows, got {Sc.size}")

    W = _dirichlet(rng, conc, n)
    eye = np.eye(K)
    rows = []
    for k in range(K):
        rows.append(0.1 * _dirichlet(rng, conc, near_pure) + 0.9 * eye[k])
    if center:
        rows.append(0.1 * _dirichlet(rng, conc, center) + 0.9 / K)
    special = np.vstack(rows)
    W[S[: special.shape[0]]] = special
    pure_rows = rng.choice(Sc, size=pure_per_k * K, replace=False)
    W[pure_rows] = np.repeat(eye, pure_per_k, axis=0)
    return W


def synthesize_instance(config: ExperimentConfig, rep: int) -> Instance:
    """Draw one repetition's data: ``X = W V + sigma * Z`` plus labels on ``S``.

    Labels invert the distortion map, ``pi_i = (w_i / b) / ||w_i / b||_1``.
    """
    rng = np.random.default_rng(config.base_seed + rep)
    K, n = config.K, config.n
    b = gen_b(K, rng)
    V = gen_vertices(K, rng)
    S = np.sort(rng.choice(n, size=config.N, replace=False))
    W = gen_weights(config.weight_scheme, n, K, S, rng)
    X = W @ V + config.sigma * rng.standard_normal((n, V.shape[1]))
    PiS = weights_to_labels(b, W[S])
    return Instance(X, S, PiS, V, b, W)


def run_method(method: str, inst: Instance, config: ExperimentConfig,
               seed: int, tol: Tolerances = DEFAULT_TOLERANCES):
    """Run one estimator on one instance; returns ``(V_hat, warnings)``."""
    K = config.K
    if method == "ssvh":
        fit = ssvh(K, inst.X[inst.S], inst.PiS, config.alpha_method, seed, tol=tol)
        return fit.V_hat, fit.warnings
    if method == "sp":
        return successive_projection(inst.X, K, tol), ()
    if method == "svs":
        cfg = SvsConfig(config.svs_L or 10 * K)
        return sketched_vertex_search(inst.X, K, cfg, seed, tol), ()
    raise InputError(f"unknown method {method!r}")


def _run_rep(config: ExperimentConfig, rep: int, tol: Tolerances) -> list[ExperimentRecord]:
    inst = synthesize_instance(config, rep)
    seed = config.base_seed + rep
    out = []
    for method in config.methods:
        t0 = time.perf_counter()
        try:
            V_hat, notes = run_method(method, inst, config, seed, tol)
        except SSVHError as exc:
            ms = (time.perf_counter() - t0) * 1e3 if config.timing else float("nan")
            out.append(ExperimentRecord(config.id, rep, method, float("nan"), float("nan"),
                                        ms, (f"error: {exc}",)))
            continue
        ms = (time.perf_counter() - t0) * 1e3 if config.timing else float("nan")
        out.append(ExperimentRecord(
            config.id, rep, method,
            matched_loss(V_hat, inst.V),
            matched_loss(V_hat, inst.V, squared=True),
            ms, tuple(notes),
        ))
    return out


def run_experiment(config: ExperimentConfig, threads: int = 1,
                   tol: Tolerances = DEFAULT_TOLERANCES):
    """Run every method on every repetition.

    Returns ``(records, summary)``; records are ordered by (rep, method)
    regardless of ``threads``.
    """
    reps = range(config.reps)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda r: _run_rep(config, r, tol), reps))
    else:
        chunks = [_run_rep(config, r, tol) for r in reps]
    records = [rec for chunk in chunks for rec in chunk]
    return records, summarize(records, config.methods)


def summarize(records, methods) -> list[dict]:
    """Median, median absolute deviation and mean wall time per method.

    Failed repetitions (NaN loss) are excluded and counted.
    """
    rows = []
    for method in methods:
        recs = [r for r in records if r.method == method]
        loss = np.array([r.matched_loss for r in recs])
        sq = np.array([r.matched_loss_squared for r in recs])
        ok = np.isfinite(loss)
        med = float(np.median(loss[ok])) if ok.any() else float("nan")
        mad = float(np.median(np.abs(loss[ok] - med))) if ok.any() else float("nan")
        ms = np.array([r.wall_time_ms for r in recs])
        rows.append({
            "method": method,
            "median": med,
            "mad": mad,
            "median_squared": float(np.median(sq[ok])) if ok.any() else float("nan"),
            "mean_ms": float(np.mean(ms)) if np.isfinite(ms).all() and ms.size else float("nan"),
            "n_ok": int(ok.sum()),
            "n_failed": int((~ok).sum()),
        })
    return rows


def _fmt(x) -> str:
    if isinstance(x, float):
        return "nan" if np.isnan(x) else repr(x)
    return str(x)


def _header_line(config: ExperimentConfig) -> str:
    return f"# ssvh {__version__} rng={RNG_ID} base_seed={config.base_seed} config={config.id}\n"


def write_records_csv(records, config: ExperimentConfig, path) -> None:
    buf = io.StringIO()
    buf.write(_header_line(config))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["config_id", "rep", "method", "matched_loss", "matched_loss_squared",
                "wall_time_ms", "warnings"])
    for r in records:
        w.writerow([r.config_id, r.rep, r.method, _fmt(r.matched_loss),
                    _fmt(r.matched_loss_squared), _fmt(r.wall_time_ms), "; ".join(r.warnings)])
    Path(path).write_text(buf.getvalue())


def write_summary_csv(summary, config: ExperimentConfig, path) -> None:
    buf = io.StringIO()
    buf.write(_header_line(config))
    cols = ["method", "median", "mad", "median_squared", "mean_ms", "n_ok", "n_failed"]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in summary:
        w.writerow([_fmt(row[c]) for c in cols])
    Path(path).write_text(buf.getvalue())
