"""Unsupervised vertex hunting baselines: successive projection and sketched vertex search."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .clustering import kmeans
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import BudgetError, InputError, RankError

__all__ = [
    "SvsConfig",
    "project_to_simplex",
    "successive_projection",
    "distance_to_simplex",
    "sketched_vertex_search",
]


def successive_projection(X, K: int, tol: Tolerances = DEFAULT_TOLERANCES, return_index: bool = False):
    """Greedy vertex selection by maximal residual norm.

    Each step picks the row with the largest norm after projecting out the
    span of the rows already chosen.  Ties go to the smallest index.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if n < K:
        raise InputError(f"need at least K={K} points, got {n}")
    R = X.copy()
    chosen = []
    for _ in range(K):
        norms = np.einsum("ij,ij->i", R, R)
        j = int(np.argmax(norms))
        if norms[j] < tol.sp_residual**2:
            raise RankError(
                f"all residuals vanish after {len(chosen)} vertices; the points span "
                f"fewer than K={K} directions"
            )
        chosen.append(j)
        u = R[j] / np.sqrt(norms[j])
        R -= np.outer(R @ u, u)
    idx = np.array(chosen)
    return (X[idx], idx) if return_index else X[idx]


def project_to_simplex(Y) -> np.ndarray:
    """Euclidean projection of each row of ``Y`` onto the probability simplex."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    U = -np.sort(-Y, axis=1)
    css = np.cumsum(U, axis=1) - 1.0
    ind = np.arange(1, Y.shape[1] + 1)
    rho = np.count_nonzero(U - css / ind > 0, axis=1)
    theta = css[np.arange(Y.shape[0]), rho - 1] / rho
    return np.maximum(Y - theta[:, None], 0.0)


def _affine_fit(Y, V):
    """Barycentric coordinates and distance of each row of ``Y`` to the affine hull of ``V``.

    Returns ``None`` when the rows of ``V`` are affinely dependent.
    """
    D = (V[1:] - V[0]).T
    if D.shape[1] and np.linalg.matrix_rank(D) < D.shape[1]:
        return None
    R = (Y - V[0]).T
    c = np.linalg.lstsq(D, R, rcond=None)[0] if D.shape[1] else np.zeros((0, Y.shape[0]))
    W = np.vstack([1.0 - c.sum(axis=0), c]).T
    return W, np.linalg.norm(R - D @ c, axis=0)


def _pg_distances(Y, V, tol: Tolerances) -> np.ndarray:
    # Projected gradient on min_w ||y - V'w||^2 over the simplex, all rows at once.
    K = V.shape[0]
    G = V @ V.T
    L = float(np.linalg.eigvalsh(G)[-1])
    if L <= 0:
        return np.linalg.norm(Y, axis=1)
    Wt = np.full((Y.shape[0], K), 1.0 / K)
    YV = Y @ V.T
    for _ in range(tol.pg_max_iter):
        grad = Wt @ G - YV
        new = project_to_simplex(Wt - grad / L)
        step = np.abs(new - Wt).max()
        Wt = new
        if step < tol.pg_tol:
            break
    return np.linalg.norm(Y - Wt @ V, axis=1)


_FACE_ENUM_MAX_K = 8


def _face_distances(Y, V) -> np.ndarray | None:
    # exact: the nearest point lies in the relative interior of some face, where
    # it is the affine projection with nonnegative coordinates
    K = V.shape[0]
    best = np.full(Y.shape[0], np.inf)
    for r in range(1, K + 1):
        for face in itertools.combinations(range(K), r):
            fit = _affine_fit(Y, V[list(face)])
            if fit is None:
                return None
            W, dist = fit
            ok = W.min(axis=1) >= -1e-12
            best[ok] = np.minimum(best[ok], dist[ok])
    return best


def _simplex_distances(Y, V, tol: Tolerances, affine=None) -> np.ndarray:
    # points projecting inside the simplex are resolved from the affine fit
    Y = np.atleast_2d(Y)
    affine = _affine_fit(Y, V) if affine is None else affine
    if affine is None:
        return _pg_distances(Y, V, tol)
    W, dist = affine
    out = np.asarray(dist, dtype=float).copy()
    outside = np.flatnonzero(W.min(axis=1) < 0)
    if outside.size:
        exact = _face_distances(Y[outside], V) if V.shape[0] <= _FACE_ENUM_MAX_K else None
        out[outside] = exact if exact is not None else _pg_distances(Y[outside], V, tol)
    return out


def distance_to_simplex(y, V, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Euclidean distance from ``y`` to the convex hull of the rows of ``V``."""
    y = np.asarray(y, dtype=float).ravel()
    V = np.asarray(V, dtype=float)
    if V.ndim != 2 or V.shape[1] != y.size:
        raise InputError(f"point of dimension {y.size} against vertices of shape {V.shape}")
    return float(_simplex_distances(y[None, :], V, tol)[0])


@dataclass(frozen=True)
class SvsConfig:
    L: int

    def check(self, K: int, tol: Tolerances = DEFAULT_TOLERANCES) -> None:
        if self.L < K:
            raise InputError(f"SVS needs L >= K, got L={self.L}, K={K}")
        if math.comb(self.L, K) > tol.svs_budget:
            raise BudgetError(
                f"C({self.L}, {K}) = {math.comb(self.L, K)} candidate simplices exceeds "
                f"the budget of {tol.svs_budget}"
            )


def sketched_vertex_search(X, K: int, cfg: SvsConfig | None = None, seed: int = 0,
                           tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """k-means the rows of ``X`` into ``L`` centers, then pick the K centers
    whose simplex leaves the other centers closest (minimax distance).

    Ties are broken by the lexicographically smallest index tuple.
    """
    X = np.asarray(X, dtype=float)
    cfg = cfg or SvsConfig(10 * K)
    cfg.check(K, tol)
    _, centers = kmeans(X, cfg.L, seed, tol)
    best, best_d = None, np.inf
    all_idx = np.arange(cfg.L)
    for combo in itertools.combinations(range(cfg.L), K):
        rest = np.setdiff1d(all_idx, combo, assume_unique=True)
        if rest.size == 0:
            return centers[list(combo)]
        Vc, Y = centers[list(combo)], centers[rest]
        # the affine-hull distance bounds the simplex distance from below
        affine = _affine_fit(Y, Vc)
        if affine is not None and affine[1].max() >= best_d:
            continue
        d = _simplex_distances(Y, Vc, tol, affine).max()
        if d < best_d:
            best, best_d = combo, d
    return centers[list(best)]
