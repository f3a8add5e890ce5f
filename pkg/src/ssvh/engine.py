"""Semi-supervised vertex hunting.

Given noisy points ``X_S`` and distorted labels ``Pi_S`` for a labeled
subset, the distortion vector ``b`` is read off as the bottom eigenvector
of the K x K matrix

    M(alpha) = Pi_S' diag(H alpha) X_S X_S' diag(H alpha) Pi_S,

where ``H`` projects onto the orthogonal complement of ``col(Pi_S)``.
In the noiseless case ``M(alpha) b = 0`` for every ``alpha``.  With
``b`` in hand the labeled weights are known and the vertices follow from
least squares.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from .clustering import kmeans
from .config import DEFAULT_TOLERANCES, Tolerances
from .core import (
    as_probability_rows,
    distort_to_weights,
    normalize_eigvec,
    label_basis,
)
from .errors import DegenerateAlphaError, InputError, NumericalError, SingularDesignError

log = logging.getLogger(__name__)

__all__ = [
    "AlphaMethod",
    "AlphaVector",
    "SigmaAlpha",
    "SsvhFit",
    "build_m",
    "select_alpha",
    "select_alpha_variance",
    "select_alpha_projection",
    "estimate_b",
    "estimate_weights",
    "estimate_vertices",
    "ssvh",
    "sigma_alpha",
]


class AlphaMethod(str, Enum):
    variance = "variance"
    projection = "projection"
    user_supplied = "user_supplied"


@dataclass(frozen=True)
class AlphaVector:
    alpha: np.ndarray
    method: AlphaMethod

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        nrm = np.linalg.norm(a)
        if a.ndim != 1 or not np.isfinite(nrm) or nrm == 0:
            raise InputError("alpha must be a finite, nonzero 1-D vector")
        object.__setattr__(self, "alpha", a / nrm)
        object.__setattr__(self, "method", AlphaMethod(self.method))


@dataclass(frozen=True)
class SsvhFit:
    b_hat: np.ndarray
    V_hat: np.ndarray
    W_hat: np.ndarray
    alpha: AlphaVector
    eigengap: float
    m_spectrum: np.ndarray
    warnings: tuple[str, ...] = ()
    b_nonpositive: bool = False

    def to_dict(self) -> dict:
        return {
            "b_hat": self.b_hat.tolist(),
            "V_hat": self.V_hat.tolist(),
            "eigengap": float(self.eigengap),
            "m_spectrum": self.m_spectrum.tolist(),
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class SigmaAlpha:
    matrix: np.ndarray
    rank: int


def _basis(PiS, Q):
    return label_basis(PiS) if Q is None else Q


def _apply_h(Q, a):
    """``H a`` without forming ``H = I - Q Q'``."""
    return a - Q @ (Q.T @ a)


def build_m(PiS, Z, alpha, Q=None) -> np.ndarray:
    """Return ``Pi_S' diag(H alpha) Z Z' diag(H alpha) Pi_S``.

    ``Z`` is the N x d matrix of (noisy or noiseless) labeled points.
    ``Q`` optionally passes a precomputed :func:`~ssvh.core.label_basis`.
    """
    PiS = np.asarray(PiS, dtype=float)
    Z = np.asarray(Z, dtype=float)
    a = alpha.alpha if isinstance(alpha, AlphaVector) else np.asarray(alpha, dtype=float)
    if Z.shape[0] != PiS.shape[0] or a.shape != (PiS.shape[0],):
        raise InputError(
            f"inconsistent shapes: labels {PiS.shape}, points {Z.shape}, alpha {a.shape}"
        )
    h = _apply_h(_basis(PiS, Q), a)
    J = Z.T @ (h[:, None] * PiS)
    M = J.T @ J
    return (M + M.T) / 2


def select_alpha_variance(PiS, Q=None, tol: Tolerances = DEFAULT_TOLERANCES) -> AlphaVector:
    """Unit ``alpha`` maximizing ``||Pi_S' diag(H alpha) Pi_S||_F^2``.

    The objective equals ``(H alpha)' (Gamma_S ** 2) (H alpha)`` with
    ``Gamma_S = Pi_S Pi_S'`` squared entrywise, so the maximizer is the top
    eigenvector of ``H (Gamma_S ** 2) H``.
    """
    PiS = np.asarray(PiS, dtype=float)
    Q = _basis(PiS, Q)
    G2 = (PiS @ PiS.T) ** 2
    HG = G2 - Q @ (Q.T @ G2)
    T = HG - (HG @ Q) @ Q.T
    T = (T + T.T) / 2
    N = T.shape[0]
    w, v = scipy.linalg.eigh(T, subset_by_index=[N - 1, N - 1])
    if w[0] <= tol.alpha_degenerate * max(1.0, np.abs(G2).max()):
        raise DegenerateAlphaError(
            "H f(Gamma_S) H vanishes; the labels leave no informative alpha "
            "(e.g. every labeled point is pure, which carries no information about b)"
        )
    return AlphaVector(normalize_eigvec(v[:, 0], tol.eig_sum_zero), AlphaMethod.variance)


def _cluster_projector(labels: np.ndarray) -> np.ndarray:
    N = labels.size
    Pnet = np.zeros((N, labels.max() + 1))
    Pnet[np.arange(N), labels] = 1.0
    return Pnet @ np.diag(1.0 / Pnet.sum(axis=0)) @ Pnet.T


def select_alpha_projection(
    PiS, seed: int = 0, Q=None, tol: Tolerances = DEFAULT_TOLERANCES
) -> AlphaVector:
    """Top right eigenvector of ``H U_net`` after clustering labels into K+1 groups.

    ``U_net`` projects onto the span of the cluster indicators.  If
    ``U_net H U_net beta = lam beta`` with ``lam > 0`` then ``H beta`` is
    the right eigenvector of ``H U_net`` for ``lam``, so the symmetric
    problem is solved instead of iterating on the non-symmetric product.
    """
    PiS = np.asarray(PiS, dtype=float)
    N, K = PiS.shape
    if N < K + 1:
        raise InputError(f"projection alpha needs N >= K+1 = {K + 1} labeled points, got {N}")
    Q = _basis(PiS, Q)
    H = np.eye(N) - Q @ Q.T
    labels, _ = kmeans(PiS, K + 1, seed, tol)
    U = _cluster_projector(labels)
    T = U @ H @ U
    T = (T + T.T) / 2
    w, v = scipy.linalg.eigh(T, subset_by_index=[N - 1, N - 1])
    if w[0] <= tol.alpha_degenerate:
        raise DegenerateAlphaError("H U_net vanishes; clusters carry no information beyond Pi_S")
    return AlphaVector(normalize_eigvec(H @ v[:, 0], tol.eig_sum_zero), AlphaMethod.projection)


def select_alpha(PiS, method="variance", seed: int = 0, Q=None, tol=DEFAULT_TOLERANCES) -> AlphaVector:
    method = AlphaMethod(method)
    if method is AlphaMethod.variance:
        return select_alpha_variance(PiS, Q, tol)
    if method is AlphaMethod.projection:
        return select_alpha_projection(PiS, seed, Q, tol)
    raise InputError("a user-supplied alpha must be passed explicitly")


def estimate_b(M_hat, tol: Tolerances = DEFAULT_TOLERANCES):
    """Bottom eigenvector of ``M_hat``.

    Returns ``(b_hat, eigengap, spectrum, warnings)`` where the spectrum is
    ascending and the gap is between the two smallest eigenvalues.
    Non-positive entries in ``b_hat`` and a vanishing gap are reported as
    warnings, not errors.
    """
    M = np.asarray(M_hat, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError(f"M must be square, got shape {M.shape}")
    w, v = np.linalg.eigh((M + M.T) / 2)
    b = normalize_eigvec(v[:, 0], tol.eig_sum_zero)
    gap = float(w[1] - w[0]) if w.size > 1 else float("inf")
    notes = []
    scale = float(np.abs(w).max()) if w.size else 0.0
    if gap <= tol.eigengap_rel * scale or scale == 0.0:
        notes.append(
            "ambiguous b: smallest eigenvalue of M is not separated; "
            "the rank condition on Sigma(alpha) likely fails"
        )
    if np.any(b <= 0):
        notes.append(f"b_hat has {int(np.sum(b <= 0))} non-positive entries")
    return b, gap, w, notes


def estimate_weights(b_hat, PiS, policy: str = "signed", tol: Tolerances = DEFAULT_TOLERANCES):
    """Labeled weights ``(b * pi_i) / (b' pi_i)`` from an estimated ``b``.

    For a positive ``b`` the denominator is the l1 norm of ``b * pi_i``.
    When noise pushes entries of ``b_hat`` below zero, ``policy`` decides:

    ``"signed"``
        keep ``b_hat`` as is and divide by the signed sum, so rows still
        sum to one (entries may be negative);
    ``"clamp"``
        raise entries below ``tol.b_clamp`` to ``tol.b_clamp`` first.

    Returns ``(W_hat, adjusted)`` where ``adjusted`` reports whether
    ``b_hat`` had entries below ``tol.b_clamp``.
    """
    b = np.asarray(b_hat, dtype=float)
    PiS = np.asarray(PiS, dtype=float)
    adjusted = bool(np.any(b < tol.b_clamp))
    if policy == "clamp":
        b = np.maximum(b, tol.b_clamp)
    elif policy != "signed":
        raise InputError(f"unknown weight policy {policy!r}")
    prod = PiS * b
    mass = prod.sum(axis=1)
    if np.any(np.abs(mass) <= tol.b_clamp * np.abs(prod).sum(axis=1)) or np.any(mass == 0):
        raise NumericalError("a labeled row has (near) zero mass b_hat' pi_i; cannot normalize")
    return prod / mass[:, None], adjusted


def estimate_vertices(W_hat, XS, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Least-squares solution of ``XS ~ W_hat @ V`` via QR of ``W_hat``.

    Raises :class:`SingularDesignError` when
    ``lambda_min(W'W) < tol.design_cond * lambda_max(W'W)``.
    """
    W = np.asarray(W_hat, dtype=float)
    XS = np.asarray(XS, dtype=float)
    if W.shape[0] != XS.shape[0]:
        raise InputError(f"{W.shape[0]} weight rows for {XS.shape[0]} points")
    if W.shape[0] < W.shape[1]:
        raise SingularDesignError(f"{W.shape[0]} labeled rows cannot determine {W.shape[1]} vertices")
    Qw, R = np.linalg.qr(W)
    s = np.linalg.svd(R, compute_uv=False)
    if s[-1] ** 2 < tol.design_cond * s[0] ** 2:
        raise SingularDesignError(
            "W_S'W_S is numerically singular; labeled points are concentrated "
            "(Assumption 1(b) violated)"
        )
    return scipy.linalg.solve_triangular(R, Qw.T @ XS)


def ssvh(
    K: int,
    XS,
    PiS,
    alpha_method="variance",
    seed: int = 0,
    alpha=None,
    weight_policy: str = "signed",
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> SsvhFit:
    """Estimate simplex vertices from labeled points.

    Parameters
    ----------
    K : int
        Number of vertices.
    XS : array_like, shape (N, d)
        Observed labeled points.
    PiS : array_like, shape (N, K)
        Distorted barycentric labels, one probability vector per row.
    alpha_method : {"variance", "projection", "user_supplied"}
        How ``alpha`` is chosen.  ``"user_supplied"`` requires ``alpha``.
    seed : int
        Seed for the k-means step of the projection selector.
    alpha : array_like, optional
        Explicit ``alpha`` (any nonzero scale); implies ``user_supplied``.
    weight_policy : {"signed", "clamp"}
        Treatment of non-positive entries of ``b_hat``; see
        :func:`estimate_weights`.

    Returns
    -------
    SsvhFit
    """
    XS = np.asarray(XS, dtype=float)
    PiS = as_probability_rows(PiS, "labels", tol.prob_tol)
    if XS.ndim != 2 or XS.shape[0] != PiS.shape[0]:
        raise InputError(f"{PiS.shape[0]} label rows for points of shape {XS.shape}")
    if PiS.shape[1] != K:
        raise InputError(f"labels have {PiS.shape[1]} columns, expected K={K}")
    if not np.all(np.isfinite(XS)):
        raise InputError("points contain non-finite entries")

    Q = label_basis(PiS)
    if alpha is not None or AlphaMethod(alpha_method) is AlphaMethod.user_supplied:
        if alpha is None:
            raise InputError("alpha_method='user_supplied' needs an alpha vector")
        a = AlphaVector(alpha, AlphaMethod.user_supplied)
        if a.alpha.shape != (PiS.shape[0],):
            raise InputError(f"alpha has length {a.alpha.size}, expected {PiS.shape[0]}")
    else:
        a = select_alpha(PiS, alpha_method, seed, Q, tol)

    M = build_m(PiS, XS, a, Q)
    b, gap, spectrum, notes = estimate_b(M, tol)
    W, adjusted = estimate_weights(b, PiS, weight_policy, tol)
    if adjusted and weight_policy == "clamp":
        notes.append(f"b_hat clamped at {tol.b_clamp:g} before computing weights")
    V = estimate_vertices(W, XS, tol)
    for note in notes:
        log.debug(note)
    return SsvhFit(b, V, W, a, gap, spectrum, tuple(notes), adjusted)


def sigma_alpha(alpha, PiS, b, W_S, Q=None, rtol: float = 1e-10) -> SigmaAlpha:
    """Weighted centered second moment of the labeled weights.

    ``(1/N) sum_i (H alpha)_i (pi_i' b) (w_i - wbar)(w_i - wbar)'``; rank
    ``K - 1`` certifies that ``b`` spans the null space of ``M(alpha)``.
    """
    PiS = np.asarray(PiS, dtype=float)
    W = np.asarray(W_S, dtype=float)
    b = np.asarray(b, dtype=float)
    a = alpha.alpha if isinstance(alpha, AlphaVector) else np.asarray(alpha, dtype=float)
    if W.shape != PiS.shape or b.shape != (PiS.shape[1],) or a.shape != (PiS.shape[0],):
        raise InputError("inconsistent shapes for sigma_alpha")
    h = _apply_h(_basis(PiS, Q), a)
    C = W - W.mean(axis=0)
    coef = h * (PiS @ b)
    Sigma = (C * coef[:, None]).T @ C / PiS.shape[0]
    Sigma = (Sigma + Sigma.T) / 2
    s = np.linalg.svd(Sigma, compute_uv=False)
    floor = max(rtol * s[0], 1e-14 * float(np.abs(coef).max(initial=0.0)))
    rank = int(np.sum(s > floor)) if s[0] > 0 else 0
    return SigmaAlpha(Sigma, rank)
