"""Semi-supervised mixed membership estimation under the DCMM network model.

Edges follow ``P(A_ij = 1) = theta_i theta_j pi_i' P pi_j``.  Each column
of ``A`` is projected to K dimensions and normalized,
``x_i = U' A e_i / (eta' U' A e_i)``; the embedded points obey the
labeled-simplex model, so SSVH on the labeled nodes yields ``b`` and the
vertices, from which every unlabeled membership follows by regression.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse as sp

from .baselines import project_to_simplex
from .config import DEFAULT_TOLERANCES, Tolerances
from .core import as_probability_rows, normalize_eigvec
from .engine import SsvhFit, ssvh
from .errors import InputError, SingularDesignError

log = logging.getLogger(__name__)

__all__ = [
    "DcmmParams",
    "EmbedMode",
    "EmbedSpec",
    "MembershipFit",
    "random_dcmm_params",
    "expected_signal",
    "generate_dcmm",
    "spectral_spec",
    "community_spec",
    "embed_columns",
    "estimate_memberships",
]


@dataclass(frozen=True)
class DcmmParams:
    P: np.ndarray
    theta: np.ndarray
    Pi: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        theta = np.asarray(self.theta, dtype=float)
        K = P.shape[0]
        if P.shape != (K, K) or not np.allclose(P, P.T, atol=1e-12):
            raise InputError("P must be a symmetric K x K matrix")
        if np.any(P < 0) or not np.allclose(np.diag(P), 1.0, atol=1e-12):
            raise InputError("P must be nonnegative with unit diagonal")
        if theta.ndim != 1 or np.any(theta <= 0):
            raise InputError("theta must be a positive vector")
        Pi = as_probability_rows(self.Pi, "memberships")
        if Pi.shape != (theta.size, K):
            raise InputError(f"memberships have shape {Pi.shape}, expected {(theta.size, K)}")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "Pi", Pi)

    @property
    def n(self) -> int:
        return self.theta.size

    @property
    def K(self) -> int:
        return self.P.shape[0]


def random_dcmm_params(n: int, K: int, rng: np.random.Generator, theta_range=(0.5, 1.0),
                       offdiag=(0.0, 0.3), concentration=1.0) -> DcmmParams:
    """DCMM parameters with Dirichlet memberships and uniform degree parameters."""
    P = np.triu(rng.uniform(*offdiag, size=(K, K)), 1)
    P = P + P.T + np.eye(K)
    theta = rng.uniform(*theta_range, size=n)
    Pi = rng.dirichlet(np.full(K, concentration), size=n)
    return DcmmParams(P, theta, Pi)


def expected_signal(params: DcmmParams) -> np.ndarray:
    """``Omega = diag(theta) Pi P Pi' diag(theta)``; ``E[A]`` is Omega minus its diagonal."""
    T = params.theta[:, None] * params.Pi
    return T @ params.P @ T.T


def generate_dcmm(params: DcmmParams, seed: int) -> np.ndarray:
    """Symmetric, hollow 0/1 adjacency with independent Bernoulli upper triangle."""
    Omega = expected_signal(params)
    n = params.n
    iu = np.triu_indices(n, 1)
    probs = Omega[iu]
    if probs.size and probs.max() > 1.0:
        raise InputError(f"edge probability {probs.max():.4g} exceeds 1; shrink theta or P")
    rng = np.random.default_rng(seed)
    draws = rng.random(probs.size) < probs
    A = np.zeros((n, n), dtype=np.int8)
    A[iu] = draws
    return A + A.T


class EmbedMode(str, Enum):
    spectral_topK = "spectral_topK"
    community_indicator = "community_indicator"
    user_supplied = "user_supplied"


@dataclass(frozen=True)
class EmbedSpec:
    U: np.ndarray
    eta: np.ndarray
    mode: EmbedMode = EmbedMode.user_supplied

    def __post_init__(self):
        U = np.asarray(self.U, dtype=float)
        eta = np.asarray(self.eta, dtype=float)
        if U.ndim != 2 or eta.shape != (U.shape[1],):
            raise InputError(f"U of shape {U.shape} does not match eta of shape {eta.shape}")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "mode", EmbedMode(self.mode))


def _leading_eigvecs(A, K: int) -> np.ndarray:
    if sp.issparse(A) and A.shape[0] > 2000:
        from scipy.sparse.linalg import eigsh

        w, v = eigsh(A.astype(float), k=K, which="LM")
    else:
        dense = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
        w, v = np.linalg.eigh((dense + dense.T) / 2)
    order = np.argsort(-np.abs(w), kind="stable")[:K]
    return v[:, order]


def spectral_spec(M, K: int) -> EmbedSpec:
    """Leading K eigenvectors (by magnitude) of a symmetric matrix, ``eta = e_1``.

    Columns are sign-normalized; the first is flipped if needed so that
    ``e_1' U' M e_i > 0`` for a majority of columns ``i``.
    """
    U = _leading_eigvecs(M, K)
    U = np.column_stack([normalize_eigvec(U[:, k]) for k in range(K)])
    first = M.T @ U[:, 0]
    if 2 * np.count_nonzero(first > 0) < first.size:
        U[:, 0] = -U[:, 0]
    eta = np.zeros(K)
    eta[0] = 1.0
    return EmbedSpec(U, eta, EmbedMode.spectral_topK)


def community_spec(Pi_cd) -> EmbedSpec:
    """``U`` = a hard community assignment matrix, ``eta = 1_K``."""
    U = np.asarray(Pi_cd, dtype=float)
    return EmbedSpec(U, np.ones(U.shape[1]), EmbedMode.community_indicator)


def embed_columns(M, spec: EmbedSpec, tol: Tolerances = DEFAULT_TOLERANCES):
    """Rows ``U' M e_i / (eta' U' M e_i)``.

    Returns ``(X, valid)``; columns whose normalizer is below
    ``tol.embed_denominator`` in magnitude are marked invalid and their
    rows are NaN.
    """
    if M.shape[0] != spec.U.shape[0]:
        raise InputError(f"U has {spec.U.shape[0]} rows for a matrix of size {M.shape[0]}")
    if np.linalg.matrix_rank(spec.U) < spec.U.shape[1]:
        raise InputError("embedding matrix U is rank deficient")
    Y = np.asarray(M.T @ spec.U)
    den = Y @ spec.eta
    valid = np.abs(den) >= tol.embed_denominator
    X = np.full_like(Y, np.nan)
    X[valid] = Y[valid] / den[valid, None]
    return X, valid


@dataclass(frozen=True)
class MembershipFit:
    nodes: np.ndarray
    pi_hat: np.ndarray
    fit: SsvhFit
    spec: EmbedSpec
    X: np.ndarray
    missing: np.ndarray = field(default_factory=lambda: np.array([], dtype=np.int64))
    fallback: np.ndarray = field(default_factory=lambda: np.array([], dtype=np.int64))
    warnings: tuple[str, ...] = ()


def _regression_map(b_hat, V_hat, U, tol: Tolerances):
    B = b_hat[:, None] * V_hat
    G = B @ B.T
    ev = np.linalg.eigvalsh((G + G.T) / 2)
    if ev[0] < tol.design_cond * ev[-1]:
        raise SingularDesignError("B B' is numerically singular; cannot map embeddings back")
    return U @ np.linalg.solve(G, B).T


def _renormalize(P_tilde: np.ndarray):
    clipped = np.clip(P_tilde, 0.0, None)
    mass = clipped.sum(axis=1)
    out = np.empty_like(P_tilde)
    ok = mass > 0
    out[ok] = clipped[ok] / mass[ok, None]
    fallback = np.flatnonzero(~ok)
    if fallback.size:
        out[fallback] = project_to_simplex(P_tilde[fallback])
    return out, fallback


def estimate_memberships(A, PiS, S, K: int, spec: EmbedSpec | None = None,
                         alpha_method="variance", seed: int = 0,
                         tol: Tolerances = DEFAULT_TOLERANCES) -> MembershipFit:
    """Estimate memberships of every unlabeled node.

    Parameters
    ----------
    A : array_like or sparse matrix, shape (n, n)
        Adjacency (or noiseless signal) matrix.
    PiS : array_like, shape (N, K)
        Known memberships of the labeled nodes.
    S : array_like of int
        0-based labeled node indices, aligned with ``PiS``.
    spec : EmbedSpec, optional
        Projection ``U`` and normalizer ``eta``; defaults to the leading
        K eigenvectors of ``A`` with ``eta = e_1``.

    Returns
    -------
    MembershipFit
        ``pi_hat[j]`` is the membership of node ``nodes[j]``.  Nodes whose
        embedding is undefined (e.g. zero degree) are listed in ``missing``;
        nodes whose regression output had no positive entry were projected
        onto the simplex instead and are listed in ``fallback``.
    """
    A = A.tocsr() if sp.issparse(A) else np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise InputError(f"adjacency must be square, got shape {A.shape}")
    S = np.asarray(S, dtype=np.int64)
    PiS = as_probability_rows(PiS, "labels", tol.prob_tol)
    if PiS.shape != (S.size, K):
        raise InputError(f"labels of shape {PiS.shape} for {S.size} nodes and K={K}")
    if np.unique(S).size != S.size or (S.size and (S.min() < 0 or S.max() >= n)):
        raise InputError("labeled node indices must be distinct and in range")

    spec = spec or spectral_spec(A, K)
    X, valid = embed_columns(A, spec, tol)
    if not valid[S].all():
        bad = S[~valid[S]]
        raise InputError(f"labeled nodes {(bad + 1).tolist()} have an undefined embedding (zero degree?)")
    notes = []
    unlabeled = np.setdiff1d(np.arange(n), S)
    missing = unlabeled[~valid[unlabeled]]
    if missing.size:
        notes.append(f"{missing.size} unlabeled nodes have an undefined embedding and are skipped")

    fit = ssvh(K, X[S], PiS, alpha_method, seed, tol=tol)
    notes.extend(fit.warnings)
    nodes = unlabeled[valid[unlabeled]]
    Map = _regression_map(fit.b_hat, fit.V_hat, spec.U, tol)
    P_tilde = np.asarray(A[nodes] @ Map) if sp.issparse(A) else A[nodes] @ Map
    pi_hat, fb = _renormalize(P_tilde)
    fallback = nodes[fb]
    if fallback.size:
        notes.append(f"{fallback.size} nodes had no positive membership entry; projected onto the simplex")
    for note in notes:
        log.warning(note)
    return MembershipFit(nodes, pi_hat, fit, spec, X, missing, fallback, tuple(notes))
