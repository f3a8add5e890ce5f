"""Simplex model primitives.

Points follow ``x_i = r_i + eps_i`` with ``r_i = W[i] @ V``; a labeled
point additionally carries a distorted barycentric label ``pi_i`` related
to its true weight by ``w_i = (b * pi_i) / ||b * pi_i||_1`` for an unknown
positive vector ``b``.  Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .config import DEFAULT_TOLERANCES
from .errors import IdentifiabilityError, InputError

__all__ = [
    "DistortionVector",
    "LabeledCloud",
    "NoiseKind",
    "NoiseSpec",
    "VertexMatrix",
    "WeightMatrix",
    "as_probability_rows",
    "distort_to_weights",
    "weights_to_labels",
    "weights_to_points",
    "label_basis",
    "orthocomp_projector",
    "normalize_eigvec",
    "matched_loss",
    "matched_loss_bruteforce",
]


def _as_matrix(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2:
        raise InputError(f"{name} must be a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite entries")
    return arr


def as_probability_rows(P, name: str = "labels", tol: float = DEFAULT_TOLERANCES.prob_tol) -> np.ndarray:
    """Validate that rows of ``P`` are probability vectors.

    Rows within ``tol`` of the simplex are clipped and renormalized; rows
    outside it raise :class:`InputError`.
    """
    P = _as_matrix(P, name)
    if P.size and P.min() < -tol:
        i = int(np.argmin(P.min(axis=1)))
        raise InputError(f"{name}: row {i} has a negative entry {P[i].min():.3g}")
    sums = P.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
    if bad.size:
        i = int(bad[0])
        raise InputError(f"{name}: row {i} sums to {sums[i]:.12g}, not 1")
    P = np.clip(P, 0.0, None)
    return P / P.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class DistortionVector:
    b: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        if b.ndim != 1 or not np.all(np.isfinite(b)):
            raise InputError("distortion vector must be a finite 1-D array")
        if np.any(b <= 0):
            raise InputError("distortion vector entries must be positive")
        if abs(np.linalg.norm(b) - 1.0) > DEFAULT_TOLERANCES.prob_tol:
            raise InputError("distortion vector must have unit l2 norm")
        object.__setattr__(self, "b", b)

    @classmethod
    def from_unnormalized(cls, b) -> "DistortionVector":
        b = np.asarray(b, dtype=float)
        return cls(b / np.linalg.norm(b))

    @property
    def K(self) -> int:
        return self.b.size


@dataclass(frozen=True)
class VertexMatrix:
    """Rows are simplex vertices, shape ``(K, d)``."""

    V: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "V", _as_matrix(self.V, "vertex matrix"))

    @property
    def K(self) -> int:
        return self.V.shape[0]

    def is_affinely_independent(self, rtol: float = 1e-10) -> bool:
        if self.K == 1:
            return True
        diffs = self.V[1:] - self.V[0]
        s = np.linalg.svd(diffs, compute_uv=False)
        return bool(s.size >= self.K - 1 and s[self.K - 2] > rtol * max(s[0], 1.0))


@dataclass(frozen=True)
class WeightMatrix:
    W: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "W", as_probability_rows(self.W, "weight matrix"))


@dataclass(frozen=True)
class LabeledCloud:
    """Observed points, 0-based labeled indices and their distorted labels."""

    X: np.ndarray
    S: np.ndarray
    PiS: np.ndarray

    def __post_init__(self):
        X = _as_matrix(self.X, "X")
        S = np.asarray(self.S)
        if S.ndim != 1 or (S.size and not np.issubdtype(S.dtype, np.integer)):
            raise InputError("label index set must be a 1-D integer array")
        S = S.astype(np.int64)
        if np.unique(S).size != S.size:
            raise InputError("label index set contains duplicates")
        if S.size and (S.min() < 0 or S.max() >= X.shape[0]):
            raise InputError("label index out of range")
        PiS = as_probability_rows(self.PiS, "labels")
        if PiS.shape[0] != S.size:
            raise InputError(f"{PiS.shape[0]} label rows for {S.size} labeled indices")
        if S.size < PiS.shape[1]:
            raise InputError(f"need at least K={PiS.shape[1]} labeled points, got {S.size}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "PiS", PiS)

    @property
    def K(self) -> int:
        return self.PiS.shape[1]

    @property
    def XS(self) -> np.ndarray:
        return self.X[self.S]


class NoiseKind(str, Enum):
    gaussian_iid = "gaussian_iid"


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float = 0.0
    kind: NoiseKind = field(default=NoiseKind.gaussian_iid)

    def __post_init__(self):
        if not self.sigma >= 0:
            raise InputError("noise scale sigma must be >= 0")

    def sample(self, shape, rng: np.random.Generator) -> np.ndarray:
        return self.sigma * rng.standard_normal(shape)


def _b_array(b) -> np.ndarray:
    return b.b if isinstance(b, DistortionVector) else np.asarray(b, dtype=float)


def distort_to_weights(b, pi) -> np.ndarray:
    """Map distorted labels to barycentric weights, ``(b*pi)/||b*pi||_1``.

    ``pi`` may be a single vector or a matrix of row vectors.
    """
    b = _b_array(b)
    pi = np.asarray(pi, dtype=float)
    prod = pi * b
    mass = np.abs(prod).sum(axis=-1, keepdims=True)
    if np.any(mass == 0):
        raise InputError("b * pi is identically zero; corrupted label or distortion vector")
    return prod / mass


def weights_to_labels(b, W) -> np.ndarray:
    """Inverse of :func:`distort_to_weights`: ``(W/b) / ||W/b||_1`` row-wise."""
    b = _b_array(b)
    return distort_to_weights(1.0 / b, W)


def weights_to_points(W, V) -> np.ndarray:
    W = np.asarray(W, dtype=float)
    V = V.V if isinstance(V, VertexMatrix) else np.asarray(V, dtype=float)
    if W.shape[-1] != V.shape[0]:
        raise InputError(f"weights have {W.shape[-1]} columns but there are {V.shape[0]} vertices")
    return W @ V


def label_basis(PiS, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (N x K) of the column space of ``PiS``.

    Uses column-pivoted QR, so a rank-deficient ``PiS`` shows up as a small
    trailing diagonal entry of ``R``.

    Raises
    ------
    IdentifiabilityError
        If ``PiS`` has rank below its column count, i.e. the labeled
        points are not spread out over the simplex.
    """
    PiS = np.asarray(PiS, dtype=float)
    N, K = PiS.shape
    if N < K:
        raise IdentifiabilityError(f"need at least K={K} labeled points, got N={N}")
    Q, R, _ = scipy.linalg.qr(PiS, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    if d[-1] <= rtol * max(d[0], 1.0):
        raise IdentifiabilityError(
            "label matrix is rank deficient; labeled points are not spread out "
            "(Assumption 1(b) violated)"
        )
    return Q


def orthocomp_projector(PiS, rtol: float = 1e-10) -> np.ndarray:
    """``I - Pi_S (Pi_S' Pi_S)^{-1} Pi_S'``, the projector onto ``col(Pi_S)``'s complement."""
    Q = label_basis(PiS, rtol)
    H = np.eye(Q.shape[0]) - Q @ Q.T
    return (H + H.T) / 2


def normalize_eigvec(v, tol: float = DEFAULT_TOLERANCES.eig_sum_zero) -> np.ndarray:
    """Scale to unit l2 norm with a positive entry sum.

    When the entry sum vanishes (within ``tol``), the sign is chosen so the
    largest-magnitude entry is positive.
    """
    v = np.asarray(v, dtype=float)
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise InputError("cannot normalize a zero vector")
    u = v / nrm
    s = u.sum()
    if abs(s) <= tol:
        s = u[np.argmax(np.abs(u))]
    return u if s > 0 else -u


def _check_same_shape(Vhat, V):
    Vhat = Vhat.V if isinstance(Vhat, VertexMatrix) else np.asarray(Vhat, dtype=float)
    V = V.V if isinstance(V, VertexMatrix) else np.asarray(V, dtype=float)
    if Vhat.shape != V.shape:
        raise InputError(f"shape mismatch: {Vhat.shape} vs {V.shape}")
    return Vhat, V


def matched_loss(Vhat, V, squared: bool = False) -> float:
    """``min_P ||P Vhat - V||_F / K`` over row permutations ``P``.

    The squared Frobenius norm splits over rows, so the minimizing
    permutation solves a linear assignment on squared row distances.
    With ``squared=True`` returns ``||P Vhat - V||_F^2 / K`` at that
    permutation.
    """
    Vhat, V = _check_same_shape(Vhat, V)
    K = V.shape[0]
    cost = ((V[:, None, :] - Vhat[None, :, :]) ** 2).sum(axis=-1)
    rows, cols = linear_sum_assignment(cost)
    sq = float(cost[rows, cols].sum())
    return sq / K if squared else float(np.sqrt(sq)) / K


def matched_loss_bruteforce(Vhat, V) -> float:
    """Exhaustive K! version of :func:`matched_loss`; test oracle only."""
    Vhat, V = _check_same_shape(Vhat, V)
    K = V.shape[0]
    return min(
        float(np.linalg.norm(Vhat[list(p)] - V)) for p in itertools.permutations(range(K))
    ) / K
