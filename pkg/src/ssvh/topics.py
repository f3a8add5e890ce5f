"""Semi-supervised topic modeling under pLSI.

Column ``i`` of the word-count matrix is ``Multinomial(N_i, A gamma_i)``.
Each word row of the frequency matrix ``D`` is projected to K dimensions,
``x_j = U' D' e_j / (eta' U' D' e_j)``.  The embedded words follow the
labeled-simplex model with normalized loadings ``a*_j`` as labels, and the
topic matrix is recovered as ``A_hat = D U B' (B B')^{-1}``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .config import DEFAULT_TOLERANCES, Tolerances
from .core import as_probability_rows, normalize_eigvec
from .engine import SsvhFit, ssvh
from .errors import InputError
from .network import EmbedMode, EmbedSpec, _regression_map, embed_columns

log = logging.getLogger(__name__)

__all__ = [
    "PlsiParams",
    "TopicLoadings",
    "TopicFit",
    "random_plsi_params",
    "generate_plsi",
    "word_frequencies",
    "topic_spec",
    "estimate_topics",
]


def _column_stochastic(M, name: str, tol: float) -> np.ndarray:
    return as_probability_rows(np.asarray(M, dtype=float).T, name, tol).T


@dataclass(frozen=True)
class PlsiParams:
    A: np.ndarray
    Gamma: np.ndarray
    doc_lengths: np.ndarray

    def __post_init__(self):
        A = _column_stochastic(self.A, "topic matrix A", DEFAULT_TOLERANCES.prob_tol)
        G = _column_stochastic(self.Gamma, "topic weights Gamma", DEFAULT_TOLERANCES.prob_tol)
        N = np.asarray(self.doc_lengths)
        if A.shape[1] != G.shape[0]:
            raise InputError(f"A has {A.shape[1]} topics but Gamma has {G.shape[0]}")
        if N.shape != (G.shape[1],) or np.any(N < 1) or not np.all(N == np.round(N)):
            raise InputError("doc_lengths must be positive integers, one per document")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "Gamma", G)
        object.__setattr__(self, "doc_lengths", N.astype(np.int64))

    @property
    def p(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.Gamma.shape[1]

    @property
    def K(self) -> int:
        return self.A.shape[1]

    def signal(self) -> np.ndarray:
        """Noiseless frequency matrix ``D0 = A Gamma``."""
        return self.A @ self.Gamma


@dataclass(frozen=True)
class TopicLoadings:
    """Normalized loadings ``a*_j = a_j / ||a_j||_1`` of the labeled words (0-based ``S``)."""

    AstarS: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        AstarS = as_probability_rows(self.AstarS, "topic loadings")
        S = np.asarray(self.S, dtype=np.int64)
        if S.shape != (AstarS.shape[0],) or np.unique(S).size != S.size:
            raise InputError("labeled word indices must be distinct, one per loading row")
        object.__setattr__(self, "AstarS", AstarS)
        object.__setattr__(self, "S", S)

    @classmethod
    def from_topic_matrix(cls, A, S) -> "TopicLoadings":
        A = np.asarray(A, dtype=float)[np.asarray(S)]
        return cls(A / A.sum(axis=1, keepdims=True), S)


def random_plsi_params(p: int, n: int, K: int, doc_length: int, rng: np.random.Generator,
                       anchors_per_topic: int = 1, concentration: float = 1.0) -> PlsiParams:
    """pLSI parameters with ``anchors_per_topic`` anchor words per topic.

    The first ``K * anchors_per_topic`` words are anchors (word ``k*m + t`` is
    exclusive to topic ``k``); other loadings are uniform draws.  Columns of
    ``A`` are then normalized, and documents get Dirichlet topic weights.
    """
    m = K * anchors_per_topic
    if p < m:
        raise InputError(f"vocabulary of {p} words cannot hold {m} anchor words")
    A = rng.uniform(0.0, 1.0, size=(p, K))
    A[:m] = 0.0
    for k in range(K):
        A[k * anchors_per_topic:(k + 1) * anchors_per_topic, k] = rng.uniform(0.5, 1.5, anchors_per_topic)
    A /= A.sum(axis=0, keepdims=True)
    Gamma = rng.dirichlet(np.full(K, concentration), size=n).T
    return PlsiParams(A, Gamma, np.full(n, doc_length))


def generate_plsi(params: PlsiParams, seed: int) -> np.ndarray:
    """Word counts ``Y`` (p x n), column ``i`` drawn from ``Multinomial(N_i, A gamma_i)``."""
    rng = np.random.default_rng(seed)
    Omega = params.signal()
    Omega = Omega / Omega.sum(axis=0, keepdims=True)
    return rng.multinomial(params.doc_lengths, Omega.T).T


def word_frequencies(Y, doc_lengths=None):
    """``D = Y diag(N)^{-1}``; ``N`` defaults to the column sums of ``Y``."""
    sparse = sp.issparse(Y)
    Y = Y.tocsc().astype(float) if sparse else np.asarray(Y, dtype=float)
    N = np.asarray(Y.sum(axis=0)).ravel() if doc_lengths is None else np.asarray(doc_lengths, dtype=float)
    if N.shape != (Y.shape[1],):
        raise InputError(f"{N.size} document lengths for {Y.shape[1]} documents")
    if np.any(N <= 0):
        raise InputError(f"document {int(np.flatnonzero(N <= 0)[0]) + 1} has length 0")
    if sparse:
        return (Y @ sp.diags(1.0 / N)).tocsr()
    return Y / N


def topic_spec(D, K: int) -> EmbedSpec:
    """Leading K right singular vectors of ``D`` (n x K), ``eta = e_1``.

    Columns are sign-normalized; the first is flipped if needed so that
    ``e_1' U' D' e_j > 0`` for a majority of words ``j``.
    """
    if sp.issparse(D) and min(D.shape) > K + 1 and min(D.shape) > 2000:
        from scipy.sparse.linalg import svds

        _, s, Vt = svds(D.astype(float), k=K)
        Vt = Vt[np.argsort(-s, kind="stable")]
    else:
        dense = D.toarray() if sp.issparse(D) else np.asarray(D, dtype=float)
        Vt = np.linalg.svd(dense, full_matrices=False)[2][:K]
    U = np.column_stack([normalize_eigvec(v) for v in Vt])
    first = np.asarray(D @ U[:, 0]).ravel()
    if 2 * np.count_nonzero(first > 0) < first.size:
        U[:, 0] = -U[:, 0]
    eta = np.zeros(K)
    eta[0] = 1.0
    return EmbedSpec(U, eta, EmbedMode.spectral_topK)


@dataclass(frozen=True)
class TopicFit:
    """``A_hat_raw`` is the regression output; ``A_hat`` has negatives clipped
    and columns renormalized.  ``b_scale`` is the factor applied to the
    unit-norm ``b_hat`` so that the columns of ``A_hat_raw`` sum to 1 on
    average (``b`` is only identified up to scale; column-stochastic ``A``
    pins it down).  ``column_mass`` holds the column sums of the
    clipped matrix before renormalization.  Rows of ``excluded`` words
    (zero total count) are NaN in both.
    """

    A_hat_raw: np.ndarray
    A_hat: np.ndarray
    column_mass: np.ndarray
    b_scale: float
    fit: SsvhFit
    spec: EmbedSpec
    X: np.ndarray
    excluded: np.ndarray
    warnings: tuple[str, ...] = ()


def estimate_topics(D, AstarS, S, K: int, spec: EmbedSpec | None = None, alpha_method="variance",
                    seed: int = 0, tol: Tolerances = DEFAULT_TOLERANCES) -> TopicFit:
    """Estimate the p x K topic matrix from word frequencies and labeled loadings.

    Parameters
    ----------
    D : array_like or sparse matrix, shape (p, n)
        Word frequencies (or the noiseless ``A Gamma``).
    AstarS : array_like, shape (N, K)
        Normalized loadings of the labeled words.
    S : array_like of int
        0-based labeled word indices.
    spec : EmbedSpec, optional
        ``U`` (n x K) and ``eta``; defaults to :func:`topic_spec`.
    """
    D = D.tocsr() if sp.issparse(D) else np.asarray(D, dtype=float)
    if D.ndim != 2:
        raise InputError("word frequencies must be a 2-D matrix")
    p = D.shape[0]
    labels = TopicLoadings(AstarS, S)
    if labels.AstarS.shape[1] != K:
        raise InputError(f"loadings have {labels.AstarS.shape[1]} columns, expected K={K}")
    if labels.S.size and (labels.S.min() < 0 or labels.S.max() >= p):
        raise InputError("labeled word index out of range")

    row_mass = np.asarray(abs(D).sum(axis=1)).ravel()
    zero = row_mass == 0
    if zero[labels.S].any():
        bad = labels.S[zero[labels.S]]
        raise InputError(f"labeled words {(bad + 1).tolist()} never occur in the corpus")
    notes = []
    if zero.any():
        notes.append(f"{int(zero.sum())} words with zero total count are excluded")

    spec = spec or topic_spec(D, K)
    # embed_columns works on columns of its argument; word j is column j of D'
    X, valid = embed_columns(D.T, spec, tol)
    if not valid[labels.S].all():
        bad = labels.S[~valid[labels.S]]
        raise InputError(f"labeled words {(bad + 1).tolist()} have an undefined embedding")
    excluded = np.flatnonzero(~valid)
    extra = np.setdiff1d(excluded, np.flatnonzero(zero))
    if extra.size:
        notes.append(f"{extra.size} words have a vanishing embedding normalizer and are excluded")

    fit = ssvh(K, X[labels.S], labels.AstarS, alpha_method, seed, tol=tol)
    notes.extend(fit.warnings)
    Map = _regression_map(fit.b_hat, fit.V_hat, spec.U, tol)
    raw = np.asarray(D @ Map)
    raw[excluded] = np.nan
    # rescaling b_hat by c divides the raw estimate by c
    total = np.nansum(raw) / K
    b_scale = float(total) if np.isfinite(total) and total != 0 else 1.0
    raw = raw / b_scale

    clipped = np.clip(np.nan_to_num(raw, nan=0.0), 0.0, None)
    mass = clipped.sum(axis=0)
    if np.any(mass <= 0):
        notes.append("some topic columns have no positive mass after clipping")
    A_hat = clipped / np.where(mass > 0, mass, 1.0)
    A_hat[excluded] = np.nan
    for note in notes:
        log.warning(note)
    return TopicFit(raw, A_hat, mass, b_scale, fit, spec, X, excluded, tuple(notes))
