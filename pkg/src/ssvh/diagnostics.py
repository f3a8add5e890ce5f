"""Runtime proxies for the identifiability assumptions of SSVH.

None of the assumptions can be verified exactly from data; these checks
report observable stand-ins so that an ill-posed input is flagged before
its estimate is trusted.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .core import as_probability_rows
from .engine import AlphaVector, select_alpha_variance, sigma_alpha, ssvh
from .errors import NumericalError

__all__ = ["Check", "label_spread", "sigma_rank_proxy", "eigengap_check", "validate_inputs"]


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float | int | None
    detail: str

    def to_dict(self) -> dict:
        return asdict(self)


def _range_basis(PiS: np.ndarray, rtol: float):
    U, s, _ = np.linalg.svd(PiS, full_matrices=False)
    r = int(np.sum(s > rtol * max(s[0], 1.0))) if s.size and s[0] > 0 else 0
    return U[:, :r], s


def label_spread(PiS, rtol: float = 1e-10) -> Check:
    """Ratio of extreme singular values of the label matrix."""
    PiS = np.asarray(PiS, dtype=float)
    K = PiS.shape[1]
    s = np.linalg.svd(PiS, compute_uv=False)
    ratio = float(s[-1] / s[0]) if PiS.shape[0] >= K and s[0] > 0 else 0.0
    ok = ratio > rtol
    detail = "labels span all K directions" if ok else (
        "label matrix is rank deficient: labeled points are not spread out (Assumption 1(b))"
    )
    return Check("label_spread", ok, ratio, detail)


def sigma_rank_proxy(PiS, rtol: float = 1e-10, tol: Tolerances = DEFAULT_TOLERANCES) -> Check:
    """Rank of the weighted second moment with ``b`` replaced by ``1_K``.

    The true ``b`` is unknown; with entries near each other (the common
    case) the rank at ``b = 1`` is a stand-in.  A rank-deficient label
    matrix is handled with its pseudo-inverse projector.
    """
    PiS = np.asarray(PiS, dtype=float)
    N, K = PiS.shape
    Q, _ = _range_basis(PiS, rtol)
    b = np.full(K, 1.0 / np.sqrt(K))
    if Q.shape[1] >= N:
        rank = 0
    else:
        try:
            alpha = select_alpha_variance(PiS, Q, tol)
        except NumericalError:
            H = np.eye(N) - Q @ Q.T
            j = int(np.argmax(np.linalg.norm(H, axis=0)))
            alpha = AlphaVector(H[:, j], "user_supplied")
        rank = sigma_alpha(alpha, PiS, b, PiS, Q, rtol).rank
    ok = rank == K - 1
    detail = f"rank {rank} (K-1 = {K - 1} needed for a unique null vector)"
    return Check("sigma_rank_proxy", ok, rank, detail)


def eigengap_check(XS, PiS, K: int, alpha_method="variance", seed: int = 0,
                   tol: Tolerances = DEFAULT_TOLERANCES) -> list[Check]:
    """Relative gap between the two smallest eigenvalues of the estimated ``M``,
    and whether ``b_hat`` came out entrywise positive."""
    try:
        fit = ssvh(K, XS, PiS, alpha_method, seed, tol=tol)
    except NumericalError as exc:
        return [Check("eigengap", False, None, f"estimation failed: {exc}")]
    scale = float(np.abs(fit.m_spectrum).max())
    rel = float(fit.eigengap / scale) if scale > 0 else 0.0
    gap = Check("eigengap", rel > tol.eigengap_rel, rel,
                "relative gap (lambda_2 - lambda_1) / lambda_max of M_hat")
    pos = Check("b_positive", not fit.b_nonpositive, float(fit.b_hat.min()),
                "smallest entry of b_hat; non-positive entries signal a weak eigengap")
    return [gap, pos]


def validate_inputs(PiS, XS=None, K: int | None = None, alpha_method="variance", seed: int = 0,
                    tol: Tolerances = DEFAULT_TOLERANCES) -> list[Check]:
    PiS = as_probability_rows(PiS, "labels", tol.prob_tol)
    K = PiS.shape[1] if K is None else K
    checks = [label_spread(PiS), sigma_rank_proxy(PiS, tol=tol)]
    if XS is not None:
        if not checks[0].passed:
            checks.append(Check("eigengap", False, None, "skipped: label matrix is rank deficient"))
        else:
            checks.extend(eigengap_check(XS, PiS, K, alpha_method, seed, tol))
    return checks
