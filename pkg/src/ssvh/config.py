"""Numerical tolerances shared by every estimator.

All thresholds live in one frozen record so a caller (or the CLI's
``--tol-file``) can override them in one place.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import InputError


@dataclass(frozen=True)
class Tolerances:
    prob_tol: float = 1e-9
    eig_sum_zero: float = 1e-12
    eigengap_rel: float = 1e-12
    alpha_degenerate: float = 1e-12
    b_clamp: float = 1e-8
    design_cond: float = 1e-10
    embed_denominator: float = 1e-12
    sp_residual: float = 1e-12
    pg_tol: float = 1e-10
    pg_max_iter: int = 10_000
    power_tol: float = 1e-10
    power_max_iter: int = 10_000
    kmeans_restarts: int = 10
    kmeans_max_iter: int = 100
    kmeans_retries: int = 5
    svs_budget: int = 10_000_000

    def replace(self, **changes) -> "Tolerances":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_json(cls, path: str | Path) -> "Tolerances":
        """Load overrides from a JSON object; unknown keys are rejected."""
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"--tol-file {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise InputError(f"{path}: tolerance file must hold a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InputError(f"{path}: unknown tolerance keys {sorted(unknown)}")
        return cls(**data)


DEFAULT_TOLERANCES = Tolerances()
