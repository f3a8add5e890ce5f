"""Deterministic k-means with an empty-cluster retry policy."""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.cluster import KMeans
from sklearn.exceptions import ConvergenceWarning

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import InputError, NumericalError


def kmeans(X, n_clusters: int, seed: int, tol: Tolerances = DEFAULT_TOLERANCES):
    """Cluster rows of ``X``; returns ``(labels, centers)``.

    k-means++ seeding with ``tol.kmeans_restarts`` restarts and
    ``tol.kmeans_max_iter`` Lloyd iterations.  A run that leaves a cluster
    empty is retried with a fresh seed up to ``tol.kmeans_retries`` times.
    """
    X = np.asarray(X, dtype=float)
    if X.shape[0] < n_clusters:
        raise InputError(f"cannot form {n_clusters} clusters from {X.shape[0]} points")
    for attempt in range(tol.kmeans_retries):
        km = KMeans(
            n_clusters=n_clusters,
            init="k-means++",
            n_init=tol.kmeans_restarts,
            max_iter=tol.kmeans_max_iter,
            random_state=(seed + attempt) % 2**32,
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            labels = km.fit_predict(X)
        if np.unique(labels).size == n_clusters:
            return labels, km.cluster_centers_
    raise NumericalError(
        f"k-means left a cluster empty after {tol.kmeans_retries} attempts "
        f"({n_clusters} clusters, {X.shape[0]} points)"
    )
