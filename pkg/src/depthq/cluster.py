"""Fuzzy c-means clustering and the cluster-then-test pipeline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_dataset
from .depth import DepthSpec
from .exceptions import InputError
from .numerics import derive_stream
from .qstat import TestReport, run_test


@dataclass
class FcmResult:
    centers: np.ndarray
    memberships: np.ndarray
    objective_trace: list
    hard_labels: np.ndarray

    @property
    def n_iter(self) -> int:
        return len(self.objective_trace)


def _sq_dist(data: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = data[:, None, :] - centers[None, :, :]
    return np.einsum("ikd,ikd->ik", diff, diff)


def _update_memberships(d2: np.ndarray, fuzzifier: float) -> np.ndarray:
    # u_ik = 1 / sum_j (d_ik / d_ij)^(2/(f-1)); a point sitting on a center
    # belongs to it (the first such center) entirely
    zero = d2 == 0
    on_center = zero.any(axis=1)
    safe = np.where(zero, 1.0, d2)
    w = safe ** (-1.0 / (fuzzifier - 1.0))
    u = w / w.sum(axis=1, keepdims=True)
    if on_center.any():
        rows = np.flatnonzero(on_center)
        u[rows] = 0.0
        u[rows, np.argmax(zero[rows], axis=1)] = 1.0
    return u


def _update_centers(data: np.ndarray, u: np.ndarray, fuzzifier: float,
                    previous: np.ndarray | None = None) -> np.ndarray:
    w = u ** fuzzifier
    total = w.sum(axis=0)
    centers = (w.T @ data) / np.where(total > 0, total, 1.0)[:, None]
    if previous is not None:
        # a cluster that lost all its weight keeps its old center
        centers[total == 0] = previous[total == 0]
    return centers


def _objective(d2: np.ndarray, u: np.ndarray, fuzzifier: float) -> float:
    return float(np.sum(u ** fuzzifier * d2))


def fcm(data, c: int, fuzzifier: float = 2.0, tol: float = 1e-6, max_iter: int = 300,
        seed: int = 0) -> FcmResult:
    """Fuzzy c-means by alternating center and membership updates.

    Memberships start i.i.d. uniform (row-normalized) from ``seed``. The
    objective is recorded after each membership update; iteration stops when
    its relative change drops to ``tol`` or after ``max_iter`` rounds.
    """
    x = check_dataset(data, "data")
    m = x.shape[0]
    if int(c) != c or c < 1:
        raise InputError(f"number of clusters must be a positive integer, got {c}")
    if c > m:
        raise InputError(f"cannot form {c} clusters from {m} points")
    if not fuzzifier > 1:
        raise InputError("fuzzifier must exceed 1")
    u = derive_stream(seed, 0).uniform(m * c).reshape(m, c)
    u /= u.sum(axis=1, keepdims=True)
    if max_iter < 1:
        raise InputError("max_iter must be positive")
    trace: list = []
    centers = None
    for _ in range(max_iter):
        centers = _update_centers(x, u, fuzzifier, centers)
        d2 = _sq_dist(x, centers)
        u = _update_memberships(d2, fuzzifier)
        trace.append(_objective(d2, u, fuzzifier))
        if len(trace) > 1:
            prev = trace[-2]
            if abs(prev - trace[-1]) <= tol * max(abs(prev), np.finfo(float).tiny):
                break
    return FcmResult(centers, u, trace, np.argmax(u, axis=1))


class FuzzyCMeans(ClusterMixin, BaseEstimator):
    """Estimator wrapper around :func:`fcm` with ``fit``/``predict``."""

    def __init__(self, n_clusters=3, fuzzifier=2.0, tol=1e-6, max_iter=300, seed=0):
        self.n_clusters = n_clusters
        self.fuzzifier = fuzzifier
        self.tol = tol
        self.max_iter = max_iter
        self.seed = seed

    def fit(self, X, y=None):
        res = fcm(X, self.n_clusters, self.fuzzifier, self.tol, self.max_iter, self.seed)
        self.cluster_centers_ = res.centers
        self.memberships_ = res.memberships
        self.objective_trace_ = res.objective_trace
        self.labels_ = res.hard_labels
        self.n_iter_ = res.n_iter
        self.n_features_in_ = res.centers.shape[1]
        return self

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "cluster_centers_")
        x = check_dataset(X, "X")
        return _update_memberships(_sq_dist(x, self.cluster_centers_), self.fuzzifier)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)


def cluster_then_test(data, c: int, fuzzifier: float, spec: DepthSpec, pair=(0, 1),
                      seed: int = 0, tol: float = 1e-6, max_iter: int = 300) -> TestReport:
    """Hard-assign fuzzy c-means clusters and test two of them against each
    other."""
    x = check_dataset(data, "data")
    labels = fcm(x, c, fuzzifier, tol, max_iter, seed).hard_labels
    a, b = (int(k) for k in pair)
    if a == b or not (0 <= a < c and 0 <= b < c):
        raise InputError(f"invalid cluster pair {pair} for c = {c}")
    first, second = x[labels == a], x[labels == b]
    for k, part in ((a, first), (b, second)):
        if part.shape[0] == 0:
            raise InputError(f"cluster {k} is empty after hard assignment")
    return run_test(first, second, spec)
