"""Sample depth functions D(z; F_m).

Five depths are available: Euclidean (univariate), Mahalanobis, halfspace
(Tukey), projection and spatial. Halfspace depth is exact for d <= 2 and
approximated over random unit directions for d >= 3; projection depth is
approximated over random directions whenever d >= 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_dataset, check_point, check_same_dim
from .exceptions import DimensionError, InputError, NumericFailure
from .numerics import derive_stream, std_normal

KINDS = ("euclidean", "mahalanobis", "halfspace", "projection", "spatial")

# rows * columns budget for chunked broadcasting
_CHUNK_ELEMS = 4_000_000


@dataclass(frozen=True)
class DepthSpec:
    """Which depth to compute, plus the direction count and seed used by the
    approximate halfspace and projection depths."""

    kind: str = "mahalanobis"
    directions: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown depth kind {self.kind!r}; expected one of {KINDS}")
        if int(self.directions) != self.directions or self.directions < 1:
            raise InputError(f"directions must be a positive integer, got {self.directions}")

    def with_seed(self, seed: int) -> "DepthSpec":
        return DepthSpec(self.kind, self.directions, seed)


def sample_directions(dim: int, count: int, seed: int) -> np.ndarray:
    """``count`` unit vectors in R^dim: normalized standard normal draws.

    The first k rows do not depend on ``count``, so a larger request always
    extends a smaller one.
    """
    stream = derive_stream(seed, 0)
    u = std_normal(stream, count * dim).reshape(count, dim)
    norms = np.linalg.norm(u, axis=1)
    if np.any(norms == 0):
        raise NumericFailure("drew a zero direction vector")
    return u / norms[:, None]


def _prepare(queries, sample):
    q = check_dataset(queries, "queries")
    s = check_dataset(sample, "sample")
    check_same_dim(q, s)
    return q, s


def euclidean_depth(queries, sample) -> np.ndarray:
    """1 / (1 + (x - mean)^2) for univariate data."""
    q, s = _prepare(queries, sample)
    if s.shape[1] != 1:
        raise DimensionError(f"euclidean depth requires d = 1, got d = {s.shape[1]}")
    dev = q[:, 0] - s[:, 0].mean()
    return 1.0 / (1.0 + dev * dev)


def cholesky_regularized(cov: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of ``cov``, retried once with a small ridge.

    The ridge is 1e-10 times the average variance. A second failure raises
    :class:`NumericFailure`.
    """
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    d = cov.shape[0]
    lam = 1e-10 * np.trace(cov) / d
    try:
        return np.linalg.cholesky(cov + lam * np.eye(d))
    except np.linalg.LinAlgError as exc:
        raise NumericFailure("covariance matrix is singular even after regularization") from exc


def mahalanobis_quadform(points: np.ndarray, mean: np.ndarray, chol: np.ndarray) -> np.ndarray:
    """(x - mean)' S^{-1} (x - mean) for each row, given S = chol chol'."""
    w = solve_triangular(chol, (points - mean).T, lower=True, check_finite=False)
    return np.einsum("ij,ij->j", w, w)


def mahalanobis_depth(queries, sample) -> np.ndarray:
    q, s = _prepare(queries, sample)
    m, d = s.shape
    if m < d + 1:
        raise InputError(f"mahalanobis depth needs at least d+1 = {d + 1} sample rows, got {m}")
    cov = np.atleast_2d(np.cov(s, rowvar=False, ddof=1))
    chol = cholesky_regularized(cov)
    return 1.0 / (1.0 + mahalanobis_quadform(q, s.mean(axis=0), chol))


def _halfspace_1d(q: np.ndarray, s: np.ndarray) -> np.ndarray:
    srt = np.sort(s)
    le = np.searchsorted(srt, q, side="right")
    ge = srt.size - np.searchsorted(srt, q, side="left")
    return np.minimum(le, ge) / srt.size


def _in_open_arc(ux, uy, wx, wy):
    # w lies in the half-turn (angle(u), angle(u) + pi]
    cross = ux * wy - uy * wx
    return cross > 0 or (cross == 0 and ux * wx + uy * wy < 0)


def _same_direction(ux, uy, wx, wy):
    return ux * wy - uy * wx == 0 and ux * wx + uy * wy > 0


def halfspace_count_2d(query, sample: np.ndarray) -> int:
    """Smallest number of sample points in a closed halfplane containing
    ``query``, by an angular sweep around the query.

    Points equal to the query lie in every such halfplane. For the rest, the
    minimum is reached by an open half-turn starting just after one of the
    sorted point angles, so it suffices to count, for every point k, the
    points whose angle lies in (theta_k, theta_k + pi]. Angles only order the
    points; arc membership is decided with exact cross/dot signs.
    """
    v = sample - np.asarray(query, dtype=float)
    nonzero = (v[:, 0] != 0) | (v[:, 1] != 0)
    coincident = int(v.shape[0] - nonzero.sum())
    v = v[nonzero]
    p = v.shape[0]
    if p == 0:
        return coincident
    theta = np.arctan2(v[:, 1], v[:, 0])
    order = np.argsort(theta, kind="stable")
    theta = theta[order]
    v = v[order]
    ext_theta = np.concatenate([theta, theta + 2.0 * math.pi])
    xs = v[:, 0].tolist() * 2
    ys = v[:, 1].tolist() * 2
    targets = np.searchsorted(ext_theta, theta + math.pi, side="right").tolist()

    best = p
    for k in range(p):
        ux, uy = xs[k], ys[k]
        a = k + 1
        while a < k + p and _same_direction(ux, uy, xs[a], ys[a]):
            a += 1
        b = min(max(targets[k], a), k + p)
        while b > a and not _in_open_arc(ux, uy, xs[b - 1], ys[b - 1]):
            b -= 1
        while b < k + p and _in_open_arc(ux, uy, xs[b], ys[b]):
            b += 1
        if b - a < best:
            best = b - a
            if best == 0:
                break
    return coincident + best


def halfspace_depth_bruteforce_2d(query, sample) -> float:
    """Reference halfspace depth in the plane by direct enumeration.

    Every candidate normal is perpendicular to some query-to-point vector;
    each candidate is evaluated closed and under both infinitesimal
    rotations, with the rotated counts resolved symbolically. O(m^2).
    """
    z = check_point(query, "query")
    s = check_dataset(sample, "sample")
    if s.shape[1] != 2 or z.size != 2:
        raise DimensionError("bruteforce halfspace depth is for d = 2 only")
    m = s.shape[0]
    if m > 500:
        raise InputError(f"bruteforce oracle is limited to m <= 500, got {m}")
    v = s - z
    nonzero = (v[:, 0] != 0) | (v[:, 1] != 0)
    coincident = m - int(nonzero.sum())
    v = v[nonzero]
    if v.shape[0] == 0:
        return coincident / m
    best = v.shape[0]
    for vx, vy in v:
        for sign in (1.0, -1.0):
            ux, uy = -sign * vy, sign * vx
            along = ux * v[:, 0] + uy * v[:, 1]
            # tangent of the rotation u -> u + eps * (-uy, ux)
            turn = -uy * v[:, 0] + ux * v[:, 1]
            on_line = along == 0
            closed = int(np.sum(along > 0) + np.sum(on_line))
            plus = int(np.sum(along > 0) + np.sum(on_line & (turn > 0)))
            minus = int(np.sum(along > 0) + np.sum(on_line & (turn < 0)))
            best = min(best, closed, plus, minus)
    return (coincident + best) / m


def _halfspace_directions(q: np.ndarray, s: np.ndarray, u: np.ndarray) -> np.ndarray:
    m = s.shape[0]
    ps = s @ u.T
    pq = q @ u.T
    ps.sort(axis=0)
    best = np.full(q.shape[0], m, dtype=np.int64)
    for k in range(u.shape[0]):
        col = ps[:, k]
        le = np.searchsorted(col, pq[:, k], side="right")
        ge = m - np.searchsorted(col, pq[:, k], side="left")
        np.minimum(best, np.minimum(le, ge), out=best)
    return best / m


def halfspace_depth(queries, sample, spec: DepthSpec | None = None) -> np.ndarray:
    """Tukey depth: smallest empirical mass of a closed halfspace containing
    the query. Exact for d = 1 and d = 2; for d >= 3 the minimum runs over
    ``spec.directions`` random unit directions."""
    q, s = _prepare(queries, sample)
    d = s.shape[1]
    if d == 1:
        return _halfspace_1d(q[:, 0], s[:, 0])
    if d == 2:
        m = s.shape[0]
        return np.array([halfspace_count_2d(z, s) for z in q]) / m
    spec = spec or DepthSpec("halfspace")
    u = sample_directions(d, spec.directions, spec.seed)
    return _halfspace_directions(q, s, u)


def _median_mad(ps: np.ndarray):
    med = np.median(ps, axis=0)
    mad = np.median(np.abs(ps - med), axis=0)
    return med, mad


def projection_depth(queries, sample, spec: DepthSpec | None = None) -> np.ndarray:
    """1 / (1 + outlyingness) with median/MAD standardization of projections."""
    q, s = _prepare(queries, sample)
    d = s.shape[1]
    if d == 1:
        u = np.ones((1, 1))
    else:
        spec = spec or DepthSpec("projection")
        u = sample_directions(d, spec.directions, spec.seed)
    ps = s @ u.T
    med, mad = _median_mad(ps)
    zero = np.flatnonzero(mad == 0)
    if zero.size:
        raise NumericFailure(f"MAD of the projected sample is zero along direction {int(zero[0])}")
    out = np.empty(q.shape[0])
    step = max(1, _CHUNK_ELEMS // u.shape[0])
    for lo in range(0, q.shape[0], step):
        pq = q[lo:lo + step] @ u.T
        out[lo:lo + step] = np.max(np.abs(pq - med) / mad, axis=1)
    return 1.0 / (1.0 + out)


def spatial_depth(queries, sample) -> np.ndarray:
    """1 - || mean of unit vectors from sample points to the query ||.

    Sample points equal to the query contribute a zero vector; the divisor
    stays m.
    """
    q, s = _prepare(queries, sample)
    m, d = s.shape
    out = np.empty(q.shape[0])
    step = max(1, _CHUNK_ELEMS // (m * d))
    for lo in range(0, q.shape[0], step):
        diff = q[lo:lo + step, None, :] - s[None, :, :]
        norms = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        safe = np.where(norms > 0, norms, 1.0)
        unit = diff / safe[:, :, None]
        avg = unit.sum(axis=1) / m
        out[lo:lo + step] = 1.0 - np.linalg.norm(avg, axis=1)
    return np.clip(out, 0.0, 1.0)


def compute_depth(queries, sample, spec: DepthSpec) -> np.ndarray:
    """Depth of each query row with respect to the sample, per ``spec``."""
    if spec.kind == "euclidean":
        return euclidean_depth(queries, sample)
    if spec.kind == "mahalanobis":
        return mahalanobis_depth(queries, sample)
    if spec.kind == "halfspace":
        return halfspace_depth(queries, sample, spec)
    if spec.kind == "projection":
        return projection_depth(queries, sample, spec)
    return spatial_depth(queries, sample)


class DepthTransformer(TransformerMixin, BaseEstimator):
    """Scikit-learn wrapper: ``fit`` stores the reference sample and
    ``score_samples`` returns depths with respect to it.

    ``transform`` returns the same depths as a single column, so the
    transformer can sit inside a ``Pipeline``.

    Parameters
    ----------
    kind : str
        One of ``euclidean``, ``mahalanobis``, ``halfspace``, ``projection``,
        ``spatial``.
    directions : int
        Random directions for the approximate depths.
    seed : int
        Master seed for direction sampling.
    """

    def __init__(self, kind="mahalanobis", directions=500, seed=0):
        self.kind = kind
        self.directions = directions
        self.seed = seed

    def fit(self, X, y=None):
        self.spec_ = DepthSpec(self.kind, self.directions, self.seed)
        self.sample_ = check_dataset(X, "X")
        if self.kind == "euclidean" and self.sample_.shape[1] != 1:
            raise DimensionError("euclidean depth requires d = 1")
        self.n_features_in_ = self.sample_.shape[1]
        return self

    def score_samples(self, X) -> np.ndarray:
        check_is_fitted(self, "sample_")
        return compute_depth(X, self.sample_, self.spec_)

    def transform(self, X) -> np.ndarray:
        return self.score_samples(X)[:, None]
