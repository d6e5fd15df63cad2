"""Convex hulls, hull volumes and depth-based scale curves."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_dataset, check_point
from .depth import DepthSpec, compute_depth
from .exceptions import DimensionError, InputError, NumericFailure
from .numerics import derive_stream

HULL_TOL = 1e-9
_MC_CHUNK = 50_000


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_2d(points) -> np.ndarray:
    """Counterclockwise hull vertices by Andrew's monotone chain.

    Collinear boundary points are dropped, so three collinear inputs give a
    two-vertex segment and identical inputs give a single vertex.
    """
    pts = check_dataset(points, "points")
    if pts.shape[1] != 2:
        raise DimensionError("convex_hull_2d needs two-dimensional points")
    uniq = sorted(set(map(tuple, pts.tolist())))
    if len(uniq) <= 2:
        return np.array(uniq, dtype=float)
    lower: list = []
    for p in uniq:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(uniq):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 2:
        # every point collinear: both chains collapse onto the end points
        hull = [uniq[0], uniq[-1]]
    return np.array(hull, dtype=float)


def polygon_area(vertices) -> float:
    """Shoelace area of a simple polygon given in order."""
    v = np.asarray(vertices, dtype=float)
    if v.shape[0] < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def _affine_minimizer(P: np.ndarray, active: np.ndarray):
    """Weights of the point of smallest norm in the affine hull of the active
    rows of each P[b] (shape (B, K, d)); inactive slots get weight zero."""
    B, K, _ = P.shape
    a = active.astype(float)
    G = np.einsum("bkd,bld->bkl", P, P) * a[:, :, None] * a[:, None, :]
    G[:, np.arange(K), np.arange(K)] += 1.0 - a
    kkt = np.zeros((B, K + 1, K + 1))
    kkt[:, :K, :K] = G
    kkt[:, :K, K] = a
    kkt[:, K, :K] = a
    rhs = np.zeros((B, K + 1, 1))
    rhs[:, K, 0] = 1.0
    try:
        sol = np.linalg.solve(kkt, rhs)[:, :, 0]
    except np.linalg.LinAlgError:
        sol = (np.linalg.pinv(kkt) @ rhs)[:, :, 0]
    alpha = sol[:, :K] * a
    return alpha, np.einsum("bk,bkd->bd", alpha, P)


def _nearest_points(vertices: np.ndarray, queries: np.ndarray, tol: float,
                    max_iter: int, decide: bool) -> np.ndarray:
    """Distance from each query to conv(vertices).

    Gilbert's support-point iteration, with Wolfe's affine-minimizer
    correction in place of the one-dimensional line search so that the
    iterate reaches the exact nearest point after finitely many steps. With
    ``decide`` set, a query stops as soon as a separating hyperplane puts it
    farther than ``tol`` from the hull; its returned value is then only a
    lower bound, which is all a membership test needs.
    """
    V = vertices
    B = queries.shape[0]
    d = V.shape[1]
    K = d + 1
    vsq = np.einsum("ij,ij->i", V, V)
    q = queries
    qv = q @ V.T
    start = np.argmin(vsq[None, :] - 2.0 * qv, axis=1)
    idx = np.full((B, K), -1, dtype=np.int64)
    lam = np.zeros((B, K))
    idx[:, 0] = start
    lam[:, 0] = 1.0
    x = V[start] - q
    result = np.full(B, np.nan)
    todo = np.arange(B)
    eps = 1e-12

    for _ in range(max_iter):
        if todo.size == 0:
            return result
        xs = x[todo]
        qs = q[todo]
        scores = xs @ V.T - np.einsum("ij,ij->i", xs, qs)[:, None]
        j = np.argmin(scores, axis=1)
        smin = scores[np.arange(todo.size), j]
        norm = np.sqrt(np.einsum("ij,ij->i", xs, xs))
        lower = np.where(norm > 0, np.maximum(smin, 0.0) / np.where(norm > 0, norm, 1.0), 0.0)
        stalled = np.any(idx[todo] == j[:, None], axis=1) | np.all(idx[todo] >= 0, axis=1)
        done = (norm <= tol) | (norm - lower <= tol) | stalled
        if decide:
            done |= lower > tol
        result[todo[done]] = np.where(decide & (lower > tol), lower, norm)[done]
        keep = ~done
        todo, j = todo[keep], j[keep]
        if todo.size == 0:
            return result

        sub_idx = idx[todo]
        sub_lam = lam[todo]
        free = np.argmax(sub_idx < 0, axis=1)
        sub_idx[np.arange(todo.size), free] = j
        qs = q[todo]
        rows = np.arange(todo.size)
        pending = np.ones(todo.size, dtype=bool)
        sub_x = x[todo]
        for _minor in range(K + 1):
            if not pending.any():
                break
            pr = rows[pending]
            act = sub_idx[pr] >= 0
            P = V[np.where(act, sub_idx[pr], 0)] - qs[pr][:, None, :]
            alpha, y = _affine_minimizer(P, act)
            ok = np.all(~act | (alpha > eps), axis=1)
            acc = pr[ok]
            sub_lam[acc] = alpha[ok]
            sub_x[acc] = y[ok]
            pending[acc] = False
            bad = ~ok
            if not bad.any():
                break
            br = pr[bad]
            al = alpha[bad]
            lm = sub_lam[br]
            ac = act[bad]
            neg = ac & (al <= eps)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(neg, lm / (lm - al), np.inf)
            theta = np.clip(np.min(ratio, axis=1), 0.0, 1.0)
            drop = np.argmin(ratio, axis=1)
            lm = lm + theta[:, None] * (al - lm)
            lm[np.arange(br.size), drop] = 0.0
            gone = ac & (lm <= eps)
            lm[gone] = 0.0
            new_idx = sub_idx[br]
            new_idx[gone] = -1
            lm = lm / lm.sum(axis=1, keepdims=True)
            sub_idx[br] = new_idx
            sub_lam[br] = lm
            actb = new_idx >= 0
            Pb = V[np.where(actb, new_idx, 0)] - qs[br][:, None, :]
            sub_x[br] = np.einsum("bk,bkd->bd", lm * actb, Pb)
        idx[todo] = sub_idx
        lam[todo] = sub_lam
        x[todo] = sub_x
    raise NumericFailure(f"nearest-point iteration did not converge for {todo.size} queries")


def distance_to_hull(query, points, tol: float = HULL_TOL, max_iter: int = 10000) -> float:
    """Euclidean distance from ``query`` to the convex hull of ``points``."""
    pts = check_dataset(points, "points")
    z = check_point(query, "query")
    if z.size != pts.shape[1]:
        raise DimensionError("query and points differ in dimension")
    return float(_nearest_points(pts, z[None, :], tol, max_iter, decide=False)[0])


def in_hull(queries, points, tol: float = HULL_TOL, max_iter: int = 10000) -> np.ndarray:
    """Boolean mask: is each query within ``tol`` of conv(points)?"""
    pts = check_dataset(points, "points")
    qs = check_dataset(queries, "queries")
    if qs.shape[1] != pts.shape[1]:
        raise DimensionError("queries and points differ in dimension")
    out = np.empty(qs.shape[0], dtype=bool)
    for lo in range(0, qs.shape[0], _MC_CHUNK):
        dist = _nearest_points(pts, qs[lo:lo + _MC_CHUNK], tol, max_iter, decide=True)
        out[lo:lo + _MC_CHUNK] = dist <= tol
    return out


def _uniform_box(lo, hi, count: int, seed: int) -> np.ndarray:
    u = derive_stream(seed, 0).uniform(count * lo.size).reshape(count, lo.size)
    return lo + u * (hi - lo)


def hull_volume(points, mc_samples: int = 200_000, seed: int = 0) -> float:
    """Volume of conv(points): exact for d <= 2, hit-or-miss Monte Carlo in
    the bounding box for d >= 3."""
    pts = check_dataset(points, "points")
    m, d = pts.shape
    if d == 1:
        return float(pts.max() - pts.min())
    if d == 2:
        return polygon_area(convex_hull_2d(pts))
    if m < d + 1:
        return 0.0
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    box = float(np.prod(hi - lo))
    if box == 0.0:
        return 0.0
    if mc_samples < 1:
        raise InputError("mc_samples must be positive")
    hits = in_hull(_uniform_box(lo, hi, mc_samples, seed), pts)
    return box * float(hits.mean())


@dataclass(frozen=True)
class ScaleCurve:
    points: tuple  # ((fraction, volume), ...)

    @property
    def fractions(self) -> np.ndarray:
        return np.array([p for p, _ in self.points])

    @property
    def volumes(self) -> np.ndarray:
        return np.array([v for _, v in self.points])

    def to_csv(self) -> str:
        lines = ["p,volume"]
        lines += [f"{p:.9g},{v:.9g}" for p, v in self.points]
        return "\n".join(lines) + "\n"


def deepest_order(sample, spec: DepthSpec) -> np.ndarray:
    """Row indices by decreasing depth; equal depths keep row order."""
    depth = compute_depth(sample, sample, spec)
    return np.lexsort((np.arange(depth.size), -depth))


def scale_curve(sample, spec: DepthSpec, fractions, mc_samples: int = 200_000,
                seed: int = 0) -> ScaleCurve:
    """Hull volume of the ceil(p * m) deepest points for each fraction p.

    For d >= 3 all fractions share one set of Monte Carlo points drawn in the
    bounding box of the largest set, and a point already inside a smaller
    hull is not retested; the estimates are therefore nondecreasing in p.
    """
    pts = check_dataset(sample, "sample")
    fr = [float(p) for p in fractions]
    if not fr or any(not (0 < p <= 1) for p in fr):
        raise InputError("fractions must lie in (0, 1]")
    if any(b <= a for a, b in zip(fr, fr[1:])):
        raise InputError("fractions must be strictly increasing")
    m, d = pts.shape
    order = deepest_order(pts, spec)
    counts = [min(m, max(1, math.ceil(round(p * m, 9)))) for p in fr]
    if d <= 2:
        vols = [hull_volume(pts[order[:k]]) for k in counts]
        return ScaleCurve(tuple(zip(fr, vols)))

    biggest = pts[order[:counts[-1]]]
    lo, hi = biggest.min(axis=0), biggest.max(axis=0)
    box = float(np.prod(hi - lo))
    if box == 0.0:
        return ScaleCurve(tuple((p, 0.0) for p in fr))
    cloud = _uniform_box(lo, hi, mc_samples, seed)
    inside = np.zeros(mc_samples, dtype=bool)
    vols = []
    for k in counts:
        if k >= d + 1:
            rest = np.flatnonzero(~inside)
            if rest.size:
                inside[rest] = in_hull(cloud[rest], pts[order[:k]])
        vols.append(box * float(inside.mean()))
    return ScaleCurve(tuple(zip(fr, vols)))
