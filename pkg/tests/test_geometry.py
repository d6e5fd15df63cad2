import math

import numpy as np
import pytest
from scipy.optimize import minimize
from scipy.spatial import Delaunay

from depthq import DepthSpec
from depthq.exceptions import InputError
from depthq.geometry import (convex_hull_2d, distance_to_hull, hull_volume, in_hull,
                             polygon_area, scale_curve)

SQUARE = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)


def qp_distance(q, pts):
    # independent oracle: SLSQP on the simplex-constrained least squares
    m = len(pts)
    res = minimize(lambda w: np.sum((pts.T @ w - q) ** 2), np.full(m, 1 / m), method="SLSQP",
                   bounds=[(0, 1)] * m, constraints=[{"type": "eq", "fun": lambda w: w.sum() - 1}],
                   options={"ftol": 1e-15, "maxiter": 1000})
    return math.sqrt(res.fun)


class TestHull2d:
    def test_square_with_center(self):
        hull = convex_hull_2d(np.vstack([SQUARE, [[0.5, 0.5]]]))
        assert len(hull) == 4
        assert {tuple(v) for v in hull} == {tuple(v) for v in SQUARE}
        assert polygon_area(hull) == 1.0

    def test_counterclockwise(self, rng):
        hull = convex_hull_2d(rng.normal(size=(50, 2)))
        x, y = hull[:, 0], hull[:, 1]
        assert np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)) > 0

    def test_degenerate(self):
        assert len(convex_hull_2d([[0, 0], [1, 1], [2, 2]])) == 2
        assert len(convex_hull_2d([[3, 3], [3, 3]])) == 1
        assert hull_volume(np.array([[0, 0], [1, 1], [2, 2.0]])) == 0.0

    def test_disk_area(self):
        gen = np.random.default_rng(0)
        r = np.sqrt(gen.uniform(size=1000))
        t = gen.uniform(0, 2 * math.pi, 1000)
        area = hull_volume(np.column_stack([r * np.cos(t), r * np.sin(t)]))
        assert 2.9 <= area <= math.pi

    def test_area_rigid_invariance(self, rng):
        pts = rng.normal(size=(40, 2))
        base = hull_volume(pts)
        for _ in range(10):
            a = rng.uniform(0, 2 * math.pi)
            rot = np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
            assert abs(hull_volume(pts @ rot.T + rng.normal(size=2) * 10) - base) <= 1e-9


class TestVolume:
    def test_exact_low_dims(self):
        assert hull_volume(SQUARE) == 1.0
        assert hull_volume(np.array([[1.0], [2.0], [5.0]])) == 4.0

    def test_cube(self):
        cube = np.array([[i, j, k] for i in (0, 1) for j in (0, 1) for k in (0, 1)], dtype=float)
        assert abs(hull_volume(cube, mc_samples=200_000) - 1.0) <= 0.02

    def test_simplex(self):
        simplex = np.vstack([np.zeros(3), np.eye(3)])
        assert abs(hull_volume(simplex, mc_samples=100_000, seed=3) - 1 / 6) <= 0.01


class TestDistance:
    def test_examples(self, rng):
        assert distance_to_hull([2.0, 0.5], SQUARE) == pytest.approx(1.0, abs=1e-6)
        pts = rng.normal(size=(20, 3))
        for p in pts[:5]:
            assert distance_to_hull(p, pts) <= 1e-9
        w = rng.dirichlet(np.ones(20))
        assert distance_to_hull(w @ pts, pts) <= 1e-9

    def test_against_qp_oracle(self, rng):
        for _ in range(100):
            d = int(rng.integers(2, 6))
            pts = rng.normal(size=(int(rng.integers(d + 1, 30)), d))
            q = rng.normal(size=d) * 3
            assert distance_to_hull(q, pts) == pytest.approx(qp_distance(q, pts), abs=1e-6)

    def test_membership_agrees_with_distance_and_delaunay(self, rng):
        pts = rng.normal(size=(25, 3))
        qs = rng.normal(size=(400, 3)) * 1.2
        mask = in_hull(qs, pts)
        dist = np.array([distance_to_hull(q, pts) for q in qs])
        assert np.array_equal(mask, dist <= 1e-9)
        assert np.array_equal(mask, Delaunay(pts).find_simplex(qs) >= 0)


class TestScaleCurve:
    def test_full_fraction_is_full_hull(self, rng):
        pts = rng.normal(size=(60, 2))
        curve = scale_curve(pts, DepthSpec(), [0.5, 1.0])
        assert curve.volumes[-1] == hull_volume(pts)

    @pytest.mark.parametrize("dim", [2, 3])
    def test_monotone(self, rng, dim):
        pts = rng.normal(size=(50, dim))
        curve = scale_curve(pts, DepthSpec("spatial"), [0.1 * k for k in range(1, 11)],
                            mc_samples=20_000)
        assert np.all(np.diff(curve.volumes) >= 0)

    def test_csv(self, rng):
        text = scale_curve(rng.normal(size=(10, 2)), DepthSpec(), [0.5, 1.0]).to_csv()
        assert text.splitlines()[0] == "p,volume" and len(text.splitlines()) == 3

    def test_bad_fractions(self, rng):
        with pytest.raises(InputError):
            scale_curve(rng.normal(size=(10, 2)), DepthSpec(), [0.5, 0.2])
        with pytest.raises(InputError):
            scale_curve(rng.normal(size=(10, 2)), DepthSpec(), [0.0, 1.0])

    def test_skull_curves_close(self, skulls):
        fr = [0.1 * k for k in range(1, 11)]
        a, b = (scale_curve(s, DepthSpec(), fr, mc_samples=50_000).volumes for s in skulls)
        both = (a > 0) & (b > 0)
        gap = np.abs(a - b)[both] / np.maximum(a, b)[both]
        assert both.sum() >= 7 and np.all(gap < 0.5)
