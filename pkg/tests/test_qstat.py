import math

import numpy as np
import pytest

from depthq import DepthQTest, DepthSpec, euclidean_depth, q_pair, q_statistic, run_test
from depthq.exceptions import DimensionError, InputError
from depthq.qstat import QPair, normalize, p_values, q_count, two_sided_p, variant_stats

KEYS = ["q_fg", "q_gf", "z_fg", "z_gf", "m_stat", "m_star", "p_q_fg", "p_q_gf", "p_m",
        "p_m_star", "depth", "m", "n"]


def test_hand_example():
    x = np.array([[0.0], [1.0], [2.0]])
    y = np.array([[1.0], [3.0]])
    dx, dy = euclidean_depth(x, x), euclidean_depth(y, x)
    assert dx.tolist() == [0.5, 1.0, 0.5]
    assert dy.tolist() == [1.0, 0.2]
    assert q_statistic(dx, dy) == 0.5


def test_sort_count_equals_double_loop(rng):
    for _ in range(50):
        dx = rng.integers(0, 6, size=rng.integers(1, 30)) / 5
        dy = rng.integers(0, 6, size=rng.integers(1, 30)) / 5
        loop = sum(int(a <= b) for a in dx for b in dy)
        assert q_count(dx, dy) == loop
        assert q_statistic(dx, dy) == loop / (dx.size * dy.size)


def test_all_larger_and_empty():
    assert q_statistic([0.1, 0.2], [0.3, 0.9]) == 1.0
    with pytest.raises(InputError):
        q_statistic([], [0.5])


@pytest.mark.parametrize("m", range(2, 51))
def test_self_identity(m):
    d = np.random.default_rng(m).permutation(m) / m + 0.01
    want = (m + 1) / (2 * m)
    assert q_statistic(d, d) == want
    if m >= 3:
        # two points are always equally deep, so the data version starts at 3
        x = 1.7 ** np.arange(m, dtype=float)[:, None]
        assert np.unique(euclidean_depth(x, x)).size == m
        pair = q_pair(x, x, DepthSpec("euclidean"))
        assert pair.q_fg == pair.q_gf == want


def test_monotone_relabeling(rng):
    dx, dy = rng.uniform(size=40), rng.uniform(size=35)
    base = q_statistic(dx, dy)
    for f in (np.exp, lambda v: v ** 3, lambda v: 7 * v - 2, np.arctan):
        assert q_statistic(f(dx), f(dy)) == base


def test_q_pair_range(rng):
    for kind in ("mahalanobis", "spatial", "projection"):
        p = q_pair(rng.normal(size=(20, 2)), rng.normal(1, size=(15, 2)), DepthSpec(kind, 50))
        assert 0 <= p.q_fg <= 1 and 0 <= p.q_gf <= 1
        assert (p.m, p.n) == (20, 15)


def test_q_pair_dimension_mismatch():
    with pytest.raises(DimensionError):
        q_pair(np.zeros((5, 2)), np.zeros((5, 3)), DepthSpec())


def test_normalize():
    assert normalize(0.5, 3, 11) == 0.0
    assert normalize(0.6, 30, 30) == pytest.approx(0.1 / math.sqrt(1 / 180), abs=1e-12)
    assert normalize(0.6, 30, 30) == pytest.approx(1.3416407865, abs=1e-9)
    assert normalize(0.4, 30, 30) == -normalize(0.6, 30, 30)
    qs = np.linspace(0, 1, 21)
    assert np.all(np.diff([normalize(q, 10, 12) for q in qs]) > 0)


def test_variant_stats():
    assert variant_stats(QPair(0.5, 0.5, 10, 10)) == (0.0, 0.0)
    m_stat, m_star = variant_stats(QPair(0.6, 0.45, 30, 30))
    assert m_stat == pytest.approx(1.8, abs=1e-12)
    assert m_star == pytest.approx(0.670820393, abs=1e-9)
    for qf, qg in [(0.3, 0.8), (0.55, 0.52), (0.1, 0.2)]:
        pair = QPair(qf, qg, 17, 23)
        z = normalize(qf, 17, 23), normalize(qg, 17, 23)
        assert variant_stats(pair)[0] == pytest.approx(max(z[0] ** 2, z[1] ** 2), rel=1e-12)


def test_p_values():
    assert abs(two_sided_p(1.96) - 0.05) < 5e-4
    assert two_sided_p(0.0) == 1.0
    p = p_values(0.0, 1.96, 1.96 ** 2, 1.96)
    assert abs(p[2] - 0.05) < 5e-4
    assert p[1] == pytest.approx(p[2], abs=1e-12) == pytest.approx(p[3], abs=1e-12)
    assert p_values(0, 0, 0, -3.0)[3] == 1.0


def test_skull_mahalanobis(skulls):
    r = run_test(*skulls, DepthSpec("mahalanobis"))
    got = (r.p_q_fg, r.p_q_gf, r.p_m, r.p_m_star)
    for g, w in zip(got, (0.676, 0.051, 0.051, 0.051)):
        assert abs(g - w) <= 0.01
    assert list(r.as_dict()) == KEYS


def test_identical_samples_report():
    x = np.linspace(0, 1, 30)[:, None] ** 2
    r = run_test(x, x, DepthSpec("euclidean"))
    z = normalize(31 / 60, 30, 30)
    assert abs(r.z_fg) == abs(r.z_gf) == pytest.approx(z, abs=1e-15)
    assert min(r.p_q_fg, r.p_q_gf, r.p_m) > 0.4


def test_m_and_mstar_agree_when_min_dominates(rng):
    for _ in range(100):
        x = rng.normal(size=(25, 2))
        y = rng.normal(0.3, 1.3, size=(25, 2))
        r = run_test(x, y, DepthSpec())
        lo, hi = sorted((r.qpair.q_fg, r.qpair.q_gf))
        if lo <= 0.5 and abs(lo - 0.5) >= abs(hi - 0.5):
            assert r.m_star ** 2 == pytest.approx(r.m_stat, rel=1e-12)
            assert r.p_m == pytest.approx(r.p_m_star, abs=1e-12)


def test_estimator(skulls):
    est = DepthQTest(depth="mahalanobis").fit(*skulls)
    assert est.get_params() == {"depth": "mahalanobis", "directions": 500, "seed": 0}
    assert est.pvalues_["q_fg"] == est.report_.p_q_fg
