import numpy as np
import pytest

from depthq import DepthSpec, run_test
from depthq.cluster import FuzzyCMeans, cluster_then_test, fcm
from depthq.exceptions import InputError


def blobs(seed, n=150, gap=8.0):
    gen = np.random.default_rng(seed)
    data = np.vstack([gen.normal(size=(n, 2)), gen.normal(size=(n, 2)) + gap])
    return data, np.repeat([0, 1], n)


def test_two_blobs_recovered():
    data, truth = blobs(1)
    labels = fcm(data, 2, seed=3).hard_labels
    agree = max(np.mean(labels == truth), np.mean(labels != truth))
    assert agree >= 0.99


def test_invariants(rng):
    for seed in range(10):
        res = fcm(rng.normal(size=(80, 3)), 3, fuzzifier=1.5 + seed / 5, seed=seed)
        assert np.allclose(res.memberships.sum(axis=1), 1.0, atol=1e-9)
        assert np.all((res.memberships >= 0) & (res.memberships <= 1))
        trace = np.array(res.objective_trace)
        assert np.all(np.diff(trace) <= 1e-12 * trace[:-1])
        assert np.array_equal(res.hard_labels, np.argmax(res.memberships, axis=1))


def test_single_cluster(rng):
    data = rng.normal(size=(30, 2))
    res = fcm(data, 1)
    assert np.all(res.memberships == 1.0)
    assert np.allclose(res.centers[0], data.mean(axis=0))


def test_point_on_center():
    data = np.array([[0.0, 0.0], [0.0, 0.0], [5.0, 5.0]])
    res = fcm(data, 2, seed=1)
    assert np.allclose(res.memberships.sum(axis=1), 1.0)


def test_validation(rng):
    data = rng.normal(size=(5, 2))
    with pytest.raises(InputError):
        fcm(data, 6)
    with pytest.raises(InputError):
        fcm(data, 2, fuzzifier=1.0)
    with pytest.raises(InputError):
        fcm(np.array([[1.0, np.nan]]), 1)


def test_row_permutation_equivariance():
    data, _ = blobs(4, n=60)
    perm = np.random.default_rng(0).permutation(len(data))
    a = fcm(data, 2, seed=0, tol=1e-12, max_iter=500)
    b = fcm(data[perm], 2, seed=0, tol=1e-12, max_iter=500)
    # initial memberships differ, so match clusters by center before comparing
    order = np.argsort(a.centers[:, 0]), np.argsort(b.centers[:, 0])
    ua = a.memberships[:, order[0]][perm]
    ub = b.memberships[:, order[1]]
    assert np.allclose(ua, ub, atol=1e-6)


def test_estimator():
    data, truth = blobs(2)
    est = FuzzyCMeans(n_clusters=2, seed=1).fit(data)
    assert est.get_params()["n_clusters"] == 2
    assert np.array_equal(est.predict(data), est.labels_)
    assert np.allclose(est.predict_proba(data[:5]).sum(axis=1), 1.0)


def test_cluster_then_test_rejects_separated_blobs():
    data, _ = blobs(5, n=100)
    r = cluster_then_test(data, 2, 2.0, DepthSpec())
    assert max(r.p_q_fg, r.p_q_gf, r.p_m, r.p_m_star) < 0.01


def test_random_halves_calibrated():
    # one blob split at random: the halves come from the same law
    accepted = 0
    for seed in range(40):
        gen = np.random.default_rng(1000 + seed)
        one = gen.normal(size=(120, 2))
        half = gen.permutation(120)
        rep = run_test(one[half[:60]], one[half[60:]], DepthSpec())
        accepted += rep.p_m > 0.05
    assert accepted >= 0.9 * 40


def test_empty_cluster_and_bad_pair():
    # two distinct locations: identical rows share memberships after the first
    # update, so at most two of three clusters are used
    data = np.vstack([np.zeros((5, 2)), np.ones((5, 2))])
    used = set(fcm(data, 3, seed=0).hard_labels.tolist())
    empty = ({0, 1, 2} - used).pop()
    other = min(used)
    with pytest.raises(InputError, match="empty"):
        cluster_then_test(data, 3, 2.0, DepthSpec(), pair=(other, empty), seed=0)
    with pytest.raises(InputError):
        cluster_then_test(data, 2, 2.0, DepthSpec(), pair=(0, 0))
