import math

import numpy as np
import pytest

import nmd


def test_svd_and_norms():
    m = np.diag([5.0, 2.0])
    u, s, v = nmd.svd(m)
    assert np.allclose(s, [5.0, 2.0])
    assert np.allclose(u @ np.diag(s) @ v.T, m)
    assert nmd.norm(np.eye(2), "nuclear") == pytest.approx(2.0)
    assert nmd.norm(np.array([[3.0, -4.0]]), "l1") == pytest.approx(7.0)


def test_prox_closed_forms():
    out = nmd.prox("l1", np.array([[3.0, -0.5]]), 1.0)
    assert np.array_equal(out, np.array([[2.0, 0.0]]))
    col = nmd.prox("col21", np.array([[3.0], [4.0]]), 2.5)
    assert np.allclose(col, [[1.5], [2.0]])
    assert np.allclose(nmd.svt(np.diag([5.0, 2.0]), 3.0), np.diag([2.0, 0.0]))


def test_solve_zero_data_and_least_squares():
    est = nmd.solve(np.zeros((4, 4)), 0.5, 0.2, alpha=2.0)
    assert abs(est["objective_trace"][-1]) <= 1e-10
    y = np.random.default_rng(0).normal(size=(5, 4))
    ls = nmd.solve(y, 0.0, 0.0)
    assert np.linalg.norm(ls["theta_hat"] + ls["gamma_hat"] - y) <= 1e-7 * np.linalg.norm(y)
    trace = ls["objective_trace"]
    assert all(b <= a for a, b in zip(trace, trace[1:]))


def test_two_step_example():
    y = np.array([[5.0, 0.0], [0.0, 0.0]])
    est = nmd.two_step(y, 10.0, 1.0)
    assert np.array_equal(est["gamma_hat"], np.array([[4.0, 0.0], [0.0, 0.0]]))
    assert not est["theta_hat"].any()


def test_tuning_and_rate():
    p = nmd.params_sparse_gaussian(1.0, 100, 100, 0.0)
    assert p["lambda"] == pytest.approx(1.6)
    rate = nmd.corollary_rate_sparse_gaussian(100, 100, 10, 1000, 1.0, 1.0)
    assert rate == pytest.approx(0.2 + 1000 * math.log(1e4) / 1e4 + 0.1)


def test_generators_are_deterministic():
    a = nmd.gen_low_rank(10, 8, 2, 3.0, "l1", 7)
    b = nmd.gen_low_rank(10, 8, 2, 3.0, "l1", 7)
    assert np.array_equal(a, b)
    assert nmd.spikiness("l1", a) <= 3.0 + 1e-12
    g, support = nmd.gen_sparse(6, 5, 4, "l1", 1.0, 3)
    assert len(support) == 4
    assert np.count_nonzero(g) == 4
    theta, gamma = nmd.bad_pair("l1", 2, 2, 2, 3.0)
    assert np.array_equal(theta + gamma, np.zeros((2, 2)))


def test_shape_errors_raise():
    with pytest.raises(ValueError):
        nmd.decomposition_error(np.zeros((2, 2)), np.zeros((2, 3)), np.zeros((2, 2)), np.zeros((2, 2)))


def test_small_sweep():
    rows, passed, detail = nmd.run_sweep("badpair_check", grid=[3], d=10)
    assert len(rows) == 1
    assert passed
    assert "radius" in detail
