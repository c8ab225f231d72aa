"""Backend equivalence: the numba kernels and the numpy fallback must produce
the same scores, assignments and samples given the same inputs."""

import math

import numpy as np
import pytest

from crpmap import _kernels
from crpmap.core import Partition

pytestmark = pytest.mark.skipif(not _kernels.HAVE_NUMBA,
                                reason="numba disabled; single-backend run")


def _random_state(rng, n=40, d=2, k=4):
    X = rng.normal(size=(n, d)) * 3
    z0 = rng.integers(0, k, size=n)
    part = Partition.from_labels(z0)
    return X, _kernels.ClusterState.from_partition(X, part)


def _prior_arrays(d):
    return np.zeros(d), 0.4, np.full(d, 1.3), 1.1


def test_q_scores_equivalent(rng):
    X, state = _random_state(rng)
    m0, c0, b0, a0 = _prior_arrays(2)
    lgam = _kernels.lgamma_table(a0, X.shape[0])
    for i in range(10):
        q_nb = _kernels._q_scores_nb(X[i], state.S, state.V, state.Nk, state.K,
                                     m0, c0, b0, a0, math.log(2.0), lgam)
        q_np = _kernels._q_scores_np(X[i], state.S, state.V, state.Nk, state.K,
                                     m0, c0, b0, a0, math.log(2.0), lgam)
        assert np.allclose(q_nb, q_np, rtol=1e-12, atol=1e-12)


def test_map_sweep_identical(rng):
    X, state_a = _random_state(rng, n=120)
    _, state_b = _random_state(np.random.default_rng(20240810), n=120)
    m0, c0, b0, a0 = _prior_arrays(2)
    lgam = _kernels.lgamma_table(a0, X.shape[0])
    order = np.arange(X.shape[0])
    steps_a = np.empty(X.shape[0], dtype=np.int64)
    steps_b = np.empty(X.shape[0], dtype=np.int64)
    for _ in range(5):
        state_a.K, ch_a, em_a = _kernels.map_sweep(
            X, state_a.z, state_a.S, state_a.V, state_a.Nk, state_a.K, order,
            m0, c0, b0, a0, math.log(1.5), lgam, steps_a, backend="numba")
        state_b.K, ch_b, em_b = _kernels.map_sweep(
            X, state_b.z, state_b.S, state_b.V, state_b.Nk, state_b.K, order,
            m0, c0, b0, a0, math.log(1.5), lgam, steps_b, backend="numpy")
        assert np.array_equal(steps_a, steps_b)
        assert np.array_equal(state_a.z, state_b.z)
        assert (ch_a, em_a) == (ch_b, em_b)
        assert state_a.K == state_b.K


def test_gibbs_sweep_identical_with_same_uniforms(rng):
    X, state_a = _random_state(rng, n=80)
    _, state_b = _random_state(np.random.default_rng(20240810), n=80)
    m0, c0, b0, a0 = _prior_arrays(2)
    lgam = _kernels.lgamma_table(a0, X.shape[0])
    order = np.arange(X.shape[0])
    steps = np.empty(X.shape[0], dtype=np.int64)
    u_rng = np.random.default_rng(5)
    for _ in range(20):
        u = u_rng.random(X.shape[0])
        state_a.K, _ = _kernels.gibbs_sweep_arrays(
            X, state_a.z, state_a.S, state_a.V, state_a.Nk, state_a.K, order, u,
            m0, c0, b0, a0, math.log(1.5), lgam, steps, backend="numba")
        state_b.K, _ = _kernels.gibbs_sweep_arrays(
            X, state_b.z, state_b.S, state_b.V, state_b.Nk, state_b.K, order, u,
            m0, c0, b0, a0, math.log(1.5), lgam, steps, backend="numpy")
        assert np.array_equal(state_a.z, state_b.z)
        assert state_a.K == state_b.K


def test_nll_points_equivalent(rng):
    X, state = _random_state(rng, n=60, k=5)
    m0, c0, b0, a0 = _prior_arrays(2)
    lgam = _kernels.lgamma_table(a0, X.shape[0])
    v_nb = _kernels.nll_points(X, state.z, state.S, state.V, state.Nk, state.K,
                               m0, c0, b0, a0, lgam, backend="numba")
    v_np = _kernels.nll_points(X, state.z, state.S, state.V, state.Nk, state.K,
                               m0, c0, b0, a0, lgam, backend="numpy")
    assert v_nb == pytest.approx(v_np, rel=1e-12)


def test_dpmeans_sweep_identical(rng):
    X = rng.normal(size=(70, 3)) * 4
    centers_a = np.zeros((71, 3))
    centers_a[0] = X.mean(axis=0)
    centers_b = centers_a.copy()
    z_a = np.zeros(70, dtype=np.int64)
    z_b = np.zeros(70, dtype=np.int64)
    out_a = _kernels.dpmeans_sweep(X, z_a, centers_a, 1, 9.0, False, backend="numba")
    out_b = _kernels.dpmeans_sweep(X, z_b, centers_b, 1, 9.0, False, backend="numpy")
    assert out_a == out_b
    assert np.array_equal(z_a, z_b)
    assert np.allclose(centers_a, centers_b)


def test_state_refresh_matches_batch(rng):
    X, state = _random_state(rng, n=50)
    m0, c0, b0, a0 = _prior_arrays(2)
    lgam = _kernels.lgamma_table(a0, X.shape[0])
    order = np.arange(X.shape[0])
    steps = np.empty(X.shape[0], dtype=np.int64)
    u_rng = np.random.default_rng(3)
    for _ in range(30):
        u = u_rng.random(X.shape[0])
        state.K, _ = _kernels.gibbs_sweep_arrays(
            X, state.z, state.S, state.V, state.Nk, state.K, order, u,
            m0, c0, b0, a0, 0.0, lgam, steps)
    S_before = state.S[:state.K].copy()
    state.refresh()
    assert np.allclose(S_before, state.S[:state.K], rtol=1e-10)
    for k in range(state.K):
        members = X[state.z == k]
        assert state.Nk[k] == members.shape[0]
        assert np.allclose(state.S[k], members.sum(axis=0), rtol=1e-12)
        assert np.allclose(state.V[k], (members ** 2).sum(axis=0), rtol=1e-12)
