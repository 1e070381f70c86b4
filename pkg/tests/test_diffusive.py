"""Diffusive unravelings: noise statistics, the Euler-Maruyama step, the
ergodic moment estimator and the grid search plumbing."""

import numpy as np
import pytest

from rfunravel import (
    AtomParams,
    SseConfig,
    sample_noise,
    simulate_cmu,
    sse_step,
    steady_state,
)
from rfunravel.bloch import bloch_from_pure_state
from rfunravel.diffusive import _tau_with_error


FAST = SseConfig(duration=400.0)


def test_noise_moment_statistics():
    rng = np.random.default_rng(17)
    n = 1_000_000
    dt = 0.01
    for ups in (1.0, 0.0, -1.0, 0.5j, 0.3 - 0.4j):
        dw = sample_noise(ups, dt, rng, size=n)
        # E[dW] = 0 (sample SE sqrt(dt/n)); E[|dW|^2] = dt and
        # E[dW^2] = upsilon dt (second-moment SE <= dt sqrt(2/n))
        assert abs(dw.mean()) < 4 * np.sqrt(dt / n)
        tol2 = 4 * dt * np.sqrt(2.0 / n)
        assert abs(np.mean(np.abs(dw) ** 2) - dt) < tol2
        assert abs(np.mean(dw**2) - complex(ups) * dt) < tol2


def test_noise_guards():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        sample_noise(1.5, 0.01, rng)
    with pytest.raises(ValueError):
        sample_noise(1.0, -0.01, rng)


def test_step_without_decay_is_rabi_rotation():
    # gamma -> 0 limit: pure Hamiltonian rotation about the x-axis
    p = AtomParams(1e-12, 2.0)
    psi = np.array([1.0 + 0j, 0.0 + 0j])
    dt = 1e-4
    for _ in range(int(round(np.pi / p.omega / dt))):  # half a Rabi period
        psi = sse_step(p, 0.0, psi, 0.0, dt)
    b = bloch_from_pure_state(psi)
    assert abs(b[2] - 1.0) < 1e-3  # ground -> excited


def test_step_keeps_normalization():
    p = AtomParams(1.0, 5.0)
    rng = np.random.default_rng(3)
    psi = np.array([1.0 + 0j, 0.0 + 0j])
    for _ in range(200):
        psi = sse_step(p, 0.7, psi, sample_noise(0.7, 1e-3, rng), 1e-3)
        assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)


def test_seed_determinism_bit_exact():
    p = AtomParams(1.0, 10.0)
    a = simulate_cmu(p, 1.0, FAST)
    b = simulate_cmu(p, 1.0, FAST)
    assert a.moments == b.moments
    assert np.array_equal(a.block_stats, b.block_stats)
    assert np.array_equal(a.sampled_ensemble.states, b.sampled_ensemble.states)
    c = simulate_cmu(p, 1.0, SseConfig(duration=400.0, seed=1))
    assert a.moments != c.moments


def test_time_average_matches_steady_state():
    p = AtomParams(1.0, 10.0)
    stats = simulate_cmu(p, 1.0, SseConfig(duration=1000.0))
    b_ss = steady_state(p)
    assert stats.moments.mean_v == pytest.approx(b_ss[1], abs=5 * stats.v_var_err + 0.02)
    assert stats.moments.mean_w == pytest.approx(b_ss[2], abs=0.02)
    # sampled snapshots also average back to the steady state (u by symmetry)
    mean = stats.sampled_ensemble.mean_bloch()
    assert abs(mean[1] - b_ss[1]) < 0.05 and abs(mean[2] - b_ss[2]) < 0.05


def test_upsilon_minus_one_confines_to_u_zero():
    p = AtomParams(1.0, 10.0)
    stats = simulate_cmu(p, -1.0, FAST)
    assert stats.mean_abs_u < 1e-12
    assert np.max(np.abs(stats.sampled_ensemble.bloch()[:, 0])) < 1e-9


def test_dt_halving_stability():
    p = AtomParams(1.0, 10.0)
    coarse = simulate_cmu(p, 1.0, SseConfig(duration=800.0, dt=1e-3))
    fine = simulate_cmu(p, 1.0, SseConfig(duration=800.0, dt=5e-4))
    tol = 4 * (coarse.v_var_err + fine.v_var_err)
    assert abs(coarse.moments.v_var - fine.moments.v_var) < tol
    tol = 4 * (coarse.w_var_err + fine.w_var_err)
    assert abs(coarse.moments.w_var - fine.moments.w_var) < tol


def test_symmetry_u_to_minus_u():
    # the distribution is symmetric under u -> -u: |mean u| is small
    p = AtomParams(1.0, 10.0)
    stats = simulate_cmu(p, 1.0, SseConfig(duration=1000.0))
    mean_u = stats.sampled_ensemble.mean_bloch()[0]
    assert abs(mean_u) < 0.2 * stats.mean_abs_u


def test_upsilon_validation():
    p = AtomParams(1.0, 10.0)
    with pytest.raises(ValueError):
        simulate_cmu(p, 1.2, FAST)
    with pytest.raises(ValueError):
        sse_step(p, 2.0, [1.0, 0.0], 0.0, 1e-3)


def test_tau_error_estimate_positive():
    p = AtomParams(1.0, 10.0)
    stats = simulate_cmu(p, 1.0, FAST)
    tau, err = _tau_with_error(p, stats)
    assert tau > 0 and err > 0
    assert err < 0.5 * tau
