"""Survival probability of single states and stationary ensembles."""

import warnings

import numpy as np
import pytest

from rfunravel import (
    AtomParams,
    ConvergenceError,
    DegenerateStateError,
    Ensemble,
    EnsembleMoments,
    ensemble_survival,
    f_pair,
    moments_from_ensemble,
    purity,
    state_survival,
    steady_state,
    survival_curve,
    survival_time,
)
from rfunravel.survival import max_moment_budget

from oracles import evolve_bloch_rk4


def stationary_pair_ensemble(p, dv, dw, rng=None):
    """Four-member stationary ensemble built from a +-(dv, dw) pair around
    the steady state, with +-u completing each member to a pure state."""
    y, z = steady_state(p)[1:]
    members = []
    for sv, sw in ((dv, dw), (-dv, -dw)):
        v, w = y + sv, z + sw
        u = np.sqrt(max(1.0 - v * v - w * w, 0.0))
        members.extend([[u, v, w], [-u, v, w]])
    return Ensemble.from_bloch(np.array(members))


def test_f_pair_trivials_and_sign():
    p = AtomParams(1.0, 10.0)
    fp, fm = f_pair(p, 0.0)
    assert fp == pytest.approx(0.0, abs=1e-14)
    assert fm == pytest.approx(0.0, abs=1e-14)
    t = np.linspace(1e-3, 30.0, 2000)
    for omega in (0.1, 0.25, 1.0, 10.0):
        fp, fm = f_pair(AtomParams(1.0, omega), t)
        assert np.all(fp <= 1e-12)
        assert np.all(fm <= 1e-12)
        assert abs(fp[-1]) < 1e-5 and abs(fm[-1]) < 1e-5


def test_state_survival_matches_oracle():
    rng = np.random.default_rng(5)
    for omega in (0.3, 1.0, 8.0):
        p = AtomParams(1.0, omega)
        for _ in range(5):
            b = rng.standard_normal(3)
            b /= np.linalg.norm(b)
            t = rng.uniform(0.1, 4.0)
            evolved = evolve_bloch_rk4(1.0, omega, b, t)
            want = 0.5 * (1.0 + evolved @ b)
            assert state_survival(p, b, t) == pytest.approx(want, abs=1e-6)


def test_ensemble_survival_is_weighted_member_average():
    # For a stationary ensemble the moment formula must agree with the
    # direct weighted average of member survival probabilities.
    for omega in (0.7, 5.0):
        p = AtomParams(1.0, omega)
        e = stationary_pair_ensemble(p, 0.1, -0.05)
        assert np.allclose(e.mean_bloch(), steady_state(p), atol=1e-12)
        m = moments_from_ensemble(e)
        ts = np.linspace(0.0, 6.0, 40)
        direct = sum(
            w * state_survival(p, b, ts) for b, w in zip(e.bloch(), e.weights)
        )
        assert np.allclose(ensemble_survival(p, m, ts), direct, atol=1e-10)


def test_survival_limits():
    p = AtomParams(1.0, 10.0)
    m = EnsembleMoments(0.2, 0.3)
    assert ensemble_survival(p, m, 0.0) == pytest.approx(1.0)
    # long-time limit is the equilibrium purity
    assert ensemble_survival(p, m, 200.0) == pytest.approx(
        purity(steady_state(p)), abs=1e-12
    )


def test_survival_decreases_with_moments():
    # larger variances can only lower S(t) (f_plus, f_minus <= 0)
    p = AtomParams(1.0, 10.0)
    ts = np.linspace(0.01, 5.0, 200)
    lo = ensemble_survival(p, EnsembleMoments(0.1, 0.1), ts)
    hi = ensemble_survival(p, EnsembleMoments(0.4, 0.4), ts)
    assert np.all(hi <= lo + 1e-12)


def test_moment_budget_warning():
    p = AtomParams(1.0, 10.0)
    budget = max_moment_budget(p)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ensemble_survival(p, EnsembleMoments(budget / 2, budget / 2 - 1e-6), 1.0)
    with pytest.warns(UserWarning, match="moments exceed"):
        ensemble_survival(p, EnsembleMoments(budget, budget), 1.0)


def test_survival_time_is_first_crossing():
    p = AtomParams(1.0, 10.0)
    m = EnsembleMoments(0.45, 0.45)
    tau = survival_time(p, m)
    target = 0.5 * (1.0 + purity(steady_state(p)))
    assert ensemble_survival(p, m, tau) == pytest.approx(target, abs=1e-7)
    before = np.linspace(0.0, tau * 0.999, 500)
    assert np.all(ensemble_survival(p, m, before) > target - 1e-9)


def test_survival_time_examples():
    # zero variances: S = (1 + (1-r^2) e^{-gamma t/2} + r^2)/2 crosses the
    # half-way point exactly at 2 ln 2 / gamma, for any omega
    for omega in (0.5, 1.0, 10.0, 100.0):
        tau = survival_time(AtomParams(1.0, omega), EnsembleMoments(0.0, 0.0))
        assert tau == pytest.approx(2.0 * np.log(2.0), abs=1e-8)
    # gamma scaling
    tau2 = survival_time(AtomParams(4.0, 40.0), EnsembleMoments(0.0, 0.0))
    assert tau2 == pytest.approx(0.5 * np.log(2.0), abs=1e-8)


def test_survival_time_errors():
    with pytest.raises(DegenerateStateError):
        survival_time(AtomParams(1.0, 0.0), EnsembleMoments(0.0, 0.0))
    with pytest.raises(ValueError):
        EnsembleMoments(-0.1, 0.0)


def test_survival_curve_container():
    p = AtomParams(1.0, 2.0)
    c = survival_curve(p, EnsembleMoments(0.1, 0.1), 5.0, 11)
    assert c.times.shape == (11,) and c.values.shape == (11,)
    assert c.values[0] == pytest.approx(1.0)
    assert c.equilibrium == pytest.approx(purity(steady_state(p)))


def test_ensemble_validation():
    good = np.array([[1.0, 0.0], [0.0, 1.0]], dtype=complex)
    Ensemble(good, np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        Ensemble(good, np.array([0.6, 0.6]))
    with pytest.raises(ValueError):
        Ensemble(good * 2.0, np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        Ensemble(good, np.array([1.5, -0.5]))
