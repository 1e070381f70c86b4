"""Survival probability of pure states and stationary ensembles, and the
half-way survival time used as the robustness figure of merit.

For a stationary ensemble (weighted pure states averaging to the steady
state) the ensemble-average survival probability depends on the ensemble
only through the variances of the y and z Bloch components:

    S(t) = (1 + y_ss^2 + z_ss^2)/2
         + [ (1 - y_ss^2 - z_ss^2) e^{-gamma t/2}
             + V_v f_+(t) + V_w f_-(t) ] / 2

with the two non-positive response functions f_+/f_-.  The survival time
is the first t at which S(t) falls half-way to its equilibrium value
Tr[rho_ss^2].
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .bloch import AtomParams, bloch_evolve, purity, sinc_scaled, steady_state
from .errors import ConvergenceError, DegenerateStateError


@dataclass(frozen=True)
class EnsembleMoments:
    """Variances (and, for diagnostics, means) of the y and z Bloch
    components over a stationary ensemble."""

    v_var: float
    w_var: float
    mean_v: float = 0.0
    mean_w: float = 0.0

    def __post_init__(self):
        if self.v_var < -1e-12 or self.w_var < -1e-12:
            raise ValueError("variances must be nonnegative")


@dataclass(frozen=True)
class Ensemble:
    """Weighted collection of pure states.

    states: (N, 2) complex amplitudes (c_g, c_e), each normalized.
    weights: (N,) positive, summing to one.
    """

    states: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        states = np.asarray(self.states, dtype=complex)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "weights", weights)
        if states.ndim != 2 or states.shape[1] != 2:
            raise ValueError("states must have shape (N, 2)")
        if weights.shape != (states.shape[0],):
            raise ValueError("weights must have shape (N,)")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        if abs(weights.sum() - 1.0) > 1e-9:
            raise ValueError("weights must sum to one")
        norms = np.linalg.norm(states, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ValueError("ensemble members must be normalized pure states")

    @classmethod
    def from_bloch(cls, bloch, weights=None) -> "Ensemble":
        from .bloch import pure_state_from_bloch

        bloch = np.atleast_2d(np.asarray(bloch, dtype=float))
        states = np.array([pure_state_from_bloch(b) for b in bloch])
        if weights is None:
            weights = np.full(len(states), 1.0 / len(states))
        return cls(states, np.asarray(weights, dtype=float))

    def bloch(self) -> np.ndarray:
        """Bloch vectors of all members, shape (N, 3)."""
        cg = self.states[:, 0]
        ce = self.states[:, 1]
        q = np.conj(cg) * ce
        return np.stack(
            [2 * q.real, -2 * q.imag, np.abs(ce) ** 2 - np.abs(cg) ** 2], axis=1
        )

    def mean_bloch(self) -> np.ndarray:
        return self.weights @ self.bloch()

    def __len__(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class SurvivalCurve:
    times: np.ndarray
    values: np.ndarray
    equilibrium: float  # Tr[rho_ss^2]


def f_pair(p: AtomParams, t):
    """The pair (f_plus, f_minus) multiplying V_v and V_w in S(t).

    Both vanish at t=0, are non-positive for t > 0, and decay to zero.
    Scalar or array t.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    ot = p.omega_tilde
    env = np.exp(-0.75 * p.gamma * t)
    base = -np.exp(-0.5 * p.gamma * t)
    cos_t = np.real(np.cos(ot * t))
    # (gamma / (4 omega_tilde)) sin(omega_tilde t), safe at the degeneracy
    sin_term = np.real(0.25 * p.gamma * sinc_scaled(ot, t))
    f_plus = base + env * (cos_t + sin_term)
    f_minus = base + env * (cos_t - sin_term)
    return f_plus, f_minus


def state_survival(p: AtomParams, b, t):
    """Probability that a projective check at time t still finds the pure
    state with (unit) Bloch vector b, after unmonitored evolution."""
    b = np.asarray(b, dtype=float)
    n = np.linalg.norm(b)
    if abs(n - 1.0) > 1e-6:
        raise ValueError(f"state_survival requires a pure state, |b| = {n}")
    evolved = bloch_evolve(p, b, t)
    return 0.5 * (1.0 + evolved @ b)


def max_moment_budget(p: AtomParams) -> float:
    """Upper bound on V_v + V_w consistent with E[u^2] >= 0 for a
    stationary ensemble of pure states."""
    b_ss = steady_state(p)
    return 1.0 - b_ss[1] ** 2 - b_ss[2] ** 2


def ensemble_survival(p: AtomParams, m: EnsembleMoments, t):
    """Ensemble-average survival probability at time t (scalar or array)."""
    if m.v_var + m.w_var > max_moment_budget(p) + 1e-9:
        warnings.warn(
            "moments exceed the maximum consistent with E[u^2] >= 0 "
            "for a stationary ensemble",
            stacklevel=2,
        )
    b_ss = steady_state(p)
    r2 = b_ss[1] ** 2 + b_ss[2] ** 2
    f_plus, f_minus = f_pair(p, t)
    t = np.asarray(t, dtype=float)
    return 0.5 * (1.0 + r2) + 0.5 * (
        (1.0 - r2) * np.exp(-0.5 * p.gamma * t)
        + m.v_var * f_plus
        + m.w_var * f_minus
    )


def survival_curve(p: AtomParams, m: EnsembleMoments, t_max: float, n_points: int) -> SurvivalCurve:
    times = np.linspace(0.0, t_max, n_points)
    return SurvivalCurve(times, ensemble_survival(p, m, times), purity(steady_state(p)))


def survival_time(p: AtomParams, m: EnsembleMoments) -> float:
    """First time at which S(t) has fallen half-way to Tr[rho_ss^2].

    Forward scan (resolving the modified-Rabi oscillation) followed by
    bisection of the first sign change.
    """
    if p.omega == 0:
        raise DegenerateStateError(
            "survival time undefined: the stationary state is pure at omega = 0"
        )
    target = 0.5 * (1.0 + purity(steady_state(p)))

    ot_real = abs(np.real(p.omega_tilde))
    step = min(1.0 / p.gamma, 2 * np.pi / max(ot_real, p.gamma)) / 200.0
    horizon = 50.0 / p.gamma

    ts = np.arange(0.0, horizon + step, step)
    vals = ensemble_survival(p, m, ts) - target
    below = np.flatnonzero(vals <= 0.0)
    if below.size == 0:
        raise ConvergenceError(
            "survival probability did not cross its half-way target "
            f"within {horizon} time units"
        )
    i = below[0]
    if i == 0:
        return 0.0
    lo, hi = ts[i - 1], ts[i]

    def g(t):
        return ensemble_survival(p, m, t) - target

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-10 * max(hi, 1e-30):
            break
    t_cross = 0.5 * (lo + hi)

    # Flag tangential (ill-conditioned) crossings.
    h = 1e-6 / p.gamma
    slope = (g(t_cross + h) - g(max(t_cross - h, 0.0))) / (2 * h)
    if abs(slope) < 1e-6:
        warnings.warn(
            f"near-tangent survival crossing at t = {t_cross}", stacklevel=2
        )
    return t_cross


def moments_from_ensemble(e: Ensemble) -> EnsembleMoments:
    """Weighted variances of the y and z Bloch components of an ensemble."""
    b = e.bloch()
    w = e.weights
    mean_v = w @ b[:, 1]
    mean_w = w @ b[:, 2]
    return EnsembleMoments(
        v_var=max(w @ b[:, 1] ** 2 - mean_v**2, 0.0),
        w_var=max(w @ b[:, 2] ** 2 - mean_w**2, 0.0),
        mean_v=mean_v,
        mean_w=mean_w,
    )
