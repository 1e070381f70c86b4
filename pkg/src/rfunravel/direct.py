"""Direct photodetection unraveling.

Every detection resets the atom to the ground state, so at steady state
the ensemble members are labelled by the time t since the last jump.
The unnormalized no-detection amplitudes have a closed form; their norm
P0(t) is the no-detection probability, and the stationary weight density
is P0(t) / integral(P0).  Ensemble moments follow by quadrature, and a
jump simulator draws waiting times by inverting P0.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .bloch import AtomParams, sinc_scaled, steady_state
from .survival import Ensemble, EnsembleMoments

_TAIL_EPS = 1e-12
_MAX_SAMPLE_NODES = 2_000_000
_CHUNK = 1 << 20


def no_jump_amplitudes(p: AtomParams, t):
    """Unnormalized amplitudes (c_g, c_e) after no-detection time t,
    starting from the ground state.  Scalar or array t."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    oc = p.omega_check
    if oc.imag == 0:
        # underdamped: oscillatory, envelope e^{-gamma t/4}
        env = np.exp(-0.25 * p.gamma * t)
        half_sinc = np.real(sinc_scaled(oc, 0.5 * t))  # sin(oc t/2)/oc
        cg = (np.real(np.cos(0.5 * oc * t)) + 0.5 * p.gamma * half_sinc) * env
        ce = -1j * p.omega * half_sinc * env
        return cg + 0j, ce
    # overdamped (omega < gamma/2): hyperbolic functions folded into the
    # envelope so nothing overflows at large t
    kappa = oc.imag
    a_plus = np.exp((0.5 * kappa - 0.25 * p.gamma) * t)
    a_minus = np.exp(-(0.5 * kappa + 0.25 * p.gamma) * t)
    cosh_env = 0.5 * (a_plus + a_minus)
    # sinh(kappa t / 2) / kappa, enveloped, with a Taylor guard at kappa -> 0
    arg = 0.5 * kappa * t
    small = np.abs(arg) < 1e-4
    sinhc_env = np.where(
        small,
        np.exp(-0.25 * p.gamma * t) * 0.5 * t * (1.0 + arg * arg / 6.0),
        (a_plus - a_minus) / np.where(small, 1.0, 2.0 * kappa),
    )
    cg = cosh_env + 0.5 * p.gamma * sinhc_env
    ce = -1j * p.omega * sinhc_env
    return cg + 0j, ce


def p0(p: AtomParams, t):
    """No-detection probability since the last jump; 1 at t=0,
    nonincreasing for omega > 0."""
    cg, ce = no_jump_amplitudes(p, t)
    return np.abs(cg) ** 2 + np.abs(ce) ** 2


def _member_integrands(p: AtomParams, t):
    """Columns: P0, u*P0, v*P0, w*P0, v^2*P0, w^2*P0 at times t.

    (u, v, w) is the Bloch vector of the normalized member; multiplying
    by the norm keeps every integrand division-free.
    """
    cg, ce = no_jump_amplitudes(p, t)
    norm = np.abs(cg) ** 2 + np.abs(ce) ** 2
    q = np.conj(cg) * ce
    u_n = 2 * q.real
    v_n = -2 * q.imag
    w_n = np.abs(ce) ** 2 - np.abs(cg) ** 2
    return np.stack(
        [norm, u_n, v_n, w_n, v_n**2 / norm, w_n**2 / norm], axis=-1
    )


def _simpson_chunked(f, t_max: float, n_intervals: int):
    """Composite Simpson of a vector-valued integrand on [0, t_max],
    evaluated in bounded-memory chunks.  n_intervals must be even."""
    h = t_max / n_intervals
    total = None
    for start in range(0, n_intervals + 1, _CHUNK):
        stop = min(start + _CHUNK, n_intervals + 1)
        idx = np.arange(start, stop)
        vals = np.asarray(f(idx * h))
        if vals.ndim == 1:
            vals = vals[:, None]
        w = np.where(idx % 2 == 1, 4.0, 2.0)
        w[idx == 0] = 1.0
        w[idx == n_intervals] = 1.0
        part = w @ vals
        total = part if total is None else total + part
    return total * (h / 3.0)


@dataclass(frozen=True)
class DirectEnsembleGrid:
    """Uniform quadrature grid over [0, t_max] for the stationary
    direct-detection ensemble, with the normalization integral(P0)."""

    params: AtomParams
    t_max: float
    n_intervals: int
    norm_const: float

    @property
    def step(self) -> float:
        return self.t_max / self.n_intervals


def _tail_decay_rate(p: AtomParams) -> float:
    """Asymptotic decay rate of P0 (gamma/2 when driven above gamma/2,
    reduced by the hyperbolic growth below)."""
    kappa = abs(np.imag(p.omega_check))
    return 0.5 * p.gamma - kappa


def build_direct_grid(p: AtomParams, tail_eps: float = _TAIL_EPS, t_max_cap: float = None) -> DirectEnsembleGrid:
    """Construct the quadrature grid, extending t_max until the truncated
    tail of P0 is below tail_eps times the normalization."""
    if p.omega == 0:
        raise ValueError("direct-detection ensemble is degenerate at omega = 0")
    oc_abs = abs(p.omega_check)
    step = min(0.02 / p.gamma, 0.02 * 2 * np.pi / oc_abs) if oc_abs > 0 else 0.02 / p.gamma

    # Photon emission rate gamma * (1 + z_ss) / 2 sets the scale of 1/N.
    norm_est = 2.0 / (p.gamma * (1.0 + steady_state(p)[2]))
    t_max = t_max_cap if t_max_cap is not None else 80.0 / p.gamma
    rate = _tail_decay_rate(p)
    # Tail bound: integral_t^inf P0 ~ P0(t)/rate.
    while p0(p, t_max) / rate > tail_eps * norm_est:
        t_max *= 2.0
        if t_max > 1e9 / p.gamma:
            raise RuntimeError("failed to truncate P0 tail")

    n_intervals = int(np.ceil(t_max / step))
    n_intervals += n_intervals % 2
    norm_const = float(_simpson_chunked(lambda t: p0(p, t), t_max, n_intervals)[0])
    return DirectEnsembleGrid(p, t_max, n_intervals, norm_const)


def stationary_weight(p: AtomParams, grid: DirectEnsembleGrid, t):
    """Probability density of the time since the last detection."""
    t = np.asarray(t, dtype=float)
    if np.any(t > grid.t_max):
        raise ValueError(f"t beyond grid truncation t_max = {grid.t_max}")
    return p0(p, t) / grid.norm_const


def _ensemble_integrals(p: AtomParams, grid: DirectEnsembleGrid, n_intervals: int):
    ints = _simpson_chunked(
        lambda t: _member_integrands(p, t), grid.t_max, n_intervals
    )
    return ints / ints[0]  # normalize by integral(P0) on the same grid


def direct_moments(p: AtomParams, grid: DirectEnsembleGrid) -> EnsembleMoments:
    """Variances V_v and V_w of the stationary direct-detection ensemble."""
    fine = _ensemble_integrals(p, grid, grid.n_intervals)
    # Richardson-style error check on a half-resolution grid.
    half = grid.n_intervals // 2
    half += half % 2
    coarse = _ensemble_integrals(p, grid, half)
    # Simpson is fourth order, so the fine-grid error is ~(fine-coarse)/15.
    err = np.max(np.abs(fine[1:] - coarse[1:])) / 15.0
    if err > 1e-6:
        warnings.warn(f"direct-moment quadrature error estimate {err:.2e}", stacklevel=2)
    b_ss = steady_state(p)
    _, _, mean_v, mean_w, v2, w2 = fine
    return EnsembleMoments(
        v_var=max(v2 - b_ss[1] ** 2, 0.0),
        w_var=max(w2 - b_ss[2] ** 2, 0.0),
        mean_v=mean_v,
        mean_w=mean_w,
    )


def reconstruct_rho(p: AtomParams, grid: DirectEnsembleGrid) -> np.ndarray:
    """Weighted Bloch mean of the ensemble members; equals the steady
    state up to quadrature error."""
    ints = _ensemble_integrals(p, grid, grid.n_intervals)
    return np.array([ints[1], ints[2], ints[3]])


def _sampling_cdf(p: AtomParams, grid: DirectEnsembleGrid):
    """Times and the cumulative weight of wp(t) on a (possibly decimated)
    copy of the quadrature grid."""
    n = min(grid.n_intervals, _MAX_SAMPLE_NODES)
    ts = np.linspace(0.0, grid.t_max, n + 1)
    w = p0(p, ts)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (w[1:] + w[:-1]) * np.diff(ts))])
    cdf /= cdf[-1]
    return ts, w, cdf


def sample_direct_ensemble(p: AtomParams, n: int, seed: int) -> Ensemble:
    """Draw n equal-weight members of the stationary ensemble by
    inverse-CDF sampling of the time since the last jump."""
    if n < 1:
        raise ValueError("need at least one member")
    grid = build_direct_grid(p)
    ts, _, cdf = _sampling_cdf(p, grid)
    rng = np.random.default_rng(seed)
    t_samples = np.interp(rng.uniform(size=n), cdf, ts)
    cg, ce = no_jump_amplitudes(p, t_samples)
    norm = np.sqrt(np.abs(cg) ** 2 + np.abs(ce) ** 2)
    states = np.stack([cg / norm, ce / norm], axis=1)
    return Ensemble(states, np.full(n, 1.0 / n))


@dataclass(frozen=True)
class DirectRecord:
    """One direct-detection trajectory: jump times plus state snapshots."""

    jump_times: np.ndarray
    snapshot_times: np.ndarray
    snapshot_bloch: np.ndarray  # (n_snapshots, 3)
    time_since_jump: np.ndarray
    duration: float

    @property
    def mean_jump_rate(self) -> float:
        return len(self.jump_times) / self.duration


def sample_waiting_times(p: AtomParams, uniforms, grid: DirectEnsembleGrid = None):
    """Invert the no-detection probability: T such that P0(T) = U."""
    if p.omega == 0:
        return np.full(np.shape(uniforms), np.inf)
    if grid is None:
        grid = build_direct_grid(p)
    ts, w, _ = _sampling_cdf(p, grid)
    # P0 is nonincreasing; np.interp needs ascending abscissae.
    return np.interp(uniforms, w[::-1], ts[::-1])


def simulate_direct(p: AtomParams, duration: float, seed: int, snapshot_times=None) -> DirectRecord:
    """Quantum-jump trajectory from the ground state at t = 0.

    Waiting times are drawn by numerically inverting P0; between jumps
    the state is the normalized no-jump solution.
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    rng = np.random.default_rng(seed)
    grid = build_direct_grid(p) if p.omega > 0 else None

    jumps = []
    t = 0.0
    if p.omega > 0:
        ts_cdf, w_cdf, _ = _sampling_cdf(p, grid)
        while t < duration:
            batch = np.interp(rng.uniform(size=256), w_cdf[::-1], ts_cdf[::-1])
            for wt in batch:
                t += wt
                if t >= duration:
                    break
                jumps.append(t)
            else:
                continue
            break
    jump_times = np.array(jumps)

    if snapshot_times is None:
        snapshot_times = np.array([])
    snapshot_times = np.asarray(snapshot_times, dtype=float)
    last = np.zeros_like(snapshot_times)
    if len(jump_times):
        idx = np.searchsorted(jump_times, snapshot_times, side="right") - 1
        last = np.where(idx >= 0, jump_times[np.maximum(idx, 0)], 0.0)
    since = snapshot_times - last
    cg, ce = no_jump_amplitudes(p, since)
    norm = np.abs(cg) ** 2 + np.abs(ce) ** 2
    q = np.conj(cg) * ce
    bloch = np.stack(
        [2 * q.real / norm, -2 * q.imag / norm, (np.abs(ce) ** 2 - np.abs(cg) ** 2) / norm],
        axis=-1,
    ).reshape(-1, 3)
    return DirectRecord(jump_times, snapshot_times, bloch, since, duration)
