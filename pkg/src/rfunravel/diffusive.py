"""Continuous Markovian (diffusive) unravelings of the fluorescence
master equation.

The family is parametrized by a complex number upsilon in the closed
unit disc.  The unnormalized state obeys the Ito equation

    d|psi> = dt [ -iH - (gamma/2) sigma^dag sigma + J(t) sigma ] |psi>,
    J(t) dt = gamma <upsilon sigma + sigma^dag> dt + sqrt(gamma) dW(t),

with complex Gaussian noise satisfying E[dW] = 0, E[dW* dW] = dt and
E[dW^2] = upsilon dt.  There is no closed form for the stationary
ensemble, so moments are estimated by long-run time averages (ergodic
over the stationary ensemble), with block averaging for error bars.
The most robust member is located by a coarse-to-fine search over a
polar grid on the disc.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .bloch import AtomParams, pure_state_from_bloch
from .survival import Ensemble, EnsembleMoments, survival_time

_BLOCK_CHUNK = 500_000


def _check_upsilon(upsilon: complex) -> complex:
    upsilon = complex(upsilon)
    if abs(upsilon) > 1.0 + 1e-12:
        raise ValueError(f"|upsilon| must be <= 1, got {abs(upsilon)}")
    return upsilon


def _noise_shape(upsilon: complex):
    """Amplitudes (a, b) and half-phase (cos, sin) of the correlated
    complex noise dW = e^{i theta/2} (a N1 + i b N2) sqrt(dt)."""
    r = abs(upsilon)
    theta = np.angle(upsilon) if r > 0 else 0.0
    a = np.sqrt((1.0 + r) / 2.0)
    b = np.sqrt((1.0 - r) / 2.0)
    return a, b, np.cos(theta / 2.0), np.sin(theta / 2.0)


def sample_noise(upsilon: complex, dt: float, rng, size=None):
    """Complex noise increments with the three stated moment conditions."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    upsilon = _check_upsilon(upsilon)
    a, b, c2, s2 = _noise_shape(upsilon)
    n = rng.standard_normal(size=(1 if size is None else size, 2))
    dw = (c2 + 1j * s2) * (a * n[:, 0] + 1j * b * n[:, 1]) * np.sqrt(dt)
    return dw[0] if size is None else dw


def sse_step(p: AtomParams, upsilon: complex, psi, dw: complex, dt: float) -> np.ndarray:
    """One Euler-Maruyama step on a normalized amplitude pair (c_g, c_e)."""
    upsilon = _check_upsilon(upsilon)
    cg, ce = np.asarray(psi, dtype=complex)
    s = np.conj(cg) * ce  # <sigma>
    j_dt = p.gamma * (upsilon * s + np.conj(s)) * dt + np.sqrt(p.gamma) * dw
    new_cg = cg + (-1j * 0.5 * p.omega * ce) * dt + j_dt * ce
    new_ce = ce + (-1j * 0.5 * p.omega * cg - 0.5 * p.gamma * ce) * dt
    out = np.array([new_cg, new_ce])
    norm = np.linalg.norm(out)
    if norm < 1e-12:
        raise FloatingPointError("state norm underflow; reduce the step size")
    return out / norm


@dataclass(frozen=True)
class SseConfig:
    """Integration configuration; None fields are derived from the atom
    parameters (dt = 0.01 min(1/gamma, 1/omega), burn_in = 20/gamma,
    duration = 2000/gamma, snapshots every 0.5/gamma)."""

    dt: float = None
    burn_in: float = None
    duration: float = None
    snapshot_interval: float = None
    n_trajectories: int = 1
    n_blocks: int = 20
    seed: int = 0

    def resolve(self, p: AtomParams) -> "SseConfig":
        dt = self.dt
        if dt is None:
            dt = 0.01 * min(1.0 / p.gamma, 1.0 / p.omega if p.omega > 0 else np.inf)
        return replace(
            self,
            dt=dt,
            burn_in=self.burn_in if self.burn_in is not None else 20.0 / p.gamma,
            duration=self.duration if self.duration is not None else 2000.0 / p.gamma,
            snapshot_interval=(
                self.snapshot_interval
                if self.snapshot_interval is not None
                else 0.5 / p.gamma
            ),
        )


@dataclass(frozen=True)
class CmuStats:
    """Ergodic statistics of one long diffusive trajectory."""

    upsilon: complex
    moments: EnsembleMoments
    v_var_err: float
    w_var_err: float
    mean_abs_u: float
    mean_abs_u_err: float
    block_stats: np.ndarray  # (n_blocks, 3): v_var, w_var, mean |u|
    sampled_ensemble: Ensemble


def _run_steps(p, a, b, c2, s2, ur, ui, dt, n, state, rng, stride, collect):
    """Advance n steps in bounded chunks; pass each record chunk and its
    global first-step index to ``collect`` (may be None)."""
    gr, gi, er, ei = state
    done = 0
    while done < n:
        m = min(_BLOCK_CHUNK, n - done)
        m -= m % stride
        if m == 0:
            m = n - done
        noise = rng.standard_normal(size=(m, 2))
        record = np.empty((m // stride, 3))
        gr, gi, er, ei = kernels.sse_trajectory(
            p.gamma, p.omega, ur, ui, a, b, c2, s2, dt, noise,
            gr, gi, er, ei, stride, record,
        )
        if collect is not None:
            collect(record, done)
        done += m
    return gr, gi, er, ei


def simulate_cmu(p: AtomParams, upsilon: complex, cfg: SseConfig = None) -> CmuStats:
    """Time-averaged ensemble moments and E[|u|] for one unraveling,
    with block-averaged standard errors and decimated snapshots."""
    upsilon = _check_upsilon(upsilon)
    cfg = (cfg or SseConfig()).resolve(p)
    a, b, c2, s2 = _noise_shape(upsilon)
    ur, ui = upsilon.real, upsilon.imag
    rng = np.random.default_rng(cfg.seed)

    n_burn = int(round(cfg.burn_in / cfg.dt))
    n_stats = int(round(cfg.duration / cfg.dt))
    block_len = n_stats // cfg.n_blocks
    n_stats = block_len * cfg.n_blocks
    snap_stride = max(1, int(round(cfg.snapshot_interval / cfg.dt)))

    state = (1.0, 0.0, 0.0, 0.0)  # ground state
    state = _run_steps(p, a, b, c2, s2, ur, ui, cfg.dt, n_burn, state, rng, 1, None)

    sums = np.zeros((cfg.n_blocks, 6))  # v, v^2, w, w^2, |u|, count
    snapshots = []

    def collect(record, offset):
        steps = offset + np.arange(1, len(record) + 1)
        blocks = np.minimum((steps - 1) // block_len, cfg.n_blocks - 1)
        u, v, w = record[:, 0], record[:, 1], record[:, 2]
        data = np.stack([v, v**2, w, w**2, np.abs(u), np.ones_like(v)], axis=1)
        # steps are contiguous, so each block is a contiguous slice
        uniq, starts = np.unique(blocks, return_index=True)
        sums[uniq] += np.add.reduceat(data, starts, axis=0)
        take = steps % snap_stride == 0
        if take.any():
            snapshots.append(record[take])

    _run_steps(p, a, b, c2, s2, ur, ui, cfg.dt, n_stats, state, rng, 1, collect)

    count = sums[:, 5]
    total = sums.sum(axis=0)
    mean_v, mean_w = total[0] / total[5], total[2] / total[5]
    v_var = max(total[1] / total[5] - mean_v**2, 0.0)
    w_var = max(total[3] / total[5] - mean_w**2, 0.0)
    mean_abs_u = total[4] / total[5]

    bm_v = sums[:, 0] / count
    bm_w = sums[:, 2] / count
    block_stats = np.stack(
        [
            np.maximum(sums[:, 1] / count - bm_v**2, 0.0),
            np.maximum(sums[:, 3] / count - bm_w**2, 0.0),
            sums[:, 4] / count,
        ],
        axis=1,
    )
    se = block_stats.std(axis=0, ddof=1) / np.sqrt(cfg.n_blocks)

    bloch = np.concatenate(snapshots) if snapshots else np.empty((0, 3))
    norms = np.linalg.norm(bloch, axis=1, keepdims=True)
    states = np.array([pure_state_from_bloch(bv) for bv in bloch / norms])
    ensemble = Ensemble(states, np.full(len(states), 1.0 / len(states)))

    return CmuStats(
        upsilon=upsilon,
        moments=EnsembleMoments(v_var, w_var, mean_v, mean_w),
        v_var_err=float(se[0]),
        w_var_err=float(se[1]),
        mean_abs_u=mean_abs_u,
        mean_abs_u_err=float(se[2]),
        block_stats=block_stats,
        sampled_ensemble=ensemble,
    )


def cmu_checkpoint_means(
    p: AtomParams, upsilon: complex, b0, checkpoints, n_trajectories: int,
    dt: float, seed: int
):
    """Trajectory-averaged Bloch vector at the given times from the pure
    initial state b0.  Returns (means (k, 3), standard errors (k, 3))."""
    upsilon = _check_upsilon(upsilon)
    a, b, c2, s2 = _noise_shape(upsilon)
    psi0 = pure_state_from_bloch(b0)
    checkpoints = np.asarray(checkpoints, dtype=float)
    n_steps = int(round(checkpoints.max() / dt))
    idx = np.clip(np.round(checkpoints / dt).astype(int), 1, n_steps)
    rng = np.random.default_rng(seed)

    acc = np.zeros((len(checkpoints), 3))
    acc2 = np.zeros((len(checkpoints), 3))
    record = np.empty((n_steps, 3))
    for _ in range(n_trajectories):
        noise = rng.standard_normal(size=(n_steps, 2))
        kernels.sse_trajectory(
            p.gamma, p.omega, upsilon.real, upsilon.imag, a, b, c2, s2, dt, noise,
            psi0[0].real, psi0[0].imag, psi0[1].real, psi0[1].imag, 1, record,
        )
        vals = record[idx - 1]
        acc += vals
        acc2 += vals**2
    mean = acc / n_trajectories
    var = np.maximum(acc2 / n_trajectories - mean**2, 0.0)
    return mean, np.sqrt(var / n_trajectories)


@dataclass(frozen=True)
class SearchCell:
    upsilon: complex
    radius: float
    phase: float
    tau: float
    tau_err: float
    v_var: float
    w_var: float
    refined: bool = False


@dataclass(frozen=True)
class SearchResult:
    best: SearchCell
    real_axis_min: SearchCell
    cells: list
    radius_step: float
    phase_step: float
    separated: bool

    @property
    def resolution(self) -> float:
        """Linear size of a cell at the location of the maximum."""
        return float(
            np.hypot(self.radius_step, self.best.radius * self.phase_step)
        )


def default_workers() -> int:
    env = os.environ.get("UNRAVEL_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def _tau_with_error(p: AtomParams, stats: CmuStats):
    tau = survival_time(p, stats.moments)
    taus = [
        survival_time(p, EnsembleMoments(bv, bw))
        for bv, bw, _ in stats.block_stats
    ]
    err = float(np.std(taus, ddof=1) / np.sqrt(len(taus)))
    return tau, err


def mrcmu_search(
    p: AtomParams,
    cfg: SseConfig = None,
    n_radii: int = 9,
    n_phases: int = 16,
    refine: bool = True,
    workers: int = None,
) -> SearchResult:
    """Locate the most robust diffusive unraveling by maximizing the
    survival time over a polar grid on the unit disc, then refining
    around the best cell at half the spacing."""
    cfg = (cfg or SseConfig()).resolve(p)
    radii = np.linspace(0.0, 1.0, n_radii)
    phases = np.linspace(0.0, 2 * np.pi, n_phases, endpoint=False)
    dr = radii[1] - radii[0]
    dphi = phases[1] - phases[0]

    points = [(0.0, 0.0)] if radii[0] == 0.0 else []
    for r in radii[radii > 0]:
        points.extend((r, phi) for phi in phases)

    def evaluate(args):
        i, (r, phi) = args
        ups = r * np.exp(1j * phi) if r > 0 else 0j
        if abs(ups) > 1.0:
            ups /= abs(ups)
        stats = simulate_cmu(p, ups, replace(cfg, seed=cfg.seed + 1000 * i))
        tau, err = _tau_with_error(p, stats)
        return SearchCell(
            ups, r, phi, tau, err, stats.moments.v_var, stats.moments.w_var
        )

    with ThreadPoolExecutor(max_workers=workers or default_workers()) as pool:
        cells = list(pool.map(evaluate, enumerate(points)))

    best = max(cells, key=lambda c: c.tau)
    if refine:
        extra = []
        for ddr in (-0.5 * dr, 0.0, 0.5 * dr):
            for ddp in (-0.5 * dphi, 0.0, 0.5 * dphi):
                if ddr == 0.0 and ddp == 0.0:
                    continue
                r = min(max(best.radius + ddr, 0.0), 1.0)
                extra.append((r, best.phase + ddp))
        with ThreadPoolExecutor(max_workers=workers or default_workers()) as pool:
            refined = [
                replace(c, refined=True)
                for c in pool.map(
                    evaluate, ((len(points) + i, pt) for i, pt in enumerate(extra))
                )
            ]
        cells.extend(refined)
        best = max(cells, key=lambda c: c.tau)

    # Separation check against cells outside the best cell's neighborhood.
    cell_size = np.hypot(dr, max(best.radius, dr) * dphi)
    far = [c for c in cells if abs(c.upsilon - best.upsilon) > cell_size]
    separated = bool(
        far
        and best.tau - max(c.tau for c in far)
        > 2.0 * (best.tau_err + max(far, key=lambda c: c.tau).tau_err)
    )

    on_axis = [c for c in cells if abs(c.upsilon.imag) < 1e-12]
    real_axis_min = min(on_axis, key=lambda c: c.tau)

    return SearchResult(best, real_axis_min, cells, dr, dphi, separated)
