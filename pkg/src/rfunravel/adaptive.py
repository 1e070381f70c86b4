"""The maximally robust unraveling: its two-member stationary ensemble,
the closed-form survival probability, and a simulator of the adaptive
interferometric detection scheme that realizes it.

The detected field is proportional to sigma + mu(t) with a weak local
oscillator mu = +/- 1/2 whose sign flips on every detection.  The
corresponding jump operator is sqrt(gamma) (sigma + mu); the no-jump
drift is fixed by requiring that jumps plus drift average back to the
master equation, giving

    -iH - (gamma/2) sigma^dag sigma - gamma mu sigma - (gamma/2) mu^2.

At steady state the atom alternates between two fixed pure states with
Bloch vectors (+-u0, y_ss, z_ss), u0 = sqrt(1 - y_ss^2 - z_ss^2), and
the detection rate is gamma/4 regardless of which state it occupies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .bloch import AtomParams, steady_state
from .errors import ConvergenceError, DegenerateStateError
from .survival import Ensemble, EnsembleMoments, ensemble_survival

_CHUNK = 2_000_000


def mru_bloch_pair(p: AtomParams) -> np.ndarray:
    """Bloch vectors of the two robust-ensemble members, shape (2, 3)."""
    if p.omega == 0:
        raise DegenerateStateError("two-member ensemble degenerates at omega = 0")
    b_ss = steady_state(p)
    u0 = np.sqrt(1.0 - b_ss[1] ** 2 - b_ss[2] ** 2)
    return np.array([[u0, b_ss[1], b_ss[2]], [-u0, b_ss[1], b_ss[2]]])


def mru_ensemble(p: AtomParams) -> Ensemble:
    """The maximally robust ensemble: two equally weighted pure states."""
    return Ensemble.from_bloch(mru_bloch_pair(p), np.array([0.5, 0.5]))


def mru_survival(p: AtomParams, t):
    """Closed-form maximum ensemble survival probability (V_v = V_w = 0)."""
    return ensemble_survival(p, EnsembleMoments(0.0, 0.0), t)


@dataclass(frozen=True)
class AdaptiveRecord:
    """One adaptive-detection trajectory.

    snapshots holds (u, v, w, mu) sampled every ``record_interval``;
    jump_times are the detection times.  Post-transient statistics and
    the observed mu / projector pairing are exposed as properties.
    """

    params: AtomParams
    dt: float
    duration: float
    transient: float
    record_interval: float
    snapshot_times: np.ndarray
    snapshots: np.ndarray  # (n, 4)
    jump_times: np.ndarray

    def _post(self):
        return self.snapshots[self.snapshot_times >= self.transient]

    @property
    def detection_rate(self) -> float:
        n = np.count_nonzero(self.jump_times >= self.transient)
        return n / (self.duration - self.transient)

    @property
    def n_jumps_post_transient(self) -> int:
        return int(np.count_nonzero(self.jump_times >= self.transient))

    @property
    def occupation_plus(self) -> float:
        """Fraction of post-transient time spent on the u > 0 member."""
        post = self._post()
        return float(np.mean(post[:, 0] > 0))

    @property
    def lock_error(self) -> float:
        """Largest post-transient Bloch distance to the nearer of the two
        fixed states."""
        post = self._post()[:, :3]
        pair = mru_bloch_pair(self.params)
        d = np.minimum(
            np.linalg.norm(post - pair[0], axis=1),
            np.linalg.norm(post - pair[1], axis=1),
        )
        return float(d.max()) if len(d) else np.inf

    @property
    def mu_pairing(self) -> dict:
        """Observed local-oscillator sign while occupying each member."""
        post = self._post()
        plus = post[post[:, 0] > 0]
        minus = post[post[:, 0] <= 0]
        return {
            "u_positive_mean_mu": float(plus[:, 3].mean()) if len(plus) else np.nan,
            "u_negative_mean_mu": float(minus[:, 3].mean()) if len(minus) else np.nan,
        }


def simulate_adaptive(
    p: AtomParams,
    duration: float,
    dt: float,
    seed: int,
    transient: float = None,
    record_interval: float = None,
    check_lock: bool = True,
) -> AdaptiveRecord:
    """Quantum-jump simulation of the adaptive scheme from the ground
    state, with mu starting at +1/2."""
    if duration <= 0:
        raise ValueError("duration must be positive")
    dt_max = 0.01 * min(1.0 / p.gamma, 1.0 / p.omega if p.omega > 0 else np.inf)
    if dt > dt_max * (1 + 1e-12):
        raise ValueError(f"dt = {dt} too large; need dt <= {dt_max}")
    if transient is None:
        transient = 20.0 / p.gamma
    if record_interval is None:
        record_interval = 0.1 / p.gamma

    n_steps = int(round(duration / dt))
    stride = max(1, int(round(record_interval / dt)))
    rng = np.random.default_rng(seed)

    gr, gi, er, ei = 1.0, 0.0, 0.0, 0.0
    mu = 0.5
    snaps = []
    snap_steps = []
    jump_steps = []
    done = 0
    while done < n_steps:
        m = min(_CHUNK, n_steps - done)
        # align chunk ends with the record stride
        m -= m % stride
        if m == 0:
            m = n_steps - done
        uniforms = rng.uniform(size=m)
        record = np.empty((m // stride, 4))
        jbuf = np.empty(m, dtype=np.int64)
        nj, gr, gi, er, ei, mu = kernels.adaptive_trajectory(
            p.gamma, p.omega, dt, uniforms, gr, gi, er, ei, mu, stride, record, jbuf
        )
        snaps.append(record)
        snap_steps.append(done + stride * (1 + np.arange(m // stride)))
        jump_steps.append(done + jbuf[:nj])
        done += m

    snapshots = np.concatenate(snaps) if snaps else np.empty((0, 4))
    snap_times = np.concatenate(snap_steps) * dt if snap_steps else np.empty(0)
    jump_times = np.concatenate(jump_steps) * dt if jump_steps else np.empty(0)

    rec = AdaptiveRecord(
        p, dt, duration, transient, record_interval, snap_times, snapshots, jump_times
    )
    if check_lock and duration > transient and rec.lock_error > 1e-3:
        raise ConvergenceError(
            f"adaptive trajectory failed to lock onto the two-state cycle "
            f"(post-transient Bloch error {rec.lock_error:.2e})"
        )
    return rec


def adaptive_checkpoint_means(
    p: AtomParams, checkpoints, n_trajectories: int, dt: float, seed: int
):
    """Trajectory-averaged Bloch vector at the given times, starting from
    the ground state.  Returns (means (k, 3), standard errors (k, 3))."""
    checkpoints = np.asarray(checkpoints, dtype=float)
    t_end = checkpoints.max()
    n_steps = int(round(t_end / dt))
    idx = np.clip(np.round(checkpoints / dt).astype(int), 1, n_steps)
    rng = np.random.default_rng(seed)

    acc = np.zeros((len(checkpoints), 3))
    acc2 = np.zeros((len(checkpoints), 3))
    record = np.empty((n_steps, 4))
    jbuf = np.empty(n_steps, dtype=np.int64)
    for _ in range(n_trajectories):
        uniforms = rng.uniform(size=n_steps)
        kernels.adaptive_trajectory(
            p.gamma, p.omega, dt, uniforms, 1.0, 0.0, 0.0, 0.0, 0.5, 1, record, jbuf
        )
        vals = record[idx - 1, :3]
        acc += vals
        acc2 += vals**2
    mean = acc / n_trajectories
    var = np.maximum(acc2 / n_trajectories - mean**2, 0.0)
    return mean, np.sqrt(var / n_trajectories)
