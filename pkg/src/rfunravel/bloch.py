"""Two-level atom model: parameters, Bloch-vector algebra and the analytic
solution of the resonance-fluorescence master equation.

The atom decays at rate ``gamma`` and is driven on resonance with Rabi
frequency ``omega`` (Hamiltonian (omega/2) sigma_x in the interaction
picture).  States are handled either as two complex amplitudes
``(c_g, c_e)`` or as a real Bloch vector ``(x, y, z)``.

The Bloch equations of motion are

    dx/dt = -(gamma/2) x
    dy/dt = -(gamma/2) y - omega z
    dz/dt =  omega y - gamma (1 + z)

and the propagator is evaluated in closed form.  All trigonometric
factors are computed in complex arithmetic with the modified Rabi
frequency ``sqrt(omega**2 - (gamma/4)**2)``, so the overdamped and
underdamped regimes share one code path; the result is real by
conjugate-pair cancellation and the imaginary residue is discarded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS_NORM = 1e-9  # tolerance for Bloch-norm invariants


@dataclass(frozen=True)
class AtomParams:
    """Decay rate and Rabi frequency, both in the same inverse-time units."""

    gamma: float
    omega: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.omega < 0:
            raise ValueError(f"omega must be nonnegative, got {self.omega}")

    @property
    def omega_tilde(self) -> complex:
        """Damping-shifted Rabi frequency of the y-z Bloch block.

        Real for omega > gamma/4, imaginary below; complex sqrt keeps a
        single expression.
        """
        return np.sqrt(complex(self.omega**2 - (self.gamma / 4) ** 2))

    @property
    def omega_check(self) -> complex:
        """Damping-shifted Rabi frequency of the no-detection evolution
        (real for omega > gamma/2)."""
        return np.sqrt(complex(self.omega**2 - (self.gamma / 2) ** 2))


def steady_state(p: AtomParams) -> np.ndarray:
    """Stationary Bloch vector of the master equation."""
    d = p.gamma**2 + 2 * p.omega**2
    return np.array([0.0, 2 * p.gamma * p.omega / d, -p.gamma**2 / d])


def me_rhs(p: AtomParams, b) -> np.ndarray:
    """Time derivative of the Bloch vector under the master equation.

    Vanishes exactly at ``steady_state(p)``.
    """
    x, y, z = np.asarray(b, dtype=float)
    return np.array(
        [
            -0.5 * p.gamma * x,
            -0.5 * p.gamma * y - p.omega * z,
            p.omega * y - p.gamma * (1.0 + z),
        ]
    )


def sinc_scaled(a: complex, t) -> np.ndarray | complex:
    """sin(a*t)/a with a Taylor guard for |a*t| < 1e-4.

    Removes the 0/0 at the degeneracy a -> 0 without branching on the
    physics (a may be real, imaginary or zero).
    """
    t = np.asarray(t, dtype=float)
    at = a * t
    small = np.abs(at) < 1e-4
    # Guarded denominator; the small branch uses the Taylor series instead.
    safe = np.where(small, 1.0, a)
    return np.where(small, t * (1.0 - at * at / 6.0), np.sin(at) / safe)


def bloch_evolve(p: AtomParams, b0, t) -> np.ndarray:
    """Propagate a Bloch vector for time t under the master equation.

    ``t`` may be a scalar or an array; the result has shape ``(..., 3)``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("propagation time must be nonnegative")
    u, v, w = np.asarray(b0, dtype=float)
    b_ss = steady_state(p)
    dv = v - b_ss[1]
    dw = w - b_ss[2]

    # The y-z block is -(3 gamma/4) I + N with N*N = -omega_tilde^2 I,
    # so exp = e^{-3 gamma t/4} (cos(omega_tilde t) I + sinc * N).
    ot = p.omega_tilde
    env = np.exp(-0.75 * p.gamma * t)
    cos_t = np.cos(ot * t)
    sinc_t = sinc_scaled(ot, t)
    g4 = p.gamma / 4.0
    y = b_ss[1] + env * (cos_t * dv + sinc_t * (g4 * dv - p.omega * dw))
    z = b_ss[2] + env * (cos_t * dw + sinc_t * (p.omega * dv - g4 * dw))
    x = u * np.exp(-0.5 * p.gamma * t)

    out = np.stack(
        [np.broadcast_to(x, t.shape), np.real(y), np.real(z)], axis=-1
    ).astype(float)
    if t.ndim == 0:
        return out.reshape(3)
    return out


def purity(b) -> float:
    """Tr[rho^2] of the state with Bloch vector b; in [1/2, 1]."""
    b = np.asarray(b, dtype=float)
    return 0.5 * (1.0 + np.dot(b, b))


def bloch_from_pure_state(psi) -> np.ndarray:
    """Bloch vector of a (normalized) amplitude pair ``(c_g, c_e)``."""
    cg, ce = np.asarray(psi, dtype=complex)
    q = np.conj(cg) * ce
    return np.array([2 * q.real, -2 * q.imag, abs(ce) ** 2 - abs(cg) ** 2])


def pure_state_from_bloch(b) -> np.ndarray:
    """Amplitude pair ``(c_g, c_e)`` for a unit Bloch vector.

    Global phase fixed by taking c_e real and nonnegative (c_g real
    positive at the south pole).
    """
    x, y, z = np.asarray(b, dtype=float)
    n = np.sqrt(x * x + y * y + z * z)
    if abs(n - 1.0) > 1e-6:
        raise ValueError(f"not a pure state: |b| = {n}")
    ce = np.sqrt(max((1.0 + z) / 2.0, 0.0))
    if ce < 1e-12:
        return np.array([1.0 + 0j, 0j])
    cg = (x + 1j * y) / (2 * ce)
    psi = np.array([cg, ce], dtype=complex)
    return psi / np.linalg.norm(psi)
