"""Operational distance between pure-state ensembles representing the
same density matrix.

The raw figure is the minimum average error probability of an
impersonation strategy matching the candidate ensemble one-to-one onto
the reference ensemble; it is normalized by 1 - Tr[rho^2] (the error of
a strategy that ignores the states entirely), giving a directional
distance in [0, 1].  For the two-member robust ensemble the optimum
strategy is matching on the sign of the sigma_x component, which yields
the closed form 1 - E[|u|] / sqrt(1 - y_ss^2 - z_ss^2).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .bloch import AtomParams, purity, steady_state
from .survival import Ensemble


@dataclass(frozen=True)
class DistanceReport:
    distance: float
    epsilon_opt: float
    matching: np.ndarray  # matching[mu] = index of the claimed reference member
    stat_error: float = None


def error_probability(reference, candidate) -> float:
    """Probability that the candidate fails the projective check "is it
    the reference state?" -- both given as unit Bloch vectors."""
    reference = np.asarray(reference, dtype=float)
    candidate = np.asarray(candidate, dtype=float)
    for b in (reference, candidate):
        if abs(np.linalg.norm(b) - 1.0) > 1e-6:
            raise ValueError("error_probability requires pure states")
    return 1.0 - 0.5 * (1.0 + reference @ candidate)


def distance_general(ref: Ensemble, cand: Ensemble, rho) -> DistanceReport:
    """Normalized minimal error probability from the candidate ensemble
    to the reference ensemble, via an optimal N-to-N assignment.

    Both ensembles must have N equal weights (replicate members to
    equalize sizes) and average to the state rho.
    """
    if len(ref) != len(cand):
        raise ValueError("ensembles must have equal sizes")
    n = len(ref)
    if np.ptp(ref.weights) > 1e-12 or np.ptp(cand.weights) > 1e-12:
        raise ValueError("ensembles must be equally weighted")
    rho = np.asarray(rho, dtype=float)
    mixedness = 1.0 - purity(rho)
    if mixedness <= 0:
        raise ValueError("rho must be mixed (normalization divides by 1 - Tr[rho^2])")

    fid = 0.5 * (1.0 + ref.bloch() @ cand.bloch().T)  # fid[k, mu]
    rows, cols = linear_sum_assignment(fid, maximize=True)
    matching = np.empty(n, dtype=int)
    matching[cols] = rows
    fidelities = fid[rows, cols]
    eps_opt = 1.0 - fidelities.mean()
    per_state_err = 1.0 - fidelities
    stat_error = float(per_state_err.std(ddof=1) / np.sqrt(n) / mixedness) if n > 1 else None
    return DistanceReport(
        distance=eps_opt / mixedness,
        epsilon_opt=float(eps_opt),
        matching=matching,
        stat_error=stat_error,
    )


def distance_to_mru(p: AtomParams, mean_abs_u: float) -> float:
    """Closed-form distance from the two-member robust ensemble to any
    u -> -u symmetric stationary ensemble with the given E[|u|]."""
    b_ss = steady_state(p)
    u0 = np.sqrt(1.0 - b_ss[1] ** 2 - b_ss[2] ** 2)
    if mean_abs_u < 0 or mean_abs_u > u0 + 1e-6:
        raise ValueError(f"E[|u|] = {mean_abs_u} outside [0, {u0}]")
    d = 1.0 - mean_abs_u / u0
    if d < 0:
        warnings.warn("sampling noise pushed the distance below 0; clamping", stacklevel=2)
        d = 0.0
    return d


def duplicated_mru_reference(p: AtomParams, n: int) -> Ensemble:
    """The two robust-ensemble members replicated to n equal-weight
    entries (n even), for use as the reference in distance_general."""
    from .adaptive import mru_bloch_pair

    if n % 2:
        raise ValueError("n must be even to split the two members equally")
    pair = mru_bloch_pair(p)
    bloch = np.repeat(pair, n // 2, axis=0)
    return Ensemble.from_bloch(bloch)
