"""Robust unravelings of the resonance-fluorescence master equation.

Survival probabilities and survival times of stationary pure-state
ensembles under three monitoring schemes (direct photodetection,
adaptive interferometric detection, diffusive homodyne-type
unravelings), a search for the most robust diffusive unraveling, and an
operational distance between ensembles.
"""

from .adaptive import (
    AdaptiveRecord,
    mru_bloch_pair,
    mru_ensemble,
    mru_survival,
    simulate_adaptive,
)
from .bloch import (
    AtomParams,
    bloch_evolve,
    bloch_from_pure_state,
    me_rhs,
    pure_state_from_bloch,
    purity,
    steady_state,
)
from .diffusive import (
    CmuStats,
    SearchResult,
    SseConfig,
    mrcmu_search,
    sample_noise,
    simulate_cmu,
    sse_step,
)
from .direct import (
    DirectEnsembleGrid,
    build_direct_grid,
    direct_moments,
    no_jump_amplitudes,
    p0,
    reconstruct_rho,
    sample_direct_ensemble,
    simulate_direct,
    stationary_weight,
)
from .errors import ConvergenceError, DegenerateStateError
from .kernels import BACKEND
from .metrics import (
    DistanceReport,
    distance_general,
    distance_to_mru,
    duplicated_mru_reference,
    error_probability,
)
from .survival import (
    Ensemble,
    EnsembleMoments,
    SurvivalCurve,
    ensemble_survival,
    f_pair,
    moments_from_ensemble,
    state_survival,
    survival_curve,
    survival_time,
)

__version__ = "0.1.0"
