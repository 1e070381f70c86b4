"""Exceptions shared across the package."""


class DegenerateStateError(ValueError):
    """Raised when an operation requires a mixed stationary state but the
    atom is undriven (the stationary state is the pure ground state)."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative or stochastic procedure fails to converge
    within its configured horizon."""
