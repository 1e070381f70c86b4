"""Trajectory-kernel backend selection.

Prefers the compiled extension; falls back to the pure-Python mirror
when the extension was not built.  ``BACKEND`` names the active one.
"""

try:
    from ._sse import adaptive_trajectory, sse_trajectory

    BACKEND = "compiled"
except ImportError:  # extension not built
    from ._pyref import adaptive_trajectory, sse_trajectory

    BACKEND = "python"

__all__ = ["sse_trajectory", "adaptive_trajectory", "BACKEND"]
