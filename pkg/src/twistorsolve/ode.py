"""Thin wrapper over scipy's embedded Runge-Kutta integrators for complex states."""
from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp

from . import constants
from .errors import ODEStepFailure


def integrate(fun, span, y0, rtol: float = constants.ODE_RTOL, atol: float = constants.ODE_ATOL,
              dense: bool = False, method: str = "DOP853"):
    """Integrate ``y' = fun(s, y)`` over ``span`` with a complex state.

    Returns the scipy result; raises :class:`ODEStepFailure` if the integrator stops early.
    """
    y0 = np.atleast_1d(np.asarray(y0, dtype=complex))
    sol = solve_ivp(fun, span, y0, method=method, rtol=rtol, atol=atol, dense_output=dense)
    if sol.status != 0:
        raise ODEStepFailure(sol.message)
    return sol


def endpoint(fun, span, y0, **kwargs) -> np.ndarray:
    return integrate(fun, span, y0, **kwargs).y[:, -1]
