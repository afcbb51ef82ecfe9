"""Adaptive integration of complex ODEs along a straight parameter path.

Stepping is delegated to scipy's DOP853 (explicit Runge-Kutta 8(5,3)).  A
right-hand side that raises NearSingularity is reported to the stepper as
NaN, which makes it reject the step and shrink; if the step size collapses
the failure is re-raised as SingularityOnPath or StepSizeUnderflow.
"""
from __future__ import annotations

import numpy as np
from scipy.integrate import DOP853

from .errors import NearSingularity, SingularityOnPath, StepSizeUnderflow


def integrate_path(rhs, y0: np.ndarray, path, callback=None,
                   t0: float = 0.0, t1: float = 1.0) -> np.ndarray:
    """Integrate ``dy/dt = rhs(t, y)`` from ``t0`` to ``t1`` (path parameter).

    ``path`` supplies ``abs_tol``, ``rel_tol``, ``max_step`` (in units of the
    moving coordinate) and ``delta`` (the path displacement).
    """
    y0 = np.asarray(y0, dtype=complex)
    length = abs(path.delta) * abs(t1 - t0)
    if length == 0:
        return y0.copy()
    last_error: list[Exception] = []

    def fun(t, y):
        try:
            return rhs(t, y)
        except NearSingularity as exc:
            last_error.append(exc)
            return np.full_like(y, np.nan)

    max_step = abs(t1 - t0) * min(1.0, path.max_step / length)
    solver = DOP853(fun, t0, y0, t1, max_step=max_step,
                    rtol=path.rel_tol, atol=path.abs_tol)
    while solver.status == "running":
        msg = solver.step()
        if solver.status == "failed":
            if last_error:
                raise SingularityOnPath(f"singularity near t={solver.t}: {last_error[-1]}")
            raise StepSizeUnderflow(f"step size collapsed near t={solver.t}: {msg}")
        if not np.all(np.isfinite(solver.y)):
            raise SingularityOnPath(f"non-finite state near t={solver.t}")
        if callback is not None:
            callback(solver.t, solver.y)
    return np.array(solver.y, dtype=complex)
