"""Forward Euler integration of the double integrator ``x1' = x2, x2' = u``."""

from __future__ import annotations

import numpy as np

from projoc.problem import Grid, ProblemSpec, StateTrajectory, as_control


def euler_integrate(u, spec: ProblemSpec, grid: Grid) -> StateTrajectory:
    """Integrate a sampled control from ``(s0, v0)`` with explicit Euler.

    The control is held at the left endpoint of each subinterval::

        x1[i+1] = x1[i] + h * x2[i]
        x2[i+1] = x2[i] + h * u[i]

    Parameters
    ----------
    u : array_like
        Control samples, length ``grid.n``.
    spec : ProblemSpec
        Supplies the initial position ``s0`` and velocity ``v0``.
    grid : Grid

    Returns
    -------
    StateTrajectory
        Position and velocity on all ``grid.n + 1`` nodes.
    """
    u = as_control(u, grid)
    return _integrate(u, spec.s0, spec.v0, grid.h)


def _integrate(u: np.ndarray, s0: float, v0: float, h: float) -> StateTrajectory:
    # cumsum over [x0, h*incr...] reproduces the sequential recursion exactly
    x2 = np.empty(len(u) + 1)
    x2[0] = v0
    x2[1:] = h * u
    np.cumsum(x2, out=x2)
    x1 = np.empty(len(u) + 1)
    x1[0] = s0
    x1[1:] = h * x2[:-1]
    np.cumsum(x1, out=x1)
    return StateTrajectory(x1, x2)

