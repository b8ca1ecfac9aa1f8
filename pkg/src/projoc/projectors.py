"""
Projections onto the two constraint sets.

``project_B`` clips to the box ``[-a, a]``. ``project_A`` corrects a control
by an affine function ``c1 * t + c2`` so that the Euler-integrated states
hit the terminal conditions, with ``(c1, c2)`` from a single shooting
(Newton) step. Two Jacobians are available for that step:

``JacobianMode.PAPER_CONTINUOUS``
    the closed-form inverse ``[[-12, 6], [6, -2]]`` of the continuous-time
    sensitivities. Applied to Euler terminal states this leaves an O(h)
    boundary miss.
``JacobianMode.EXACT_DISCRETE``
    the Euler sensitivities themselves, obtained by integrating the
    variational recursions. The result is then the exact orthogonal
    projection onto the discretized affine set.
"""

from __future__ import annotations

import enum
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from projoc.dynamics import _integrate
from projoc.problem import Grid, ProblemSpec, as_control


class ShootingConstants(NamedTuple):
    c1: float
    c2: float


class JacobianMode(enum.Enum):
    PAPER_CONTINUOUS = "paper"
    EXACT_DISCRETE = "exact"


# inverse of [[1/6, 1/2], [1/2, 1]], the continuous sensitivity d z(1) / d c
CONTINUOUS_JACOBIAN_INV = np.array([[-12.0, 6.0], [6.0, -2.0]])


def near_miss(c, u, spec: ProblemSpec, grid: Grid) -> tuple[float, float]:
    """Terminal boundary residual of ``u + c1 * t + c2``.

    Returns ``(x1[n] - sf, x2[n] - vf)`` after Euler integration from
    ``(s0, v0)``.
    """
    u = as_control(u, grid)
    c1, c2 = c
    traj = _integrate(u + c1 * grid.control_times + c2, spec.s0, spec.v0, grid.h)
    return float(traj.x1[-1] - spec.sf), float(traj.x2[-1] - spec.vf)


def discrete_jacobian(grid: Grid) -> np.ndarray:
    """Euler sensitivities of the terminal state with respect to ``(c1, c2)``.

    Column ``j`` is the terminal state of the variational recursion driven
    by ``t_i`` (for ``c1``) or by ``1`` (for ``c2``) from zero initial state.
    """
    t = grid.control_times
    d1 = _integrate(t, 0.0, 0.0, grid.h)
    d2 = _integrate(np.ones(grid.n), 0.0, 0.0, grid.h)
    return np.array([[d1.x1[-1], d2.x1[-1]], [d1.x2[-1], d2.x2[-1]]])


class AffineProjector:
    """Projection onto the affine dynamics set for a fixed instance and grid.

    Precomputes the node times and the inverse Jacobian so repeated calls
    cost one Euler sweep each.
    """

    def __init__(self, spec: ProblemSpec, grid: Grid, mode: JacobianMode = JacobianMode.PAPER_CONTINUOUS):
        self.spec = spec
        self.grid = grid
        self.mode = JacobianMode(mode)
        self.t = grid.control_times
        if self.mode is JacobianMode.PAPER_CONTINUOUS:
            self.jac_inv = CONTINUOUS_JACOBIAN_INV
        else:
            if grid.n < 2:
                raise ValueError("exact discrete shooting needs at least 2 subintervals")
            jac = discrete_jacobian(grid)
            # det = -(1 - h^2) / 12, nonzero for n >= 2
            assert abs(np.linalg.det(jac)) > 0.0, "singular shooting Jacobian"
            self.jac_inv = np.linalg.inv(jac)

    def constants(self, u_minus: np.ndarray) -> ShootingConstants:
        spec = self.spec
        traj = _integrate(u_minus, spec.s0, spec.v0, self.grid.h)
        phi = np.array([traj.x1[-1] - spec.sf, traj.x2[-1] - spec.vf])
        c = -self.jac_inv @ phi
        return ShootingConstants(float(c[0]), float(c[1]))

    def __call__(self, u_minus) -> tuple[np.ndarray, ShootingConstants]:
        u_minus = as_control(u_minus, self.grid)
        c = self.constants(u_minus)
        return u_minus + c.c1 * self.t + c.c2, c


@lru_cache(maxsize=32)
def _projector(spec: ProblemSpec, grid: Grid, mode: JacobianMode) -> AffineProjector:
    return AffineProjector(spec, grid, mode)


def project_A(u_minus, spec: ProblemSpec, grid: Grid,
              mode: JacobianMode = JacobianMode.PAPER_CONTINUOUS) -> tuple[np.ndarray, ShootingConstants]:
    """Project a control onto the dynamics set.

    Returns the projected control ``u_minus + c1 * t + c2`` and the
    shooting constants ``(c1, c2)``.
    """
    return _projector(spec, grid, JacobianMode(mode))(u_minus)


def project_B(u_minus, a: float) -> np.ndarray:
    """Clip a control componentwise to ``[-a, a]``."""
    if not a > 0:
        raise ValueError(f"control bound must be positive, got {a!r}")
    return np.clip(as_control(u_minus), -a, a)
