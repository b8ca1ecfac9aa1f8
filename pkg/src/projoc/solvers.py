"""
Best-approximation iterations for ``P_{A cap B}(0)``.

All four schemes alternate the box projection and the affine projection.
``Order.BOX_FIRST`` applies the box projection first, so every monitored
iterate satisfies ``|u_i| <= a``. ``Order.AFFINE_FIRST`` swaps the two
projections. Dykstra is the exception: its iteration is the same in both
orders, and only the returned sequence differs.

Every solver starts from ``u0 = 0`` unless told otherwise. It stops when
``max_i |u^{k+1}_i - u^k_i| <= epsilon`` on the driver sequence ``u^k``.
"""

from __future__ import annotations

import enum
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from projoc.problem import Grid, ProblemSpec, as_control
from projoc.projectors import AffineProjector, JacobianMode, ShootingConstants, project_B

logger = logging.getLogger(__name__)


class Method(enum.Enum):
    DYKSTRA = "dykstra"
    DR = "dr"
    AAC = "aac"
    MAP = "map"


class Order(enum.Enum):
    BOX_FIRST = "box-first"
    AFFINE_FIRST = "affine-first"


class RelaxationWarning(UserWarning):
    """AAC run with ``alpha = 1``, outside the range covered by convergence theory."""


@dataclass(frozen=True)
class SolverConfig:
    """Method choice, stopping rule and algorithm parameters.

    ``lam`` is required for DR only, ``alpha`` and ``beta`` for AAC only.
    ``alpha = 1`` is accepted with a :class:`RelaxationWarning`.
    """

    method: Method
    order: Order = Order.BOX_FIRST
    epsilon: float = 1e-8
    max_iter: int = 1_000_000
    lam: Optional[float] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None
    jacobian_mode: JacobianMode = JacobianMode.PAPER_CONTINUOUS
    record_shadow: bool = False

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "order", Order(self.order))
        object.__setattr__(self, "jacobian_mode", JacobianMode(self.jacobian_mode))
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if isinstance(self.max_iter, bool) or int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter!r}")
        object.__setattr__(self, "max_iter", int(self.max_iter))

        wants = {
            Method.DYKSTRA: set(),
            Method.MAP: set(),
            Method.DR: {"lam"},
            Method.AAC: {"alpha", "beta"},
        }[self.method]
        for name in ("lam", "alpha", "beta"):
            given = getattr(self, name) is not None
            if given and name not in wants:
                raise ValueError(f"parameter {name} does not apply to method {self.method.value}")
            if not given and name in wants:
                raise ValueError(f"method {self.method.value} requires parameter {name}")

        if self.lam is not None and not 0 < self.lam < 1:
            raise ValueError(f"lam must lie in (0, 1), got {self.lam!r}")
        if self.beta is not None and not 0 < self.beta < 1:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta!r}")
        if self.alpha is not None:
            if not 0 < self.alpha <= 1:
                raise ValueError(f"alpha must lie in (0, 1], got {self.alpha!r}")
            if self.alpha == 1:
                warnings.warn("alpha = 1 lies outside the convergence theory of AAC", RelaxationWarning, stacklevel=3)

    @property
    def params(self) -> dict:
        return {k: getattr(self, k) for k in ("lam", "alpha", "beta") if getattr(self, k) is not None}


@dataclass
class SolveReport:
    """Outcome of one solve.

    Attributes
    ----------
    control : ndarray
        The monitored iterate at termination.
    iterations : int
        Number of completed iterations.
    converged : bool
        Whether the stopping test passed before ``max_iter``.
    residuals : ndarray
        ``max_i |u^{k+1}_i - u^k_i|`` for each iteration.
    shadow : list of ndarray or None
        Monitored iterate of every iteration, if requested.
    multiplier : ShootingConstants or None
        Affine function ``c1 * t + c2`` whose clip to ``[-a, a]`` reproduces
        the limit control, recovered from the affine-projection constants.
        Its negative is the velocity adjoint. ``None`` for alternating
        projections, whose fixed points carry no multiplier information.
    """

    control: np.ndarray
    iterations: int
    converged: bool
    residuals: np.ndarray
    config: SolverConfig
    shadow: Optional[list] = None
    multiplier: Optional[ShootingConstants] = None

    @property
    def final_residual(self) -> float:
        return float(self.residuals[-1]) if len(self.residuals) else math.nan


Callback = Callable[[int, np.ndarray], None]


def _loop(step, u, cfg: SolverConfig, callback: Optional[Callback]):
    """Drive ``step`` until the residual test passes or ``max_iter`` is hit.

    ``step(u)`` returns ``(monitored, u_next)``.
    """
    residuals = []
    shadow = [] if cfg.record_shadow else None
    converged = False
    k = 0
    monitored = u
    while k < cfg.max_iter:
        monitored, u_next = step(u)
        res = float(np.max(np.abs(u_next - u)))
        residuals.append(res)
        k += 1
        if shadow is not None:
            shadow.append(monitored.copy())
        if callback is not None:
            callback(k - 1, monitored)
        u = u_next
        if not math.isfinite(res):
            logger.warning("%s: non-finite residual at iteration %d", cfg.method.value, k)
            break
        if res <= cfg.epsilon:
            converged = True
            break
    return monitored, k, converged, np.asarray(residuals), shadow


def _start(u0, grid: Grid) -> np.ndarray:
    if u0 is None:
        return np.zeros(grid.n)
    if np.isscalar(u0):
        return np.full(grid.n, float(u0))
    return as_control(u0, grid).copy()


def _check_method(cfg: SolverConfig, expected: Method):
    if cfg.method is not expected:
        raise ValueError(f"config is for {cfg.method.value}, not {expected.value}")


def dykstra_solve(spec: ProblemSpec, grid: Grid, cfg: SolverConfig, u0=None,
                  callback: Optional[Callback] = None) -> SolveReport:
    """Dykstra's algorithm with a correction sequence on the box only.

    The affine set needs no correction sequence. With ``BOX_FIRST`` the
    box-projected iterate is monitored and returned. With ``AFFINE_FIRST``
    the iteration is unchanged but the affine-projected iterate
    ``u^{k+1}`` is monitored and returned instead.
    """
    _check_method(cfg, Method.DYKSTRA)
    proj_a = AffineProjector(spec, grid, cfg.jacobian_mode)
    a = spec.a
    q = np.zeros(grid.n)
    # the box input u + q is the running sum of the affine corrections
    total = [0.0, 0.0]

    def step(u):
        nonlocal q
        u_box = project_B(u + q, a)
        u_aff, c = proj_a(u_box)
        q = u + q - u_box
        total[0] += c.c1
        total[1] += c.c2
        monitored = u_box if cfg.order is Order.BOX_FIRST else u_aff
        return monitored, u_aff

    control, k, ok, res, shadow = _loop(step, _start(u0, grid), cfg, callback)
    multiplier = None
    # the running sum is only affine when the start is
    if u0 is None or np.isscalar(u0):
        multiplier = ShootingConstants(total[0], total[1] + float(u0 or 0.0))
    return SolveReport(control, k, ok, res, cfg, shadow, multiplier)


def dr_solve(spec: ProblemSpec, grid: Grid, cfg: SolverConfig, u0=None,
             callback: Optional[Callback] = None) -> SolveReport:
    """Douglas--Rachford iteration for anchor ``z = 0``.

    ``BOX_FIRST``::

        u~ = P_B(lam * u);  u^ = P_A(2 u~ - u);  u <- u + u^ - u~

    ``AFFINE_FIRST`` swaps ``P_A`` and ``P_B``. The shadow ``u~`` is returned.
    """
    _check_method(cfg, Method.DR)
    proj_a = AffineProjector(spec, grid, cfg.jacobian_mode)
    a, lam = spec.a, cfg.lam
    last = [ShootingConstants(0.0, 0.0)]

    if cfg.order is Order.BOX_FIRST:
        def step(u):
            u_first = project_B(lam * u, a)
            u_second, last[0] = proj_a(2.0 * u_first - u)
            return u_first, u + u_second - u_first
    else:
        def step(u):
            u_first, last[0] = proj_a(lam * u)
            u_second = project_B(2.0 * u_first - u, a)
            return u_first, u + u_second - u_first

    control, k, ok, res, shadow = _loop(step, _start(u0, grid), cfg, callback)
    # on free nodes of a fixed point: u~ = lam / (1 - lam) * (c1 t + c2)
    c = last[0]
    scale = lam / (1.0 - lam) if cfg.order is Order.BOX_FIRST else 1.0 / (1.0 - lam)
    return SolveReport(control, k, ok, res, cfg, shadow, ShootingConstants(scale * c.c1, scale * c.c2))


def aac_solve(spec: ProblemSpec, grid: Grid, cfg: SolverConfig, u0=None,
              callback: Optional[Callback] = None) -> SolveReport:
    """Aragón Artacho--Campoy iteration for anchor ``z = 0``.

    ``BOX_FIRST``::

        u~ = P_B(u);  u^ = P_A(2 beta u~ - u);  u <- u + 2 alpha beta (u^ - u~)

    ``AFFINE_FIRST`` swaps ``P_A`` and ``P_B``. The shadow ``u~`` is returned.
    """
    _check_method(cfg, Method.AAC)
    proj_a = AffineProjector(spec, grid, cfg.jacobian_mode)
    a, alpha, beta = spec.a, cfg.alpha, cfg.beta
    relax = 2.0 * alpha * beta
    last = [ShootingConstants(0.0, 0.0)]

    if cfg.order is Order.BOX_FIRST:
        def step(u):
            u_first = project_B(u, a)
            u_second, last[0] = proj_a(2.0 * beta * u_first - u)
            return u_first, u + relax * (u_second - u_first)
    else:
        def step(u):
            u_first, last[0] = proj_a(u)
            u_second = project_B(2.0 * beta * u_first - u, a)
            return u_first, u + relax * (u_second - u_first)

    control, k, ok, res, shadow = _loop(step, _start(u0, grid), cfg, callback)
    # both orders: u~ = (c1 t + c2) / (2 - 2 beta) on free nodes
    c = last[0]
    scale = 1.0 / (2.0 - 2.0 * beta)
    return SolveReport(control, k, ok, res, cfg, shadow, ShootingConstants(scale * c.c1, scale * c.c2))


def map_solve(spec: ProblemSpec, grid: Grid, cfg: SolverConfig, u0=None,
              callback: Optional[Callback] = None) -> SolveReport:
    """Plain alternating projections, ``u <- P_A(P_B(u))`` or ``P_B(P_A(u))``.

    Returns the inner projection of the last iteration.
    """
    _check_method(cfg, Method.MAP)
    proj_a = AffineProjector(spec, grid, cfg.jacobian_mode)
    a = spec.a

    if cfg.order is Order.BOX_FIRST:
        def step(u):
            inner = project_B(u, a)
            return inner, proj_a(inner)[0]
    else:
        def step(u):
            inner = proj_a(u)[0]
            return inner, project_B(inner, a)

    control, k, ok, res, shadow = _loop(step, _start(u0, grid), cfg, callback)
    return SolveReport(control, k, ok, res, cfg, shadow)


_SOLVERS = {
    Method.DYKSTRA: dykstra_solve,
    Method.DR: dr_solve,
    Method.AAC: aac_solve,
    Method.MAP: map_solve,
}


def solve(spec: ProblemSpec, grid: Grid, cfg: SolverConfig, u0=None,
          callback: Optional[Callback] = None) -> SolveReport:
    """Dispatch to the solver named by ``cfg.method``."""
    return _SOLVERS[cfg.method](spec, grid, cfg, u0=u0, callback=callback)
