"""
Core domain types: the problem instance, the uniform time grid, state
trajectories, and the discrete norms used by the solvers.

Controls are plain 1-D ``numpy`` arrays of length ``grid.n`` holding the
samples ``u_i ~ u(t_i)`` at left endpoints ``t_0, ..., t_{n-1}``. States
live on all ``n + 1`` nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ProblemSpec:
    """Boundary conditions and control bound of one problem instance.

    Parameters
    ----------
    s0, sf : float
        Position at ``t = 0`` and ``t = 1``.
    v0, vf : float
        Velocity at ``t = 0`` and ``t = 1``.
    a : float
        Bound on the control magnitude, ``|u(t)| <= a``. Must be positive.
    """

    s0: float = 0.0
    sf: float = 0.0
    v0: float = 1.0
    vf: float = 0.0
    a: float = 2.5

    def __post_init__(self):
        for name in ("s0", "sf", "v0", "vf", "a"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if not self.a > 0:
            raise ValueError(f"control bound a must be positive, got {self.a!r}")

    def with_bound(self, a: float) -> "ProblemSpec":
        return ProblemSpec(self.s0, self.sf, self.v0, self.vf, a)

    def as_dict(self) -> dict:
        return {"s0": self.s0, "sf": self.sf, "v0": self.v0, "vf": self.vf, "a": self.a}


@dataclass(frozen=True)
class Grid:
    """Uniform partition ``0 = t_0 < t_1 < ... < t_n = 1`` with ``h = 1/n``."""

    n: int
    h: float = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ValueError(f"number of subintervals must be a positive integer, got {self.n!r}")
        n = int(self.n)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "h", 1.0 / n)
        # i / n rather than i * h keeps t_n == 1 exactly
        nodes = np.arange(n + 1, dtype=float) / n
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def control_times(self) -> np.ndarray:
        """Left endpoints ``t_0, ..., t_{n-1}`` where control samples live."""
        return self.nodes[:-1]


@dataclass(frozen=True)
class StateTrajectory:
    """Discrete position ``x1`` and velocity ``x2`` on all ``n + 1`` nodes."""

    x1: np.ndarray
    x2: np.ndarray

    def __post_init__(self):
        x1 = np.asarray(self.x1, dtype=float)
        x2 = np.asarray(self.x2, dtype=float)
        if x1.ndim != 1 or x1.shape != x2.shape:
            raise ValueError(f"state arrays must be 1-D of equal length, got {x1.shape} and {x2.shape}")
        object.__setattr__(self, "x1", x1)
        object.__setattr__(self, "x2", x2)

    @property
    def n(self) -> int:
        return len(self.x1) - 1

    @property
    def terminal(self) -> tuple[float, float]:
        return float(self.x1[-1]), float(self.x2[-1])


def as_control(u, grid: Grid | None = None) -> np.ndarray:
    """Coerce ``u`` to a 1-D float array, checking its length against ``grid``."""
    u = np.asarray(u, dtype=float)
    if u.ndim != 1:
        raise ValueError(f"control must be a 1-D array, got shape {u.shape}")
    if grid is not None and len(u) != grid.n:
        raise ValueError(f"control has {len(u)} samples but the grid has {grid.n} subintervals")
    return u


def linf_dist(u, v) -> float:
    """Max-norm distance ``max_i |u_i - v_i|`` between two sampled controls."""
    u = as_control(u)
    v = as_control(v)
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {len(u)} vs {len(v)}")
    if len(u) == 0:
        return 0.0
    return float(np.max(np.abs(u - v)))


def l2_norm(u, grid: Grid) -> float:
    """Left-endpoint quadrature of the L2 norm, ``(h * sum u_i**2) ** 0.5``."""
    u = as_control(u, grid)
    return math.sqrt(grid.h * float(np.dot(u, u)))


def inner(u, v, grid: Grid) -> float:
    """Discrete L2 inner product ``h * sum u_i v_i``."""
    u = as_control(u, grid)
    v = as_control(v, grid)
    return grid.h * float(np.dot(u, v))
