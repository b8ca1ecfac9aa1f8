"""
Ground truth for error measurements.

``unconstrained_solution`` samples the closed-form optimum when the control
bound is inactive. ``oracle_solve`` uses the fact that the optimal control
is the clip of an affine function of time, ``u = clip(c1 t + c2, -a, a)``,
and searches the two constants directly with damped Newton on the
Euler-integrated terminal miss. It shares no code path with the
projection solvers beyond the Euler integrator.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from projoc.dynamics import euler_integrate
from projoc.problem import Grid, ProblemSpec, StateTrajectory

logger = logging.getLogger(__name__)

MAX_NEWTON_STEPS = 200
MAX_HALVINGS = 30
START_GRID = np.linspace(-50.0, 50.0, 11)


@dataclass
class OracleSolution:
    c1: float
    c2: float
    control: np.ndarray
    trajectory: StateTrajectory
    feasible: bool
    miss: float = np.nan


def unconstrained_constants(spec: ProblemSpec) -> tuple[float, float]:
    ds = spec.sf - spec.s0
    c1 = -12.0 * ds + 6.0 * (spec.v0 + spec.vf)
    c2 = 6.0 * ds - 2.0 * (2.0 * spec.v0 + spec.vf)
    return c1, c2


def unconstrained_solution(spec: ProblemSpec, grid: Grid) -> tuple[np.ndarray, StateTrajectory]:
    """Closed-form optimal control and states when ``|u| <= a`` never binds.

    ``u = c1 t + c2`` with ``c1 = -12 (sf - s0) + 6 (v0 + vf)`` and
    ``c2 = 6 (sf - s0) - 2 (2 v0 + vf)``; the states are its exact
    integrals sampled on the grid, not an Euler approximation.
    """
    c1, c2 = unconstrained_constants(spec)
    t = grid.nodes
    u = c1 * grid.control_times + c2
    x1 = c1 * t**3 / 6.0 + c2 * t**2 / 2.0 + spec.v0 * t + spec.s0
    x2 = c1 * t**2 / 2.0 + c2 * t + spec.v0
    return u, StateTrajectory(x1, x2)


class _ClippedMiss:
    def __init__(self, spec: ProblemSpec, grid: Grid):
        self.spec = spec
        self.grid = grid
        self.t = grid.control_times

    def control(self, c) -> np.ndarray:
        return np.clip(c[0] * self.t + c[1], -self.spec.a, self.spec.a)

    def __call__(self, c) -> np.ndarray:
        traj = euler_integrate(self.control(c), self.spec, self.grid)
        return np.array([traj.x1[-1] - self.spec.sf, traj.x2[-1] - self.spec.vf])

    def jacobian(self, c) -> np.ndarray:
        jac = np.empty((2, 2))
        for j in range(2):
            d = 1e-6 * max(1.0, abs(c[j]))
            e = np.zeros(2)
            e[j] = d
            jac[:, j] = (self(c + e) - self(c - e)) / (2.0 * d)
        return jac


def _newton(miss: _ClippedMiss, c0, tol: float):
    """Damped Newton from ``c0``; returns ``(c, max|miss|)`` at exit."""
    c = np.asarray(c0, dtype=float)
    f = miss(c)
    err = np.max(np.abs(f))
    for _ in range(MAX_NEWTON_STEPS):
        if err <= tol:
            break
        # lstsq tolerates the flat Jacobian of a fully saturated control
        step = np.linalg.lstsq(miss.jacobian(c), -f, rcond=None)[0]
        norm = np.linalg.norm(f)
        scale = 1.0
        for _ in range(MAX_HALVINGS):
            trial = c + scale * step
            f_trial = miss(trial)
            if np.linalg.norm(f_trial) < norm:
                break
            scale *= 0.5
        else:
            break  # stalled
        c, f = trial, f_trial
        err = np.max(np.abs(f))
    return c, err


def oracle_solve(spec: ProblemSpec, grid: Grid, tol: float = 1e-12) -> OracleSolution:
    """Optimal control of the Euler-discretized problem as a clipped affine function.

    Starts from the unconstrained constants, then from an 11 x 11 grid over
    ``[-50, 50]^2`` (fixed order) until one start meets the terminal
    conditions to ``tol``. If none does, returns the best start found with
    ``feasible=False``.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    miss = _ClippedMiss(spec, grid)
    starts = [unconstrained_constants(spec)]
    starts += [(c1, c2) for c1 in START_GRID for c2 in START_GRID]

    best_c, best_err = None, np.inf
    for start in starts:
        c, err = _newton(miss, start, tol)
        if err < best_err:
            best_c, best_err = c, err
        if err <= tol:
            break
    feasible = bool(best_err <= tol)
    if not feasible:
        logger.info("oracle: no start met tol=%g (best miss %g)", tol, best_err)
    u = miss.control(best_c)
    return OracleSolution(float(best_c[0]), float(best_c[1]), u, euler_integrate(u, spec, grid), feasible, float(best_err))


# reference cache -----------------------------------------------------------

def reference_key(spec: ProblemSpec, n: int, tol: float) -> str:
    payload = json.dumps({"spec": spec.as_dict(), "n": int(n), "tol": float(tol)}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def default_cache_dir() -> Path:
    return Path(os.environ.get("PROJOC_CACHE", ".projoc_cache"))


def save_reference(path, sol: OracleSolution, spec: ProblemSpec, grid: Grid, tol: float) -> Path:
    """Write an oracle solution as ``.npz``: control samples plus header scalars."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp.npz")
    np.savez(
        tmp,
        control=sol.control,
        n=grid.n,
        spec=np.array([spec.s0, spec.sf, spec.v0, spec.vf, spec.a]),
        c=np.array([sol.c1, sol.c2]),
        tol=tol,
        feasible=sol.feasible,
        miss=sol.miss,
    )
    os.replace(tmp, path)
    return path


def load_reference(path) -> tuple[OracleSolution, ProblemSpec, Grid, float]:
    with np.load(path) as data:
        spec = ProblemSpec(*(float(v) for v in data["spec"]))
        grid = Grid(int(data["n"]))
        u = np.array(data["control"], dtype=float)
        c1, c2 = (float(v) for v in data["c"])
        sol = OracleSolution(c1, c2, u, euler_integrate(u, spec, grid),
                             bool(data["feasible"]), float(data["miss"]))
        return sol, spec, grid, float(data["tol"])


def cached_reference(spec: ProblemSpec, n: int = 1_000_000, tol: float = 1e-12,
                     cache_dir=None, path=None) -> OracleSolution:
    """Load the oracle reference for ``(spec, n, tol)``, computing it on a miss."""
    if path is None:
        cache_dir = default_cache_dir() if cache_dir is None else Path(cache_dir)
        path = Path(cache_dir) / f"reference_{reference_key(spec, n, tol)}.npz"
    path = Path(path)
    if path.exists():
        sol, cached_spec, grid, cached_tol = load_reference(path)
        if cached_spec == spec and grid.n == n and cached_tol == tol:
            return sol
        logger.warning("reference cache %s does not match the request; rebuilding", path)
    grid = Grid(n)
    sol = oracle_solve(spec, grid, tol)
    save_reference(path, sol, spec, grid, tol)
    return sol
