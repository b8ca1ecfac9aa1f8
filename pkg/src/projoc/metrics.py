"""L-infinity errors against a reference solution on a nested (finer or equal) grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from projoc.dynamics import euler_integrate
from projoc.problem import Grid, ProblemSpec, StateTrajectory, as_control


@dataclass
class ErrorTrace:
    sigma_u: np.ndarray
    sigma_x: np.ndarray

    def __post_init__(self):
        self.sigma_u = np.asarray(self.sigma_u, dtype=float)
        self.sigma_x = np.asarray(self.sigma_x, dtype=float)
        if self.sigma_u.shape != self.sigma_x.shape:
            raise ValueError("sigma_u and sigma_x must have equal lengths")

    def __len__(self):
        return len(self.sigma_u)


def _stride(n_coarse: int, n_fine: int) -> int:
    if n_coarse < 1 or n_fine % n_coarse:
        raise ValueError(f"grid of {n_coarse} subintervals is not nested in reference grid of {n_fine}")
    return n_fine // n_coarse


def control_error(u, ref) -> float:
    """``max_i |u_i - u*(t_i)|`` sampling the reference at coincident nodes."""
    u = as_control(u)
    ref = as_control(ref)
    stride = _stride(len(u), len(ref))
    return float(np.max(np.abs(u - ref[::stride])))


def state_error(x: StateTrajectory, ref: StateTrajectory) -> float:
    """``max_i max(|x1_i - x1*(t_i)|, |x2_i - x2*(t_i)|)`` over all nodes."""
    stride = _stride(x.n, ref.n)
    e1 = np.max(np.abs(x.x1 - ref.x1[::stride]))
    e2 = np.max(np.abs(x.x2 - ref.x2[::stride]))
    return float(max(e1, e2))


class ErrorMonitor:
    """Accumulates per-iteration errors; usable as a solver callback.

    Avoids holding every iterate in memory on fine grids.
    """

    def __init__(self, spec: ProblemSpec, grid: Grid, ref_control, ref_traj: StateTrajectory):
        self.spec = spec
        self.grid = grid
        self.ref_u = as_control(ref_control)[:: _stride(grid.n, len(ref_control))]
        stride = _stride(grid.n, ref_traj.n)
        self.ref_x = StateTrajectory(ref_traj.x1[::stride], ref_traj.x2[::stride])
        self.sigma_u: list[float] = []
        self.sigma_x: list[float] = []

    def __call__(self, k: int, u: np.ndarray) -> None:
        self.sigma_u.append(control_error(u, self.ref_u))
        self.sigma_x.append(state_error(euler_integrate(u, self.spec, self.grid), self.ref_x))

    def trace(self) -> ErrorTrace:
        return ErrorTrace(self.sigma_u, self.sigma_x)


def error_trace(report, spec: ProblemSpec, grid: Grid, ref_control, ref_traj: StateTrajectory) -> ErrorTrace:
    """Errors of every recorded monitored iterate of a solve.

    The report must come from a solve with ``record_shadow=True``.
    """
    if report.shadow is None:
        raise ValueError("report has no recorded iterates; solve with record_shadow=True")
    monitor = ErrorMonitor(spec, grid, ref_control, ref_traj)
    for k, u in enumerate(report.shadow):
        monitor(k, u)
    return monitor.trace()
