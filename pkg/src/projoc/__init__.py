"""Projection splitting methods for minimum-energy control of the double integrator."""

from projoc.problem import Grid, ProblemSpec, StateTrajectory, l2_norm, linf_dist
from projoc.dynamics import euler_integrate
from projoc.projectors import (
    AffineProjector,
    JacobianMode,
    ShootingConstants,
    near_miss,
    project_A,
    project_B,
)
from projoc.solvers import (
    Method,
    Order,
    SolveReport,
    SolverConfig,
    aac_solve,
    dr_solve,
    dykstra_solve,
    map_solve,
    solve,
)
from projoc.analytic import OracleSolution, oracle_solve, unconstrained_solution
from projoc.metrics import ErrorTrace, control_error, error_trace, state_error

__all__ = [
    "AffineProjector",
    "ErrorTrace",
    "Grid",
    "JacobianMode",
    "Method",
    "OracleSolution",
    "Order",
    "ProblemSpec",
    "ShootingConstants",
    "SolveReport",
    "SolverConfig",
    "StateTrajectory",
    "aac_solve",
    "control_error",
    "dr_solve",
    "dykstra_solve",
    "error_trace",
    "euler_integrate",
    "l2_norm",
    "linf_dist",
    "map_solve",
    "near_miss",
    "oracle_solve",
    "project_A",
    "project_B",
    "solve",
    "state_error",
    "unconstrained_solution",
]
