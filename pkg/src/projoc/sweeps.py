"""
Iteration-count sweeps over the DR parameter ``lam`` and the AAC
parameters ``(alpha, beta)``, for several control bounds ``a``.

Cells are independent solves and may run in a process pool. Results are
always stored in grid order. A cell that does not converge within
``max_iter`` records the sentinel ``max_iter + 1`` and is written to CSV
as an empty ``iterations`` field.
"""

from __future__ import annotations

import itertools
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from projoc import csvio
from projoc.problem import Grid, ProblemSpec
from projoc.projectors import JacobianMode
from projoc.solvers import Method, Order, RelaxationWarning, SolverConfig, solve

DEFAULT_A_VALUES = (2.5, 3.0, 3.5, 4.0)


def frange(lo: float, hi: float, step: float) -> list[float]:
    """Inclusive arithmetic grid ``lo, lo + step, ..., <= hi`` without drift."""
    if not (math.isfinite(lo) and math.isfinite(hi) and math.isfinite(step)):
        raise ValueError("grid bounds must be finite")
    if step <= 0 or hi < lo:
        raise ValueError(f"bad grid {lo}:{hi}:{step}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 12) for i in range(count)]


def parse_grid(text: str) -> list[float]:
    """Parse ``lo:hi:step`` into an inclusive grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid spec must look like lo:hi:step, got {text!r}")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError:
        raise ValueError(f"grid spec must look like lo:hi:step, got {text!r}") from None
    return frange(lo, hi, step)


DEFAULT_LAMBDA_GRID = tuple(frange(0.01, 0.99, 0.01))
DEFAULT_BETA_GRID = DEFAULT_LAMBDA_GRID
DEFAULT_ALPHA_GRID = tuple(frange(0.1, 1.0, 0.1))


@dataclass
class SweepResult:
    """Iteration counts over ``a_values x axes``.

    For DR ``axes == {"lambda": [...]}`` and ``iterations`` has shape
    ``(len(a_values), len(lambda))``; for AAC ``axes`` holds ``alpha`` and
    ``beta`` and the shape is ``(len(a_values), len(alpha), len(beta))``.
    """

    method: Method
    order: Order
    spec: ProblemSpec
    n: int
    eps: float
    max_iter: int
    a_values: list
    axes: dict
    iterations: np.ndarray
    converged: np.ndarray
    jacobian_mode: JacobianMode = JacobianMode.PAPER_CONTINUOUS
    refined: list = field(default_factory=list)

    @property
    def sentinel(self) -> int:
        return self.max_iter + 1

    @property
    def header(self) -> list[str]:
        return ["a", *self.axes, "iterations", "converged"]

    def rows(self):
        axes = list(self.axes.values())
        for ia, a in enumerate(self.a_values):
            for idx in itertools.product(*(range(len(ax)) for ax in axes)):
                ok = bool(self.converged[(ia, *idx)])
                its = int(self.iterations[(ia, *idx)]) if ok else None
                yield [float(a), *(float(ax[i]) for ax, i in zip(axes, idx)), its, ok]

    def to_csv(self) -> str:
        return csvio.dumps(self.header, self.rows())

    def write_csv(self, path) -> None:
        csvio.write(path, self.header, self.rows())

    def argmin(self, ia: int) -> tuple:
        """Grid index of the fewest iterations for ``a_values[ia]`` (first on ties)."""
        counts = self.iterations[ia]
        return np.unravel_index(int(np.argmin(counts)), counts.shape)

    def minimum(self, ia: int) -> tuple[dict, int]:
        idx = self.argmin(ia)
        params = {name: ax[i] for (name, ax), i in zip(self.axes.items(), idx)}
        return params, int(self.iterations[ia][idx])


def _cell(args) -> tuple[int, bool]:
    spec, n, cfg_kwargs = args
    with warnings.catch_warnings():
        # reported once per sweep, not per cell
        warnings.simplefilter("ignore", RelaxationWarning)
        cfg = SolverConfig(**cfg_kwargs)
    report = solve(spec, Grid(n), cfg)
    return report.iterations, report.converged


def _run_cells(tasks, jobs: int):
    if jobs is None or jobs <= 1 or len(tasks) <= 1:
        return [_cell(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_cell, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def _check_unit_interval(values, name: str, closed_right: bool = False):
    if len(values) == 0:
        raise ValueError(f"{name} grid is empty")
    arr = np.asarray(values, dtype=float)
    upper_ok = arr <= 1 if closed_right else arr < 1
    if not np.all((arr > 0) & upper_ok):
        interval = "(0, 1]" if closed_right else "(0, 1)"
        raise ValueError(f"{name} grid must lie in {interval}")
    if np.any(np.diff(arr) <= 0):
        raise ValueError(f"{name} grid must be strictly increasing")


def _check_a(a_values):
    if len(a_values) == 0:
        raise ValueError("a_values is empty")
    if any(not a > 0 for a in a_values):
        raise ValueError("every control bound must be positive")


def sweep_lambda(spec: ProblemSpec, grid: Grid, eps: float, a_values=DEFAULT_A_VALUES,
                 lambda_grid=DEFAULT_LAMBDA_GRID, order=Order.BOX_FIRST, max_iter: int = 1_000_000,
                 jacobian_mode=JacobianMode.PAPER_CONTINUOUS, jobs: int = 1) -> SweepResult:
    """DR iteration counts for every ``(a, lam)`` cell."""
    order = Order(order)
    a_values, lambda_grid = list(a_values), list(lambda_grid)
    _check_a(a_values)
    _check_unit_interval(lambda_grid, "lambda")
    tasks = [
        (spec.with_bound(a), grid.n,
         dict(method=Method.DR, order=order, epsilon=eps, max_iter=max_iter, lam=lam, jacobian_mode=jacobian_mode))
        for a in a_values for lam in lambda_grid
    ]
    out = _run_cells(tasks, jobs)
    shape = (len(a_values), len(lambda_grid))
    return _assemble(Method.DR, order, spec, grid, eps, max_iter, a_values, {"lambda": lambda_grid}, out, shape,
                     jacobian_mode)


def sweep_alpha_beta(spec: ProblemSpec, grid: Grid, eps: float, a_values=DEFAULT_A_VALUES,
                     alpha_grid=DEFAULT_ALPHA_GRID, beta_grid=DEFAULT_BETA_GRID, order=Order.BOX_FIRST,
                     max_iter: int = 1_000_000, jacobian_mode=JacobianMode.PAPER_CONTINUOUS,
                     jobs: int = 1) -> SweepResult:
    """AAC iteration counts for every ``(a, alpha, beta)`` cell."""
    order = Order(order)
    a_values, alpha_grid, beta_grid = list(a_values), list(alpha_grid), list(beta_grid)
    _check_a(a_values)
    _check_unit_interval(alpha_grid, "alpha", closed_right=True)
    _check_unit_interval(beta_grid, "beta")
    if 1.0 in alpha_grid:
        warnings.warn("alpha = 1 lies outside the convergence theory of AAC", RelaxationWarning, stacklevel=2)
    tasks = [
        (spec.with_bound(a), grid.n,
         dict(method=Method.AAC, order=order, epsilon=eps, max_iter=max_iter, alpha=alpha, beta=beta,
              jacobian_mode=jacobian_mode))
        for a in a_values for alpha in alpha_grid for beta in beta_grid
    ]
    out = _run_cells(tasks, jobs)
    shape = (len(a_values), len(alpha_grid), len(beta_grid))
    return _assemble(Method.AAC, order, spec, grid, eps, max_iter, a_values,
                     {"alpha": alpha_grid, "beta": beta_grid}, out, shape, jacobian_mode)


def _assemble(method, order, spec, grid, eps, max_iter, a_values, axes, out, shape, mode) -> SweepResult:
    its = np.array([k for k, _ in out], dtype=np.int64).reshape(shape)
    ok = np.array([c for _, c in out], dtype=bool).reshape(shape)
    its[~ok] = max_iter + 1
    return SweepResult(method, order, spec, grid.n, eps, max_iter, a_values, axes, its, ok, JacobianMode(mode))


def refine_minimum(result: SweepResult, ia: int, rounds: int = 6, points: int = 21,
                   bracket: tuple[float, float] | None = None, jobs: int = 1) -> dict:
    """Zoom in on the minimum for ``a_values[ia]`` along the last axis.

    Only ``lambda`` (DR) or ``beta`` (AAC, at the arg-min ``alpha``) is
    refined. The search starts on ``bracket``, by default the two grid
    neighbours of the arg-min cell. Each round scans ``points`` evenly
    spaced values, keeps the best, and shrinks the bracket to one spacing
    on either side. Downward spikes are narrow, so a bracket that misses
    the spike will not find it.
    """
    idx = result.argmin(ia)
    names = list(result.axes)
    last = result.axes[names[-1]]
    fixed = {name: result.axes[name][i] for name, i in zip(names[:-1], idx[:-1])}
    pos = idx[-1]
    best_x, best_k = float(last[pos]), int(result.iterations[ia][idx])
    if bracket is None:
        lo = float(last[pos - 1]) if pos > 0 else best_x
        hi = float(last[pos + 1]) if pos + 1 < len(last) else best_x
    else:
        lo, hi = bracket
        best_x, best_k = float("nan"), result.sentinel
    spec = result.spec.with_bound(result.a_values[ia])

    def kwargs(x):
        base = dict(order=result.order, epsilon=result.eps, max_iter=result.max_iter,
                    jacobian_mode=result.jacobian_mode)
        if result.method is Method.DR:
            return dict(base, method=Method.DR, lam=x)
        return dict(base, method=Method.AAC, alpha=fixed["alpha"], beta=x)

    for _ in range(rounds):
        xs = [x for x in np.linspace(lo, hi, points) if 0.0 < x < 1.0]
        counts = _run_cells([(spec, result.n, kwargs(float(x))) for x in xs], jobs)
        for x, (k, ok) in zip(xs, counts):
            if ok and k < best_k:
                best_x, best_k = float(x), k
        spacing = (hi - lo) / (points - 1)
        lo, hi = best_x - spacing, best_x + spacing
    found = {"a": float(result.a_values[ia]), **fixed, names[-1]: best_x, "iterations": best_k}
    result.refined.append(found)
    return found
