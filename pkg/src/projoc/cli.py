"""
Command-line front end.

Subcommands ``solve``, ``sweep``, ``errors`` and ``oracle``. Exit codes:
0 success, 1 invalid arguments, 2 solve did not converge.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from projoc import csvio
from projoc.analytic import cached_reference, default_cache_dir, reference_key, unconstrained_solution
from projoc.dynamics import euler_integrate
from projoc.metrics import ErrorMonitor, control_error, state_error
from projoc.problem import Grid, ProblemSpec
from projoc.projectors import JacobianMode
from projoc.solvers import Method, Order, RelaxationWarning, SolverConfig, solve
from projoc.sweeps import DEFAULT_A_VALUES, parse_grid, refine_minimum, sweep_alpha_beta, sweep_lambda

EXIT_OK, EXIT_INVALID, EXIT_NOT_CONVERGED = 0, 1, 2

log = logging.getLogger("projoc")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _add_instance(p):
    p.add_argument("--n", type=int, default=2000, help="number of subintervals")
    p.add_argument("--eps", type=float, default=1e-8, help="stopping tolerance")
    p.add_argument("--max-iter", type=int, default=1_000_000)
    p.add_argument("--s0", type=float, default=0.0)
    p.add_argument("--sf", type=float, default=0.0)
    p.add_argument("--v0", type=float, default=1.0)
    p.add_argument("--vf", type=float, default=0.0)
    p.add_argument("--jacobian", choices=["paper", "exact"], default="paper")
    p.add_argument("--order", choices=[o.value for o in Order], default=Order.BOX_FIRST.value)
    p.add_argument("--emit-config", action="store_true", help="print resolved settings as JSON and exit")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="projoc", description=__doc__.strip().splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="run one solver")
    p.add_argument("--method", choices=[m.value for m in Method], required=True)
    p.add_argument("--a", type=float, default=2.5, help="control bound")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--u0", help="initial iterate: a constant, or a CSV file with columns t,u")
    p.add_argument("--trace", type=Path, help="record every monitored iterate to this .npz file")
    p.add_argument("--out", type=Path, help="write the control as CSV (t,u)")
    _add_instance(p)

    p = sub.add_parser("sweep", help="iteration counts over algorithm parameters")
    p.add_argument("--method", choices=["dr", "aac"], required=True)
    p.add_argument("--lambda-grid", default="0.01:0.99:0.01")
    p.add_argument("--alpha-grid", default="0.1:1:0.1")
    p.add_argument("--beta-grid", default="0.01:0.99:0.01")
    p.add_argument("--a-list", default=",".join(str(a) for a in DEFAULT_A_VALUES))
    p.add_argument("--refine", action="store_true", help="zoom in on the minimum for every a")
    p.add_argument("--refine-bracket", help="lo:hi bracket for --refine instead of the arg-min neighbours")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", type=Path, help="CSV path (default: standard output)")
    _add_instance(p)

    p = sub.add_parser("errors", help="L-infinity errors against a reference solution")
    p.add_argument("--n-list", default="1000,10000,100000")
    p.add_argument("--methods", default="dykstra,dr,aac")
    p.add_argument("--a", type=float, default=2.5)
    p.add_argument("--reference", help="reference .npz path, or 'analytic' for the unconstrained closed form")
    p.add_argument("--ref-n", type=int, default=1_000_000)
    p.add_argument("--ref-tol", type=float, default=1e-12)
    p.add_argument("--lambda", dest="lam", type=float, default=0.7466)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.8617)
    p.add_argument("--per-iteration", action="store_true", help="also write trace_<method>_<n>.csv files")
    p.add_argument("--out-dir", type=Path, default=Path("."))
    p.add_argument("--out", type=Path, help="CSV path (default: standard output)")
    _add_instance(p)

    p = sub.add_parser("oracle", help="build or inspect the cached reference solution")
    p.add_argument("--a", type=float, default=2.5)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--cache-dir", type=Path)
    p.add_argument("--path", type=Path, help="explicit cache file")
    p.add_argument("--out", type=Path, help="also write the control as CSV (t,u)")
    _add_instance(p)
    return parser


def _spec(args, a=None) -> ProblemSpec:
    try:
        return ProblemSpec(args.s0, args.sf, args.v0, args.vf, args.a if a is None else a)
    except ValueError as exc:
        raise UsageError(f"--a/--s0/--sf/--v0/--vf: {exc}") from None


def _grid(n) -> Grid:
    try:
        return Grid(n)
    except ValueError as exc:
        raise UsageError(f"--n: {exc}") from None


def _floats(text: str, flag: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{flag}: expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise UsageError(f"{flag}: list is empty")
    return values


def _grid_flag(text: str, flag: str) -> list[float]:
    try:
        return parse_grid(text)
    except ValueError as exc:
        raise UsageError(f"{flag}: {exc}") from None


_METHOD_FLAGS = {"lam": "--lambda", "alpha": "--alpha", "beta": "--beta"}


def _config(method: Method, args, **params) -> SolverConfig:
    needed = {Method.DR: {"lam"}, Method.AAC: {"alpha", "beta"}}.get(method, set())
    for name, flag in _METHOD_FLAGS.items():
        given = params.get(name) is not None
        if given and name not in needed:
            raise UsageError(f"{flag} does not apply to --method {method.value}")
        if not given and name in needed:
            raise UsageError(f"{flag} is required for --method {method.value}")
    try:
        return SolverConfig(method, Order(args.order), args.eps, args.max_iter,
                            jacobian_mode=JacobianMode(args.jacobian), **params)
    except ValueError as exc:
        flag = next((f for n, f in _METHOD_FLAGS.items() if n in str(exc)), "--eps/--max-iter")
        raise UsageError(f"{flag}: {exc}") from None


def _settings(args) -> dict:
    out = {}
    for key, value in sorted(vars(args).items()):
        if key in ("emit_config", "verbose"):
            continue
        out[key] = str(value) if isinstance(value, Path) else value
    return out


def _load_u0(text, grid: Grid):
    if text is None:
        return None
    try:
        return float(text)
    except ValueError:
        pass
    try:
        header, rows = csvio.read(text)
    except OSError as exc:
        raise UsageError(f"--u0: {exc}") from None
    if header[-1] != "u":
        raise UsageError(f"--u0: {text} has no 'u' column")
    u = np.array([row[-1] for row in rows], dtype=float)
    if len(u) != grid.n:
        raise UsageError(f"--u0: {text} has {len(u)} samples, --n is {grid.n}")
    return u


def write_control(path, grid: Grid, u) -> None:
    csvio.write(path, ["t", "u"], zip(grid.control_times.tolist(), np.asarray(u).tolist()))


def cmd_solve(args) -> int:
    method = Method(args.method)
    spec = _spec(args)
    grid = _grid(args.n)
    cfg = _config(method, args, lam=args.lam, alpha=args.alpha, beta=args.beta)
    if args.emit_config:
        print(json.dumps(_settings(args), sort_keys=True))
        return EXIT_OK
    if args.trace is not None:
        cfg = dataclasses.replace(cfg, record_shadow=True)
    report = solve(spec, grid, cfg, u0=_load_u0(args.u0, grid))
    if args.out is not None:
        write_control(args.out, grid, report.control)
    if args.trace is not None:
        np.savez(args.trace, residuals=report.residuals, shadow=np.array(report.shadow), t=grid.control_times)
    summary = {
        "method": method.value,
        "order": cfg.order.value,
        "n": grid.n,
        "eps": cfg.epsilon,
        "params": cfg.params,
        "iterations": report.iterations,
        "converged": report.converged,
        "final_residual": report.final_residual,
    }
    print(json.dumps(summary))
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def cmd_sweep(args) -> int:
    spec = _spec(args, a=1.0)
    grid = _grid(args.n)
    a_values = _floats(args.a_list, "--a-list")
    if any(a <= 0 for a in a_values):
        raise UsageError("--a-list: every bound must be positive")
    bracket = None
    if args.refine_bracket:
        try:
            bracket = tuple(float(v) for v in args.refine_bracket.split(":"))
        except ValueError:
            bracket = ()
        if len(bracket) != 2 or not bracket[0] < bracket[1]:
            raise UsageError(f"--refine-bracket: expected lo:hi, got {args.refine_bracket!r}")
    common = dict(order=Order(args.order), max_iter=args.max_iter,
                  jacobian_mode=JacobianMode(args.jacobian), jobs=args.jobs)
    try:
        if args.method == "dr":
            kwargs = dict(lambda_grid=_grid_flag(args.lambda_grid, "--lambda-grid"))
        else:
            kwargs = dict(alpha_grid=_grid_flag(args.alpha_grid, "--alpha-grid"),
                          beta_grid=_grid_flag(args.beta_grid, "--beta-grid"))
        if args.emit_config:
            print(json.dumps(_settings(args), sort_keys=True))
            return EXIT_OK
        sweep = sweep_lambda if args.method == "dr" else sweep_alpha_beta
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RelaxationWarning)
            result = sweep(spec, grid, args.eps, a_values, **kwargs, **common)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    if args.out is None:
        sys.stdout.write(result.to_csv())
    else:
        result.write_csv(args.out)
    if args.refine:
        for ia in range(len(a_values)):
            found = refine_minimum(result, ia, bracket=bracket, jobs=args.jobs)
            print(json.dumps(found), file=sys.stderr if args.out is None else sys.stdout)
    return EXIT_OK


def _reference(args, spec: ProblemSpec):
    """Return ``(control, trajectory)`` reference, or ``None`` for the analytic one."""
    if args.reference == "analytic":
        return None
    if args.reference is not None and Path(args.reference).exists():
        from projoc.analytic import load_reference

        sol, ref_spec, _, _ = load_reference(args.reference)
        if ref_spec != spec:
            raise UsageError(f"--reference: {args.reference} was built for {ref_spec}, not {spec}")
        return sol.control, sol.trajectory
    sol = cached_reference(spec, args.ref_n, args.ref_tol, path=args.reference)
    if not sol.feasible:
        raise UsageError("--a: the reference problem is infeasible")
    return sol.control, sol.trajectory


def cmd_errors(args) -> int:
    spec = _spec(args)
    n_list = [int(v) for v in _floats(args.n_list, "--n-list")]
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    try:
        methods = [Method(m) for m in methods]
    except ValueError as exc:
        raise UsageError(f"--methods: {exc}") from None
    if not methods:
        raise UsageError("--methods: list is empty")
    params = {
        Method.DYKSTRA: {},
        Method.MAP: {},
        Method.DR: {"lam": args.lam},
        Method.AAC: {"alpha": args.alpha, "beta": args.beta},
    }
    if args.reference != "analytic":
        for n in n_list:
            if n < 1 or args.ref_n % n:
                raise UsageError(f"--n-list: N = {n} is not nested in the reference grid of {args.ref_n}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RelaxationWarning)
        configs = {m: _config(m, args, **params[m]) for m in methods}
    if args.emit_config:
        print(json.dumps(_settings(args), sort_keys=True))
        return EXIT_OK

    ref = _reference(args, spec)
    rows = []
    for n in n_list:
        grid = _grid(n)
        if ref is None:
            ref_u, ref_x = unconstrained_solution(spec, grid)
        else:
            ref_u, ref_x = ref
        for m in methods:
            monitor = ErrorMonitor(spec, grid, ref_u, ref_x) if args.per_iteration else None
            report = solve(spec, grid, configs[m], callback=monitor)
            su = control_error(report.control, ref_u)
            sx = state_error(euler_integrate(report.control, spec, grid), ref_x)
            rows.append([m.value, n, su, sx, report.iterations])
            log.info("%s n=%d: sigma_u=%.3g sigma_x=%.3g (%d iterations)", m.value, n, su, sx, report.iterations)
            if monitor is not None:
                trace = monitor.trace()
                args.out_dir.mkdir(parents=True, exist_ok=True)
                csvio.write(
                    args.out_dir / f"trace_{m.value}_{n}.csv",
                    ["k", "residual", "sigma_u", "sigma_x"],
                    zip(range(report.iterations), report.residuals.tolist(),
                        trace.sigma_u.tolist(), trace.sigma_x.tolist()),
                )
    header = ["method", "n", "sigma_u", "sigma_x", "iterations"]
    if args.out is None:
        sys.stdout.write(csvio.dumps(header, rows))
    else:
        csvio.write(args.out, header, rows)
    return EXIT_OK


def cmd_oracle(args) -> int:
    spec = _spec(args)
    if args.emit_config:
        print(json.dumps(_settings(args), sort_keys=True))
        return EXIT_OK
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    grid = _grid(args.n)
    path = args.path
    if path is None:
        cache_dir = args.cache_dir or default_cache_dir()
        path = Path(cache_dir) / f"reference_{reference_key(spec, grid.n, args.tol)}.npz"
    sol = cached_reference(spec, grid.n, args.tol, path=path)
    if args.out is not None:
        write_control(args.out, grid, sol.control)
    print(json.dumps({"c1": sol.c1, "c2": sol.c2, "feasible": sol.feasible, "miss": sol.miss,
                      "n": grid.n, "path": str(path)}))
    return EXIT_OK if sol.feasible else EXIT_NOT_CONVERGED


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "errors": cmd_errors, "oracle": cmd_oracle}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"projoc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
