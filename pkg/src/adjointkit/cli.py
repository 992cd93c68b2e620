"""Command-line entry point: one subcommand per module.

Matrices and vectors travel as the operator JSON record
({"rows", "cols", "entries", optional metrics}); per-index and
per-iteration tables are CSV.  Results go to standard output unless an
output path is given.  Exit status: 0 success, 2 validation problems,
3 numerical failures (with a diagnostic JSON payload).

The environment variable ADJOINTKIT_SEED overrides the default seed 42
for every seeded subcommand.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import selftest as selftest_mod
from .core import adjoint_consistency_check, operator_from_record
from .errors import NumericalError
from .leastsq import normal_solve, picard_diagnostic, tikhonov_solve
from .network import NetworkSpec, init_parameters, train
from .optim import fd_gradient_check, gradient_descent, reduced_gradient
from .pde import build_advection_problem, make_elliptic_demo
from .spectral import fundamental_subspaces, svd
from .stability import (SeirsModel, damped_oscillator, hurwitz_check,
                        linearize, logistic, r0 as spectral_radius_ratio,
                        stability_verdict)
from .sturm import constant_coefficient_problem, discretize, solve_modes

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _default_seed() -> int:
    env = os.environ.get("ADJOINTKIT_SEED")
    if env is None:
        return 42
    try:
        return int(env)
    except ValueError:
        raise ValueError(f"ADJOINTKIT_SEED must be an integer, got {env!r}") from None


def _load_json(path: str):
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def _load_operator(path: str):
    return operator_from_record(_load_json(path))


def _load_vector(path: str, length: int | None = None) -> np.ndarray:
    data = _load_json(path)
    if isinstance(data, dict):
        data = data.get("entries")
    vec = np.asarray(data, dtype=float)
    if vec.ndim != 1:
        raise ValueError(f"expected a flat JSON array in {path}")
    if length is not None and vec.size != length:
        raise ValueError(f"vector in {path} has length {vec.size}, expected {length}")
    return vec


def _emit(text: str, output: str | None):
    if output:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _json_text(payload) -> str:
    return json.dumps(payload) + "\n"


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _csv(rows, header: str) -> str:
    lines = [header]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v)
                              for v in row))
    return "\n".join(lines) + "\n"


# -- subcommands -----------------------------------------------------------------


def cmd_adjoint_check(args) -> int:
    op = _load_operator(args.op)
    report = adjoint_consistency_check(op, trials=args.trials, seed=args.seed)
    _emit(_json_text({"trials": report.trials, "max_defect": report.max_defect}),
          args.output)
    return EXIT_OK


def cmd_svd(args) -> int:
    op = _load_operator(args.op)
    dec = svd(op, rank_tol=args.rank_tol)
    bases = fundamental_subspaces(dec)
    payload = {
        "sigma": [float(s) for s in dec.sigma],
        "rank": dec.rank,
        "U": [[float(x) for x in row] for row in dec.right_vectors],
        "V": [[float(x) for x in row] for row in dec.left_vectors],
    }
    text = _json_text(payload)
    text += "sigma: " + ",".join(f"{s:.4f}" for s in dec.sigma) + "\n"
    m, n = op.shape
    text += (f"subspaces: dim R(A)={bases.range_a.shape[1]}, "
             f"dim N(A)={bases.null_a.shape[1]}, "
             f"dim R(A*)={bases.range_astar.shape[1]}, "
             f"dim N(A*)={bases.null_astar.shape[1]} "
             f"(n={n}, m={m})\n")
    _emit(text, args.output)
    return EXIT_OK


def cmd_solve(args) -> int:
    op = _load_operator(args.op)
    y = _load_vector(args.rhs, op.codomain.dim)
    x = normal_solve(op, y)
    residual = op.codomain.norm(op.matvec(x) - y)
    _emit(_json_text({"x": [float(v) for v in x], "residual_norm": residual}),
          args.output)
    return EXIT_OK


def cmd_tikhonov(args) -> int:
    op = _load_operator(args.op)
    y = _load_vector(args.rhs, op.codomain.dim)
    x0 = _load_vector(args.x0, op.domain.dim) if args.x0 else None
    sol = tikhonov_solve(op, y, args.kappa, x0)
    _emit(_json_text({"x": [float(v) for v in sol.x], "kappa": sol.kappa,
                      "residual_norm": sol.residual_norm,
                      "prior_distance": sol.prior_distance}), args.output)
    return EXIT_OK


def cmd_picard(args) -> int:
    op = _load_operator(args.op)
    y = _load_vector(args.rhs, op.codomain.dim)
    table = picard_diagnostic(op, y)
    rows = [(row.index, float(row.sigma), float(row.coeff), float(row.ratio),
             float(row.cumulative)) for row in table.rows]
    text = _csv(rows, "i,sigma,coeff,ratio,cumsum")
    text += f"# null_defect={_fmt(table.null_defect)}\n"
    _emit(text, args.output)
    return EXIT_OK


def cmd_train(args) -> int:
    text = args.spec
    if text.startswith("sizes="):
        text = text[len("sizes="):]
    try:
        sizes = tuple(int(s) for s in text.split(","))
    except ValueError:
        raise ValueError(f"cannot parse layer sizes from {args.spec!r}") from None
    spec = NetworkSpec(sizes, activation=args.act)
    records = _load_json(args.data)
    if not isinstance(records, list) or not records:
        raise ValueError("training data must be a non-empty JSON list")
    samples = []
    for rec in records:
        try:
            x = np.asarray(rec["x"], dtype=float)
            a_obs = np.asarray(rec["a_obs"], dtype=float)
        except (KeyError, TypeError):
            raise ValueError('each sample needs "x" and "a_obs" arrays') from None
        if x.shape != (sizes[0],) or a_obs.shape != (sizes[-1],):
            raise ValueError("sample shapes do not match the network sizes")
        samples.append((x, a_obs))
    params = init_parameters(spec, seed=args.seed)
    _, history = train(spec, params, samples, iters=args.iters, step=args.step)
    _emit(_csv([(k, float(f), float(g), float(a)) for k, f, g, a in history],
               "k,loss,grad_norm,step"), args.output)
    return EXIT_OK


def cmd_stability(args) -> int:
    if (args.model is None) == (args.matrix is None):
        raise ValueError("provide exactly one of --model or --matrix")
    reproduction = None
    if args.matrix:
        a = _load_operator(args.matrix).entries
        if a.shape[0] != a.shape[1]:
            raise ValueError("stability analysis needs a square matrix")
        field = lambda x: a @ x  # noqa: E731
        x_eq = np.zeros(a.shape[0])
    elif args.model == "damped-oscillator":
        field, x_eq = damped_oscillator, np.zeros(2)
    elif args.model == "logistic":
        field, x_eq = logistic, np.array([float(args.eq)])
    elif args.model == "seirs":
        model = SeirsModel(beta=args.beta)
        f_mat, v_mat = model.next_generation_split()
        reproduction = spectral_radius_ratio(f_mat, v_mat)
        field, x_eq = model, model.disease_free_equilibrium
    else:
        raise ValueError(f"unknown model {args.model!r}")
    report = stability_verdict(field, x_eq, reproduction_number=reproduction)
    payload = {
        "hurwitz": report.hurwitz,
        "spd_certificate": report.spd_certificate,
        "spectral_abscissa_bound": report.spectral_abscissa_bound,
        "margin": hurwitz_check(linearize(field, x_eq)).margin,
    }
    if report.r0 is not None:
        payload["r0"] = report.r0
    if report.lyapunov_p is not None:
        payload["lyapunov_P"] = [[float(x) for x in row] for row in report.lyapunov_p]
    _emit(_json_text(payload), args.output)
    return EXIT_OK


def cmd_r0(args) -> int:
    f_mat = _load_operator(args.F).entries
    v_mat = _load_operator(args.V).entries
    value = spectral_radius_ratio(f_mat, v_mat)
    _emit(_json_text({"r0": value}), args.output)
    return EXIT_OK


def cmd_sturm(args) -> int:
    problem = constant_coefficient_problem(args.bc, n=args.n)
    disc = discretize(problem)
    modes = solve_modes(disc, args.modes)
    header = "lambda," + ",".join(f"v{i + 1}" for i in range(disc.grid.size))
    rows = []
    for j in range(args.modes):
        rows.append((float(modes.eigenvalues[j]),
                     *(float(v) for v in modes.modes[:, j])))
    _emit(_csv(rows, header), args.output)
    return EXIT_OK


def _build_pde_problem(args):
    if args.problem == "advection":
        problem = build_advection_problem(args.n, args.beta)
        z = np.array([args.z])
        return problem, z
    problem, _ = make_elliptic_demo(args.n, g0=args.g0, g1=args.g1,
                                    kappa=args.kappa)
    return problem, np.zeros(problem.control_dim)


def cmd_pdeopt(args) -> int:
    problem, z = _build_pde_problem(args)
    if args.check_gradient:
        errors = fd_gradient_check(problem, z, steps=(1e-3, 1e-4, 1e-5))
        _emit(_json_text({"rel_error": {f"{h:g}": e for h, e in errors.items()}}),
              args.output)
        return EXIT_OK
    if args.descend:
        result = gradient_descent(problem, z, step=args.step, iters=args.iters,
                                  tol=args.tol)
        _emit(_csv([(k, float(f), float(g), float(a))
                    for k, f, g, a in result.history], "k,f,grad_norm,step"),
              args.output)
        return EXIT_OK
    # field dump: state, adjoint, and gradient sampled on a common grid
    u = problem.solve_forward(z)
    y = problem.solve_adjoint(u, z, -problem.objective_grad_state(u, z))
    grad = reduced_gradient(problem, z).gradient
    if args.problem == "advection":
        xs = np.arange(problem.state_dim) * problem.h
        v = np.concatenate([[y[0]], y[1:] / problem.h])
        rows = [(float(xs[i]), float(u[i]), float(v[i]), float(grad[0]))
                for i in range(problem.state_dim)]
    else:
        padded_u = np.concatenate([[problem.g0], u, [problem.g1]])
        padded_v = np.concatenate([[0.0], y / problem.h, [0.0]])
        cell_u = 0.5 * (padded_u[:-1] + padded_u[1:])
        cell_v = 0.5 * (padded_v[:-1] + padded_v[1:])
        rows = [(float(problem.midpoints[i]), float(cell_u[i]), float(cell_v[i]),
                 float(grad[i])) for i in range(problem.control_dim)]
    _emit(_csv(rows, "x,u,v,grad"), args.output)
    return EXIT_OK


def cmd_selftest(args) -> int:
    names = [args.suite] if args.suite else None
    results = selftest_mod.run_suites(names=names, seed=args.seed,
                                      corrupt_adjoint=args.corrupt_adjoint)
    all_ok = True
    for name, ok, detail in results:
        sys.stdout.write(f"{name}: {'PASS' if ok else 'FAIL'} ({detail})\n")
        all_ok = all_ok and ok
    return EXIT_OK if all_ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adjointkit",
        description="Adjoint-consistent operators: SVD, regularized inversion, "
                    "reduced gradients, backprop, ODE stability, Sturm modes.")
    sub = parser.add_subparsers(dest="command", required=True)
    seed = _default_seed()

    p = sub.add_parser("adjoint-check", help="randomized adjoint identity report")
    p.add_argument("--op", required=True, help="operator JSON file")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--output")
    p.set_defaults(func=cmd_adjoint_check)

    p = sub.add_parser("svd", help="singular triplets and subspace dimensions")
    p.add_argument("--op", required=True)
    p.add_argument("--rank-tol", type=float, default=None)
    p.add_argument("--output")
    p.set_defaults(func=cmd_svd)

    p = sub.add_parser("solve", help="minimum-norm least-squares solve")
    p.add_argument("--op", required=True)
    p.add_argument("--rhs", required=True, help="vector JSON file")
    p.add_argument("--output")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("tikhonov", help="regularized solve")
    p.add_argument("--op", required=True)
    p.add_argument("--rhs", required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--x0", help="prior vector JSON file")
    p.add_argument("--output")
    p.set_defaults(func=cmd_tikhonov)

    p = sub.add_parser("picard", help="singular-spectrum data diagnostic (CSV)")
    p.add_argument("--op", required=True)
    p.add_argument("--rhs", required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_picard)

    p = sub.add_parser("train", help="full-batch network training (loss CSV)")
    p.add_argument("--spec", required=True,
                   help="layer sizes, e.g. sizes=2,4,1 or plain 2,4,1")
    p.add_argument("--act", default="tanh", choices=("tanh", "logistic", "identity"))
    p.add_argument("--data", required=True, help='JSON list of {"x", "a_obs"}')
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--output")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("stability", help="equilibrium stability report")
    p.add_argument("--model", choices=("damped-oscillator", "logistic", "seirs"))
    p.add_argument("--matrix", help="operator JSON file for a linear system")
    p.add_argument("--eq", type=float, default=0.0, help="logistic equilibrium")
    p.add_argument("--beta", type=float, default=0.3, help="seirs contact rate")
    p.add_argument("--output")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("r0", help="basic reproduction number from an F/V split")
    p.add_argument("--F", required=True, help="new-infection matrix JSON")
    p.add_argument("--V", required=True, help="transition matrix JSON")
    p.add_argument("--output")
    p.set_defaults(func=cmd_r0)

    p = sub.add_parser("sturm", help="constant-coefficient eigenmodes (CSV)")
    p.add_argument("--bc", default="dirichlet",
                   choices=("dirichlet", "neumann", "periodic"))
    p.add_argument("--n", type=int, default=63)
    p.add_argument("--modes", type=int, default=5)
    p.add_argument("--output")
    p.set_defaults(func=cmd_sturm)

    p = sub.add_parser("pdeopt", help="PDE-constrained control problems")
    p.add_argument("--problem", required=True, choices=("advection", "elliptic"))
    p.add_argument("--n", type=int, default=31)
    p.add_argument("--beta", type=float, default=1.0, help="advection velocity")
    p.add_argument("--z", type=float, default=1.0, help="advection control value")
    p.add_argument("--g0", type=float, default=0.0)
    p.add_argument("--g1", type=float, default=1.0)
    p.add_argument("--kappa", type=float, default=0.0,
                   help="quadratic penalty routed into the inversion objective")
    p.add_argument("--check-gradient", action="store_true")
    p.add_argument("--descend", action="store_true")
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--step", type=float, default=100.0)
    p.add_argument("--tol", type=float, default=0.0)
    p.add_argument("--output")
    p.set_defaults(func=cmd_pdeopt)

    p = sub.add_parser("selftest", help="run the cross-module invariant suites")
    p.add_argument("--suite", choices=sorted(selftest_mod.SUITES))
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--corrupt-adjoint", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    try:
        parser = build_parser()
    except ValueError as exc:  # bad ADJOINTKIT_SEED
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION
    except NumericalError as exc:
        sys.stdout.write(_json_text({"error": "numerical-failure",
                                     "detail": str(exc)}))
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
