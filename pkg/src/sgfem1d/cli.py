"""Command line front end: sgfem1d <command> [options]."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .assembly import MODES, element_stiffness
from .linalg import EPS, band_lu_nopivot, bauer_binary_solve, dump_matrix, extreme_eigs, solve
from .mesh import uniform_mesh
from .problems import KINDS, energy_error, energy_norm, make_problem, problem_from_text
from .quadrature import QuadRule
from .studies import (assumption_study, build_system, condition_study, convergence_study, emit_csv,
                      emit_svg_loglog, eta_study, solve_problem)

ACCEPTANCE_FAILURE = 2
RUNTIME_ERROR = 1

_DEFAULT_NS = {
    "convergence": "16,32,64,128,256,512",
    "condition": "250,500,1000,2000,4000",
    "eta": "250,500,1000,2000,4000",
}


def _problem(args):
    if args.problem_file:
        with open(args.problem_file) as fh:
            return problem_from_text(fh.read())
    params = {}
    kind = args.problem
    if args.alpha is not None and kind == "Singular":
        params["alpha"] = args.alpha
    if args.beta is not None and kind in ("Interface1", "Interface2", "Discontinuous"):
        params["beta"] = args.beta
    if args.c is not None and kind == "Discontinuous":
        params["c"] = args.c
    if kind == "Interface2" and args.adjacent:
        params["adjacent"] = True
    return make_problem(kind, **params)


def _ns(args, command):
    text = args.n_list or _DEFAULT_NS.get(command, "10")
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ValueError(f"bad --n-list {text!r}") from None


def _rule(args):
    return QuadRule(order=args.quad_order) if args.quad_order else None


def _check_slope(args, slope) -> int:
    if args.expect is None:
        return 0
    ok = abs(slope - args.expect) <= args.slope_tol
    print(f"slope {slope:.4f} vs expected {args.expect} +/- {args.slope_tol}: {'ok' if ok else 'FAIL'}")
    return 0 if ok else ACCEPTANCE_FAILURE


def _report(records, fit, fields, args, title):
    for r in records:
        cols = [f"N={r.N:<6d}", f"dofs={r.dofs:<6d}"]
        cols += [f"{name}={getattr(r, name):.6e}" for name in fields if getattr(r, name) is not None]
        print("  ".join(cols))
    print(f"fit over N={fit.range[0]}..{fit.range[1]}: slope {fit.slope:.4f}, r2 {fit.r2:.4f}")
    if args.out:
        emit_csv(records, args.out)
    if args.plot:
        emit_svg_loglog(records, fields, args.plot, x_field="N", fit=None if "energy_error" in fields else fit,
                        title=title)


def cmd_element(args) -> int:
    prob = _problem(args)
    N = _ns(args, "element")[0]
    mesh = uniform_mesh(N)
    bound = prob.bind(mesh)
    space = bound.space(mesh, args.method)
    ks = [args.element] if args.element else range(1, N + 1)
    np.set_printoptions(precision=10, linewidth=120)
    for k in ks:
        em = element_stiffness(k, space, bound.a, _rule(args))
        if args.element is None and not len(em.enr_dofs):
            continue
        print(f"element {k} on [{mesh.element(k)[0]:.6g}, {mesh.element(k)[1]:.6g}]")
        print("A11 =\n", em.A11)
        if len(em.enr_dofs):
            print("A12 =\n", em.A12)
            print("A22 =\n", em.A22)
            print("A22 / h^3 eigenvalues:", np.linalg.eigvalsh(em.A22 / mesh.h**3))
    if args.out:
        system = build_system(prob, N, args.method, _rule(args))
        with open(args.out, "w") as fh:
            dump_matrix(system.matrix, fh)
    return 0


def cmd_solve(args) -> int:
    prob = _problem(args)
    N = _ns(args, "solve")[0]
    sol = solve_problem(prob, N, args.method, _rule(args))
    err = energy_error(sol.problem, sol.coeffs, sol.space, _rule(args))
    norm = energy_norm(sol.problem, _rule(args))
    rep = extreme_eigs(sol.system.matrix, unscaled=False)
    print(f"problem {prob.kind} method {sol.space.mode} N={N} dofs={sol.system.dofmap.n} "
          f"bandwidth={sol.system.matrix.bandwidth}")
    print(f"energy error {err:.6e}  relative {err / norm if norm else float('nan'):.6e}")
    print(f"scaled condition number {rep.scaled_kappa:.6e}")
    if prob.exact_dofs is not None:
        x = sol.problem.exact_dofs(sol.space)
        print(f"eta {np.linalg.norm(x - sol.coeffs) / np.linalg.norm(x):.6e}")
    return 0


def cmd_convergence(args) -> int:
    records, fit = convergence_study(_problem(args), args.method, _ns(args, "convergence"), _rule(args),
                                     upper_half=not args.all_points)
    _report(records, fit, ["energy_error"], args, f"{args.problem} energy error")
    return _check_slope(args, fit.slope)


def cmd_condition(args) -> int:
    records, fit = condition_study(_problem(args), args.method, _ns(args, "condition"),
                                   unscaled=args.unscaled, upper_half=not args.all_points)
    _report(records, fit, ["scaled_kappa"] + (["kappa2"] if args.unscaled else []), args,
            f"{args.problem} scaled condition number")
    return _check_slope(args, fit.slope)


def cmd_eta(args) -> int:
    records, fit = eta_study(_problem(args), _ns(args, "eta"), args.method, upper_half=not args.all_points)
    _report(records, fit, ["eta", "scaled_kappa"], args, f"{args.problem} eta")
    worst = max(r.extra["eta_ratio"] for r in records)
    print(f"max eta / (K eps) = {worst:.4f}")
    return _check_slope(args, fit.slope)


def cmd_assumptions(args) -> int:
    grid = None if args.beta is None else [args.beta]
    rep = assumption_study(args.family, grid, alpha=args.alpha if args.alpha is not None else 0.75)
    for name, ok in rep.checks.items():
        print(f"{'ok  ' if ok else 'FAIL'} {name}")
    return 0 if rep.ok else ACCEPTANCE_FAILURE


def cmd_bauer(args) -> int:
    prob = _problem(args)
    rng = np.random.default_rng(args.seed)
    status = 0
    for N in _ns(args, "bauer"):
        system = build_system(prob, N, args.method)
        n = system.dofmap.n
        ref = solve(band_lu_nopivot(system.matrix), system.load)
        patterns = {"zero": np.zeros(n, int), "i mod 8": np.arange(n) % 8,
                    "random": rng.integers(-8, 9, size=n)}
        for name, g in patterns.items():
            x_direct, x_scaled = bauer_binary_solve(system.matrix, system.load, g)
            same = np.array_equal(x_direct, x_scaled) and np.array_equal(x_direct, ref)
            print(f"N={N:<5d} g={name:<8s} bit-identical: {same}")
            status |= 0 if same else ACCEPTANCE_FAILURE
    return status


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--problem", default="Smooth", choices=KINDS)
    common.add_argument("--problem-file", help="key=value problem description (overrides --problem)")
    common.add_argument("--method", choices=MODES, help="defaults to the problem's own method")
    common.add_argument("--n-list", help="comma separated element counts")
    common.add_argument("--alpha", type=float)
    common.add_argument("--beta", type=float, help="relative interface/crack position inside its element")
    common.add_argument("--c", type=float, help="crack position")
    common.add_argument("--adjacent", action="store_true", help="Interface2 with interfaces in adjacent elements")
    common.add_argument("--out", help="CSV path (matrix dump for 'element')")
    common.add_argument("--plot", help="SVG path")
    common.add_argument("--quad-order", type=int)
    common.add_argument("--expect", type=float, help="expected log-log slope; mismatch exits with 2")
    common.add_argument("--slope-tol", type=float, default=0.1)
    common.add_argument("--all-points", action="store_true", help="fit every N instead of the upper half")

    parser = argparse.ArgumentParser(prog="sgfem1d", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("element", parents=[common], help="print element matrices")
    p.add_argument("--element", type=int, help="element index 1..N (default: every enriched element)")
    p.set_defaults(func=cmd_element)
    sub.add_parser("solve", parents=[common], help="one solve with a short report").set_defaults(func=cmd_solve)
    sub.add_parser("convergence", parents=[common], help="energy error study").set_defaults(func=cmd_convergence)
    p = sub.add_parser("condition", parents=[common], help="scaled condition number study")
    p.add_argument("--unscaled", action="store_true", help="also estimate the unscaled condition number")
    p.set_defaults(func=cmd_condition)
    sub.add_parser("eta", parents=[common], help="round-off study against the exact dofs").set_defaults(func=cmd_eta)
    p = sub.add_parser("assumptions", parents=[common], help="element-level scaling checks")
    p.add_argument("--family", default="interface", choices=("interface", "discontinuous", "singular", "quadratic"))
    p.set_defaults(func=cmd_assumptions)
    p = sub.add_parser("bauer", parents=[common], help="bit-identity under binary diagonal scaling")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bauer)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, ArithmeticError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
