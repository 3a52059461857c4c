import numpy as np
import pytest

from sgfem1d.assembly import evaluate
from sgfem1d.coefficient import constant, piecewise
from sgfem1d.linalg import band_lu_nopivot, solve
from sgfem1d.mesh import uniform_mesh
from sgfem1d.problems import (EPS0, energy_error, energy_norm, make_problem, manufactured_discontinuous,
                              manufactured_interface, manufactured_smooth, nudge, problem_from_text)
from sgfem1d.quadrature import QuadRule, integrate
from sgfem1d.studies import build_system, solve_problem


def exact_and_system(kind, N):
    system = build_system(make_problem(kind), N)
    prob = make_problem(kind).bind(system.space.mesh)
    return prob.exact_dofs(system.space), system, prob


@pytest.mark.parametrize("N", [4, 50])
def test_validation3_exact_vector(N):
    x, system, prob = exact_and_system("Validation3", N)
    assert np.all(x[0::2] == 1.0) and np.all(x[1::2] == 0.0)
    assert len(x) == 2 * N + 1
    assert energy_error(prob, x, system.space) <= 1e-12
    r = system.matrix.matvec(x) - system.load
    assert np.max(np.abs(r)) <= 1e-12 * np.max(np.abs(system.load))


@pytest.mark.parametrize("N", [4, 50])
def test_validation4_exact_vector(N):
    x, system, prob = exact_and_system("Validation4", N)
    i = np.arange(1, N + 1)
    assert np.all(x[0::2] == 1.0)
    assert np.allclose(x[1::2], (i / N) ** 2, rtol=1e-15)
    assert energy_error(prob, x, system.space) <= 1e-12


@pytest.mark.parametrize("kind", ["Validation1a", "Validation1b"])
def test_validation1_exact_vector(kind):
    N = 40
    x, system, prob = exact_and_system(kind, N)
    assert system.dofmap.n == N - 1
    vert = [v for v, _, _ in system.dofmap.dofs]
    assert np.allclose(x, np.array(vert) / N, rtol=1e-15)
    xh = solve(band_lu_nopivot(system.matrix), system.load)
    assert np.max(np.abs(xh - x)) <= 1e-13
    assert energy_error(prob, x, system.space) <= 1e-12
    if kind == "Validation1b":
        assert vert == sorted(vert, reverse=True)


def test_smooth_manufactured():
    p = manufactured_smooth()
    assert abs(integrate(p.f, 0.0, 1.0)) <= 1e-14
    assert p.u(0.5) == pytest.approx(1 / 16, rel=1e-15)
    assert p.du(0.0) == 0.0 and p.du(1.0) == 0.0 and p.u(0.0) == 0.0
    # symbolic value of int (2x(1-x)(1-2x))^2
    assert energy_norm(p) ** 2 == pytest.approx(2 / 105, rel=1e-14)


def test_interface_manufactured():
    p = manufactured_interface(constant(1.0))
    x = np.linspace(0, 1, 11)
    assert np.allclose(p.u(x), x**2 / 2 - x**3 / 3, atol=1e-16)
    b = 0.37
    p = manufactured_interface(piecewise([b], [0.5, 1.0]))
    assert p.du(b - 1e-12) / p.du(b + 1e-12) == pytest.approx(2.0, rel=1e-10)
    assert abs(integrate(p.f, 0.0, 1.0)) <= 1e-14
    e8 = energy_norm(p)
    e16 = energy_norm(p, QuadRule(order=16))
    assert e8 == pytest.approx(e16, rel=1e-12)
    g2 = lambda t: (t * (1 - t)) ** 2
    oracle = integrate(g2, 0, b) / 0.5 + integrate(g2, b, 1.0)
    assert e8**2 == pytest.approx(oracle, rel=1e-13)


def test_discontinuous_manufactured():
    c = 0.37
    p = manufactured_discontinuous(c)
    assert p.u(c - 1e-15) - p.u(c) == pytest.approx(1.0, abs=1e-12)
    assert abs(p.du(c)) <= 1e-14
    assert abs(p.u(0.0)) <= 1e-15 and abs(p.u(1.0)) <= 1e-14
    total = energy_norm(p) ** 2
    halves = integrate(lambda x: p.du(x) ** 2, 0, c) + integrate(lambda x: p.du(x) ** 2, c, 1)
    assert total == pytest.approx(halves, rel=1e-13)


def test_zero_coefficients_give_energy_norm():
    for kind in ("Smooth", "Interface1", "Singular"):
        system = build_system(make_problem(kind), 16)
        prob = make_problem(kind).bind(system.space.mesh)
        err = energy_error(prob, np.zeros(system.dofmap.n), system.space)
        assert err == pytest.approx(energy_norm(prob), rel=1e-12)


def test_fem_rate_smooth():
    p = make_problem("Smooth")
    errs = []
    for N in (32, 64):
        sol = solve_problem(p, N, "FEM")
        errs.append(energy_error(sol.problem, sol.coeffs, sol.space))
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.02)


@pytest.mark.parametrize("kind", ["Smooth", "Interface1", "Interface2", "Discontinuous"])
def test_galerkin_orthogonality(kind):
    sol = solve_problem(make_problem(kind), 16)
    prob, space, mesh = sol.problem, sol.space, sol.mesh
    rng = np.random.default_rng(7)
    norm_u = energy_norm(prob)
    for _ in range(20):
        cv = rng.standard_normal(space.dofmap.n)
        total = 0.0
        vv = 0.0
        for k in range(1, mesh.N + 1):
            a, b = mesh.element(k)
            brk = tuple(prob.u_breakpoints) + tuple(prob.a.breakpoints)
            brk += tuple(p for f in [*space.functions(k - 1), *space.functions(k)] for p in f.breakpoints)
            brk = tuple(p for p in brk if a < p < b)
            x = np.clip((a + b) / 2, a, b)
            total += integrate(lambda x: prob.a(x) * (prob.du(x) - evaluate(space, sol.coeffs, x)[1])
                               * evaluate(space, cv, x)[1], a, b, brk)
            vv += integrate(lambda x: prob.a(x) * evaluate(space, cv, x)[1] ** 2, a, b, brk)
        assert abs(total) <= 1e-10 * norm_u * np.sqrt(vv)


def test_best_approximation():
    N = 16
    sol = solve_problem(make_problem("Smooth"), N)
    prob, space = sol.problem, sol.space
    err = energy_error(prob, sol.coeffs, space)
    x = space.mesh.vertices
    d2u = prob.u.deriv(2)
    nodal = np.zeros(space.dofmap.n)
    taylor = np.zeros(space.dofmap.n)
    for d, (v, kind, _) in enumerate(space.dofmap.dofs):
        if kind == "hat":
            nodal[d] = taylor[d] = prob.u(x[v])
        else:
            taylor[d] = d2u(x[v]) / 2
    assert err <= energy_error(prob, taylor, space) <= energy_error(prob, nodal, space)


def test_nudge():
    mesh = uniform_mesh(10)
    assert nudge(0.5, mesh) == pytest.approx(0.5 + EPS0 * mesh.h, abs=1e-18)
    assert nudge(0.6, mesh) > 0.6 - 1e-15 * mesh.h and nudge(0.6, mesh) != 0.6
    assert nudge(0.55, mesh) == 0.55


@pytest.mark.parametrize("beta", [0.0, 1e-10, 1 - 1e-10, 1.0])
def test_interface_near_vertex_keeps_enrichment(beta):
    system = build_system(make_problem("Interface1", beta=beta), 10)
    assert system.space.t2 == (5, 6)


def test_serialization_round_trip():
    for kind, params in [("Interface1", {"beta": 0.25}), ("Singular", {"alpha": 0.6, "D": 0.5}),
                         ("Discontinuous", {"c": 0.41}), ("Interface2", {"adjacent": True, "beta": 0.7}),
                         ("Validation4", {})]:
        p = make_problem(kind, **params)
        q = problem_from_text(p.to_text())
        assert q.kind == kind and q.params == p.params
        x = np.linspace(0.01, 0.99, 7)
        assert np.array_equal(p.u(x), q.u(x))


def test_make_problem_errors():
    with pytest.raises(ValueError):
        make_problem("Nope")
    with pytest.raises(ValueError):
        make_problem("Singular", alpha=1.0)
    with pytest.raises(ValueError):
        make_problem("Smooth", bogus=3)
    with pytest.raises(ValueError):
        make_problem("Discontinuous", c=1.5)
