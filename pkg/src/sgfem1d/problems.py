"""Model problems: -(a u')' = f on (0, 1) with manufactured exact solutions.

Every problem fixes u(0) by leaving vertex 0 without a hat dof. Unless a
Dirichlet value is also given at x = 1, the right end carries the natural
condition a u'(1) = g.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial

from .assembly import GlobalSpace, LoadSpec, build_space, element_breaks, element_shapes, shape_values
from .coefficient import CoefficientFn, constant, piecewise
from .enrichment import heaviside_space, interface_space, polynomial_space, power_space, singular_space
from .mesh import Mesh, Patch
from .quadrature import QuadRule, check_finite, nodes_weights

KINDS = ("Smooth", "Interface1", "Interface2", "Singular", "Discontinuous",
         "Validation1a", "Validation1b", "Validation3", "Validation4")
EPS0 = 1e-14


@dataclass(frozen=True, eq=False)
class Problem:
    kind: str
    params: dict
    a: CoefficientFn
    f: Callable
    u: Callable
    du: Callable
    g: float = 0.0
    dirichlet: dict = field(default_factory=lambda: {0.0: 0.0})  # position -> value
    f_breakpoints: tuple[float, ...] = ()
    f_singular: tuple[float, ...] = ()
    u_breakpoints: tuple[float, ...] = ()
    u_singular: tuple[float, ...] = ()
    broken: bool = False
    default_method: str = "SGFEM"
    enrichment: Callable[[Patch], object] | None = None
    exact_dofs: Callable[[GlobalSpace], np.ndarray] | None = None
    reverse: bool = False
    bound_to: int | None = None

    def bind(self, mesh: Mesh) -> "Problem":
        """Resolve mesh-dependent placement (interface nudges, adjacent interfaces)."""
        if self.bound_to == mesh.N:
            return self
        return make_problem(self.kind, mesh=mesh, **self.params)

    def dirichlet_vertices(self, mesh: Mesh) -> dict:
        return {int(round(pos * mesh.N)): val for pos, val in self.dirichlet.items()}

    def t1(self, mesh: Mesh) -> tuple[int, ...]:
        fixed = self.dirichlet_vertices(mesh)
        return tuple(i for i in range(mesh.N + 1) if i not in fixed)

    def load_spec(self, mesh: Mesh) -> LoadSpec:
        return LoadSpec(self.f, self.f_breakpoints, self.f_singular, self.g, self.dirichlet_vertices(mesh))

    def space(self, mesh: Mesh, method: str | None = None) -> GlobalSpace:
        return build_space(mesh, self.t1(mesh), self.enrichment, method or self.default_method,
                           reverse=self.reverse)

    def to_text(self) -> str:
        lines = [f"kind={self.kind}"]
        for k, v in sorted(self.params.items()):
            lines.append(f"{k}={_fmt(v)}")
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(v: str):
    if v in ("true", "false"):
        return v == "true"
    if v == "None":
        return None
    try:
        return int(v)
    except ValueError:
        return float(v)


def problem_from_text(text: str) -> Problem:
    items = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        k, _, v = line.partition("=")
        items[k.strip()] = v.strip()
    kind = items.pop("kind")
    return make_problem(kind, **{k: _parse(v) for k, v in items.items()})


def nudge(p: float, mesh: Mesh, eps0: float = EPS0) -> float:
    """Move p off the nearest vertex to relative distance at least eps0."""
    h = mesh.h
    m = min(max(int(math.floor(p * mesh.N)), 0), mesh.N - 1)
    xm, xn = float(mesh.vertices[m]), float(mesh.vertices[m + 1])
    beta = (p - xm) / h
    if beta < eps0:
        return xm + eps0 * h
    if 1.0 - beta < eps0:
        return xn - eps0 * h
    return p


# manufactured solutions ---------------------------------------------------


def _u0():
    return Polynomial([0, 0, 1, -2, 1])  # x^2 (1 - x)^2


def manufactured_smooth() -> Problem:
    return make_problem("Smooth")


def _smooth(mesh=None, degree=2):
    u = _u0()
    du, d2u = u.deriv(), u.deriv(2)
    return dict(a=constant(1.0), u=u, du=du, f=lambda x: -d2u(x),
                enrichment=lambda p: polynomial_space(p, degree))


def _interface_solution(a: CoefficientFn):
    """u = int_0^x t(1 - t)/a(t) dt for piecewise constant a."""
    G = Polynomial([0, 0, 0.5, -1.0 / 3.0])
    edges = (0.0,) + tuple(a.breakpoints) + (1.0,)

    def u(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for j, v in enumerate(a.values):
            lo, hi = edges[j], edges[j + 1]
            top = np.clip(x, lo, hi)
            out = out + (G(top) - G(lo)) / v
        return out

    def du(x):
        return x * (1 - x) / a(x)

    return u, du


def manufactured_interface(a: CoefficientFn, **params) -> Problem:
    u, du = _interface_solution(a)

    def recipe(p: Patch):
        lo, hi = p.interval
        return interface_space(p, a) if a.breaks_in(lo, hi) else None

    return Problem(kind=params.pop("kind", "Interface"), params=params, a=a, u=u, du=du,
                   f=lambda x: 2 * x - 1, u_breakpoints=a.breakpoints, enrichment=recipe)


def _tied(mesh: Mesh, beta: float) -> float:
    """Point at relative position beta inside element N/2 + 1, kept at least
    EPS0 (relative) away from both of its vertices."""
    m = mesh.N // 2
    beta = min(max(beta, EPS0), 1.0 - EPS0)
    return float(mesh.vertices[m]) + beta * mesh.h


def _interface1(mesh=None, b_star=0.37, beta=None):
    b = b_star
    if mesh is not None:
        b = nudge(_tied(mesh, beta) if beta is not None else b_star, mesh)
    if not 0 < b < 1:
        raise ValueError("interface point must lie in (0, 1)")
    params = dict(kind="Interface1", b_star=b_star) if beta is None else dict(kind="Interface1", beta=beta)
    return manufactured_interface(piecewise([b], [0.5, 1.0]), **params)


def _interface2(mesh=None, b1=0.3, b2=0.7, adjacent=False, beta=0.3):
    if adjacent and mesh is not None:
        m = mesh.N // 2
        h = mesh.h
        b1 = float(mesh.vertices[m - 1]) + 0.5 * h
        b2 = float(mesh.vertices[m]) + beta * h
    if mesh is not None:
        b1, b2 = nudge(b1, mesh), nudge(b2, mesh)
    if not 0 < b1 < b2 < 1:
        raise ValueError("need 0 < b1 < b2 < 1")
    params = dict(kind="Interface2", adjacent=adjacent, beta=beta)
    if not adjacent:
        params.update(b1=b1, b2=b2)
    return manufactured_interface(piecewise([b1, b2], [1.0, 0.5, 1.0]), **params)


def manufactured_singular(alpha: float = 0.75, D: float = 0.25) -> Problem:
    return make_problem("Singular", alpha=alpha, D=D)


def _singular(mesh=None, alpha=0.75, D=0.25, gamma=None):
    if not 0.5 < alpha < 1.5 or alpha == 1.0:
        raise ValueError("alpha must lie in (1/2, 3/2) and differ from 1")
    if gamma is not None and mesh is not None:
        D = mesh.h**gamma
    u0 = _u0()
    du0, d2u0 = u0.deriv(), u0.deriv(2)

    def u(x):
        return np.asarray(x, dtype=float) ** alpha + u0(x)

    def du(x):
        x = np.asarray(x, dtype=float)
        return alpha * x ** (alpha - 1) + du0(x)

    def f(x):
        x = np.asarray(x, dtype=float)
        return -alpha * (alpha - 1) * x ** (alpha - 2) - d2u0(x)

    def recipe(p: Patch):
        return singular_space(p, alpha) if p.interval[0] < D else None

    return dict(a=constant(1.0), u=u, du=du, f=f, g=alpha + float(du0(1.0)), f_singular=(0.0,),
                u_singular=(0.0,), enrichment=recipe)


def manufactured_discontinuous(c: float = 0.37) -> Problem:
    return make_problem("Discontinuous", c=c)


def _discontinuous(mesh=None, c=0.37, beta=None, jump=1.0):
    if mesh is not None:
        c = nudge(_tied(mesh, beta) if beta is not None else c, mesh)
    if not 0 < c < 1:
        raise ValueError("crack point must lie in (0, 1)")
    # smooth part: takes the value `jump` at x = 1 so that u(1) = 0, flat at c
    w = Polynomial([0, 0, 3, -2]) * jump
    bump = _u0() * Polynomial([-c, 1])
    kappa = -w.deriv()(c) / bump.deriv()(c)
    ut = w + kappa * bump
    dut, d2ut = ut.deriv(), ut.deriv(2)

    def s(x):
        return np.where(np.asarray(x) < c, 0.0, -jump)

    def u(x):
        return ut(x) + s(x)

    return dict(a=constant(1.0), u=u, du=dut, f=lambda x: -d2ut(x), dirichlet={0.0: 0.0, 1.0: 0.0},
                u_breakpoints=(c,), broken=True,
                enrichment=lambda p: heaviside_space(p, c) if p.interval[0] < c < p.interval[1] else None)


def _validation1(mesh=None, reverse=False):
    def exact(space):
        x = space.mesh.vertices
        return np.array([x[v] for v, _, _ in space.dofmap.dofs])

    return dict(a=constant(1.0), u=lambda x: np.asarray(x, dtype=float), du=lambda x: np.ones_like(x),
                f=lambda x: np.zeros_like(x), dirichlet={0.0: 0.0, 1.0: 1.0}, default_method="FEM",
                exact_dofs=exact, reverse=reverse)


def _validation34(mesh=None, stable=False):
    def exact(space):
        x = space.mesh.vertices
        out = []
        for v, kind, _ in space.dofmap.dofs:
            if kind == "enr":
                out.append(1.0)
            else:
                out.append(x[v] * x[v] if space.mode == "SGFEM" else 0.0)
        return np.array(out)

    return dict(a=constant(1.0), u=lambda x: np.asarray(x, dtype=float) ** 2, du=lambda x: 2 * np.asarray(x),
                f=lambda x: np.full_like(x, -2.0), g=2.0, default_method="SGFEM" if stable else "GFEM",
                enrichment=lambda p: power_space(p, 2), exact_dofs=exact)


_BUILDERS = {
    "Smooth": _smooth,
    "Interface1": _interface1,
    "Interface2": _interface2,
    "Singular": _singular,
    "Discontinuous": _discontinuous,
    "Validation1a": lambda mesh=None: _validation1(mesh, False),
    "Validation1b": lambda mesh=None: _validation1(mesh, True),
    "Validation3": lambda mesh=None: _validation34(mesh, False),
    "Validation4": lambda mesh=None: _validation34(mesh, True),
}


def make_problem(kind: str, mesh: Mesh | None = None, **params) -> Problem:
    if kind not in _BUILDERS:
        raise ValueError(f"unknown problem kind {kind!r}; choose from {KINDS}")
    try:
        built = _BUILDERS[kind](mesh=mesh, **params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {kind}: {exc}") from None
    if isinstance(built, Problem):
        prob = replace(built, params=dict(params))
    else:
        prob = Problem(kind=kind, params=dict(params), **built)
    return replace(prob, bound_to=mesh.N if mesh is not None else None)


# energy norm --------------------------------------------------------------


def energy_error(problem: Problem, coeffs, space: GlobalSpace, rule: QuadRule | None = None) -> float:
    """Energy norm of u - u_h, element by element (broken across a crack)."""
    mesh = space.mesh
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (space.dofmap.n,):
        raise ValueError("coefficient vector does not match the dof count")
    fixed = problem.dirichlet_vertices(mesh)
    total = 0.0
    for k in range(1, mesh.N + 1):
        shapes = element_shapes(space, k, with_constrained=True)
        xa, xb = mesh.element(k)
        brk, sing = element_breaks(shapes, problem.a, xa, xb, problem.u_breakpoints, problem.u_singular)
        x, w, panels = nodes_weights(xa, xb, brk, sing, rule)
        with np.errstate(all="ignore"):
            err = np.asarray(problem.du(x), dtype=float) * np.ones_like(x)
        if shapes:
            _, D = shape_values(mesh, k, shapes, x)
            c = np.array([coeffs[s.dof] if s.dof >= 0 else fixed.get(s.vertex, 0.0) for s in shapes])
            err = err - c @ D
        integrand = np.asarray(problem.a(x), dtype=float) * err * err
        check_finite(integrand, panels, "energy integrand")
        total += float(np.dot(w, integrand))
    return math.sqrt(total)


def energy_norm(problem: Problem, rule: QuadRule | None = None) -> float:
    """||u||_E computed on the whole interval, split at the solution's breakpoints."""
    from .quadrature import integrate

    brk = tuple(problem.u_breakpoints) + tuple(problem.a.breakpoints)
    return math.sqrt(integrate(lambda x: problem.a(x) * problem.du(x) ** 2, 0.0, 1.0, brk,
                               problem.u_singular or None, rule))
