"""Trial space, dof numbering, element and global stiffness, scaling checks.

Dofs are numbered vertex by vertex: the hat dof of a vertex (if the vertex
carries one) comes first, followed by its enrichment dofs. Vertices outside
the hat set simply get no hat dof, which is how essential conditions are
imposed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .coefficient import CoefficientFn
from .enrichment import LocalSpace, ModifiedLocalSpace, modify
from .linalg import BandedSymMatrix, extreme_eigs, scaled_matrix  # noqa: F401  (re-export)
from .mesh import Mesh, element_hats, patch
from .quadrature import QuadRule, check_finite, nodes_weights

MODES = ("FEM", "GFEM", "SGFEM")


@dataclass(frozen=True)
class DofMap:
    dofs: tuple[tuple[int, str, int], ...]
    index: dict

    @property
    def n(self) -> int:
        return len(self.dofs)

    def hat_dofs(self) -> list[int]:
        return [d for d, (_, kind, _) in enumerate(self.dofs) if kind == "hat"]

    def enr_dofs(self) -> list[int]:
        return [d for d, (_, kind, _) in enumerate(self.dofs) if kind == "enr"]


@dataclass(frozen=True)
class GlobalSpace:
    mesh: Mesh
    t1: tuple[int, ...]
    t2: tuple[int, ...]
    local_spaces: dict
    mode: str
    dofmap: DofMap

    def functions(self, i: int):
        sp = self.local_spaces.get(i)
        return sp.functions if sp is not None else ()

    def support(self, i: int, j: int) -> tuple[int, ...]:
        f = self.local_spaces[i].functions[j]
        return getattr(f, "support", None) or self.local_spaces[i].patch.elements


def build_space(mesh: Mesh, t1, local_space: Callable | None = None, mode: str = "SGFEM",
                reverse: bool = False) -> GlobalSpace:
    """Assemble the trial space description.

    local_space(patch) returns a LocalSpace (or None); it is ignored in FEM mode,
    used as is in GFEM mode and modified in SGFEM mode.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    t1 = tuple(sorted(set(t1)))
    spaces = {}
    if mode != "FEM" and local_space is not None:
        for i in range(mesh.N + 1):
            raw = local_space(patch(mesh, i))
            if raw is None or raw.n == 0:
                continue
            sp = modify(raw) if mode == "SGFEM" else raw
            if sp.n:
                spaces[i] = sp
    t2 = tuple(sorted(spaces))
    order = range(mesh.N, -1, -1) if reverse else range(mesh.N + 1)
    t1set = set(t1)
    dofs = []
    for i in order:
        if i in t1set:
            dofs.append((i, "hat", 0))
        if i in spaces:
            dofs += [(i, "enr", j) for j in range(spaces[i].n)]
    if not dofs:
        raise ValueError("the trial space has no degrees of freedom")
    dm = DofMap(tuple(dofs), {d: n for n, d in enumerate(dofs)})
    return GlobalSpace(mesh, t1, t2, spaces, mode, dm)


# element level ------------------------------------------------------------


@dataclass(frozen=True)
class Shape:
    dof: int  # -1 for a constrained hat (used only for lifting)
    vertex: int
    kind: str
    j: int
    fn: object = None


def element_shapes(space: GlobalSpace, k: int, with_constrained: bool = False) -> list[Shape]:
    out = []
    t1 = set(space.t1)
    for v in (k - 1, k):
        if v in t1:
            out.append(Shape(space.dofmap.index[(v, "hat", 0)], v, "hat", 0))
        elif with_constrained:
            out.append(Shape(-1, v, "hat", 0))
        for j, f in enumerate(space.functions(v)):
            if k in space.support(v, j):
                out.append(Shape(space.dofmap.index[(v, "enr", j)], v, "enr", j, f))
    return out


def element_breaks(shapes, a_coef: CoefficientFn | None, xa: float, xb: float, extra=(), singular=()):
    brk = set(p for p in extra if xa < p < xb)
    sing = set(p for p in singular if xa <= p <= xb)
    if a_coef is not None:
        brk.update(a_coef.breaks_in(xa, xb))
    for s in shapes:
        if s.fn is not None:
            brk.update(s.fn.breaks_in(xa, xb))
            sing.update(p for p in s.fn.singular_points if xa <= p <= xb)
    return tuple(sorted(brk)), tuple(sorted(sing))


def shape_values(mesh: Mesh, k: int, shapes, x: np.ndarray):
    """Values and derivatives (rows = shapes) on element k."""
    left, right = element_hats(mesh, k, x)
    hats = {k - 1: left, k: right}
    V = np.empty((len(shapes), len(x)))
    D = np.empty((len(shapes), len(x)))
    for r, s in enumerate(shapes):
        nv, nd = hats[s.vertex]
        if s.kind == "hat":
            V[r] = nv
            D[r] = nd
        else:
            fv, fd = s.fn.eval(x)
            V[r] = nv * fv
            D[r] = nd * fv + nv * fd
    return V, D


def gram(D: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Symmetric D diag(weights) D^T, upper triangle computed and mirrored."""
    K = (D * weights) @ D.T
    return np.triu(K) + np.triu(K, 1).T


@dataclass
class ElementMatrix:
    element: int
    matrix: np.ndarray
    shapes: list

    def _idx(self, kind):
        return [r for r, s in enumerate(self.shapes) if s.kind == kind]

    @property
    def A11(self) -> np.ndarray:
        h = self._idx("hat")
        return self.matrix[np.ix_(h, h)]

    @property
    def A12(self) -> np.ndarray:
        return self.matrix[np.ix_(self._idx("hat"), self._idx("enr"))]

    @property
    def A22(self) -> np.ndarray:
        e = self._idx("enr")
        return self.matrix[np.ix_(e, e)]

    @property
    def hat_vertices(self) -> list[int]:
        return [s.vertex for s in self.shapes if s.kind == "hat"]

    @property
    def enr_vertices(self) -> list[int]:
        return [s.vertex for s in self.shapes if s.kind == "enr"]

    @property
    def enr_dofs(self) -> list[int]:
        return [s.dof for s in self.shapes if s.kind == "enr"]

    @property
    def associated_count(self) -> int:
        return len(set(self.enr_vertices))


def element_stiffness(k: int, space: GlobalSpace, a: CoefficientFn, rule: QuadRule | None = None,
                      with_constrained: bool = False) -> ElementMatrix:
    mesh = space.mesh
    shapes = element_shapes(space, k, with_constrained)
    xa, xb = mesh.element(k)
    brk, sing = element_breaks(shapes, a, xa, xb)
    x, w, panels = nodes_weights(xa, xb, brk, sing, rule)
    if not shapes:
        return ElementMatrix(k, np.zeros((0, 0)), shapes)
    _, D = shape_values(mesh, k, shapes, x)
    aw = np.asarray(a(x), dtype=float) * w
    check_finite(D * aw, panels, "stiffness integrand")
    return ElementMatrix(k, gram(D, aw), shapes)


# global level -------------------------------------------------------------


@dataclass(frozen=True)
class LoadSpec:
    f: Callable
    breakpoints: tuple[float, ...] = ()
    singular_at: tuple[float, ...] = ()
    g: float = 0.0  # natural datum a u'(1)
    dirichlet: dict = field(default_factory=dict)  # vertex -> prescribed value


@dataclass
class GlobalSystem:
    matrix: BandedSymMatrix
    load: np.ndarray
    dofmap: DofMap
    space: GlobalSpace
    coefficient: CoefficientFn
    elements: list


def bandwidth_of(space: GlobalSpace) -> int:
    w = 0
    for k in range(1, space.mesh.N + 1):
        dofs = [s.dof for s in element_shapes(space, k)]
        if dofs:
            w = max(w, max(dofs) - min(dofs))
    return w


def assemble(space: GlobalSpace, a: CoefficientFn, load: LoadSpec, rule: QuadRule | None = None) -> GlobalSystem:
    mesh = space.mesh
    n = space.dofmap.n
    A = BandedSymMatrix(n, bandwidth_of(space))
    b = np.zeros(n)
    lifted = {v: u for v, u in load.dirichlet.items() if u != 0.0}
    elements = []
    for k in range(1, mesh.N + 1):
        lift_here = any(v in lifted for v in (k - 1, k))
        shapes = element_shapes(space, k, with_constrained=lift_here)
        xa, xb = mesh.element(k)
        brk, sing = element_breaks(shapes, a, xa, xb, load.breakpoints, load.singular_at)
        x, w, panels = nodes_weights(xa, xb, brk, sing, rule)
        V, D = shape_values(mesh, k, shapes, x)
        aw = np.asarray(a(x), dtype=float) * w
        K = gram(D, aw)
        fx = np.asarray(load.f(x), dtype=float) * np.ones_like(x)
        check_finite(fx, panels, "load")
        check_finite(D * aw, panels, "stiffness integrand")
        rhs = V @ (fx * w)
        free = [r for r, s in enumerate(shapes) if s.dof >= 0]
        for r in free:
            gr = shapes[r].dof
            b[gr] += rhs[r]
            for c in free:
                gc = shapes[c].dof
                if gc <= gr:
                    A.add(gr, gc, K[r, c])
            for c, s in enumerate(shapes):
                if s.dof < 0 and s.vertex in lifted:
                    b[gr] -= K[r, c] * lifted[s.vertex]
        kept = [shapes[r] for r in free]
        elements.append(ElementMatrix(k, K[np.ix_(free, free)], kept))
    if load.g:
        shapes = element_shapes(space, mesh.N)
        V, _ = shape_values(mesh, mesh.N, shapes, np.array([1.0]))
        for r, s in enumerate(shapes):
            b[s.dof] += load.g * V[r, 0]
    if not np.all(np.isfinite(b)):
        raise ArithmeticError("load vector is not finite")
    return GlobalSystem(A, b, space.dofmap, space, a, elements)


def evaluate(space: GlobalSpace, coeffs, x) -> tuple[np.ndarray, np.ndarray]:
    """u_h and u_h' at points x."""
    mesh = space.mesh
    x = np.atleast_1d(np.asarray(x, dtype=float))
    coeffs = np.asarray(coeffs, dtype=float)
    val = np.zeros_like(x)
    der = np.zeros_like(x)
    ks = np.array([mesh.locate(t) for t in x])
    for k in np.unique(ks):
        m = ks == k
        shapes = element_shapes(space, int(k))
        if not shapes:
            continue
        V, D = shape_values(mesh, int(k), shapes, x[m])
        c = coeffs[[s.dof for s in shapes]]
        val[m] = c @ V
        der[m] = c @ D
    return val, der


# scaling diagnostics ------------------------------------------------------


def diagonal_delta(em: ElementMatrix) -> np.ndarray:
    """Default per-element scaling: inverse square roots of the A22 diagonal."""
    return 1.0 / np.sqrt(np.diag(em.A22))


def enriched_elements(elements) -> list[ElementMatrix]:
    return [em for em in elements if len(em.enr_dofs)]


def scaled_block(em: ElementMatrix, scaling: Callable = diagonal_delta) -> np.ndarray:
    d = np.asarray(scaling(em), dtype=float)
    return em.A22 * np.outer(d, d)


def assumption2(elements, scaling: Callable = diagonal_delta):
    """Extreme eigenvalues of the scaled element blocks over all enriched elements."""
    lo, hi = np.inf, -np.inf
    per = {}
    for em in enriched_elements(elements):
        ev = np.linalg.eigvalsh(scaled_block(em, scaling))
        per[em.element] = ev
        lo, hi = min(lo, ev[0]), max(hi, ev[-1])
    return lo, hi, per


@dataclass(frozen=True)
class Assumption3Row:
    vertex: int
    dof: int
    delta_sum: float
    a22_diag: float
    ratio: float


def delta_and_assumption3(space: GlobalSpace, elements, scaling: Callable = diagonal_delta) -> list[Assumption3Row]:
    delta = {}
    diag = {}
    for em in enriched_elements(elements):
        d = np.asarray(scaling(em), dtype=float)
        for r, dof in enumerate(em.enr_dofs):
            delta[dof] = delta.get(dof, 0.0) + d[r] ** -2
            diag[dof] = diag.get(dof, 0.0) + em.A22[r, r]
    rows = []
    for dof in sorted(delta):
        v = space.dofmap.dofs[dof][0]
        rows.append(Assumption3Row(v, dof, delta[dof], diag[dof], delta[dof] / diag[dof]))
    return rows


def quadratic_delta(h: float) -> Callable:
    """Analytic scaling h^{-3/2} for quadratic polynomial enrichment."""
    return lambda em: np.full(len(em.enr_dofs), h**-1.5)


def interface_delta(beta: float, h: float) -> Callable:
    """Analytic scaling of the element cut by a single interface at x_m + beta h.

    Rows are ordered (vertex m, vertex m+1).
    """
    d1 = h**-0.5 * beta**-0.5 / (1 - beta)
    d2 = h**-0.5 / beta / (1 - beta) ** 0.5
    return lambda em: np.array([d1, d2])[: len(em.enr_dofs)]


def heaviside_delta(h: float) -> Callable:
    return lambda em: np.full(len(em.enr_dofs), h**0.5 / 2)


@dataclass
class Sandwich:
    kappa: float
    kappa11: float
    lower: float
    upper: float
    constants: dict
    # relative slack covering the eigenvalue tolerance of the three estimates
    slack: float = 0.0

    @property
    def holds(self) -> bool:
        return self.lower * (1 - self.slack) <= self.kappa <= self.upper * (1 + self.slack)


def assumption1(system: GlobalSystem, dense_limit: int = 4000) -> tuple[float, float, str]:
    """Almost-orthogonality constants: bounds of B(v1+v2, v1+v2) / (B(v1,v1) + B(v2,v2)).

    Exact extreme generalized eigenvalues of A against blockdiag(A11, A22) when
    the system is small enough for a dense factorization. Otherwise the
    coefficient bounds, which are valid for continuous enrichments only.
    """
    lo_a, hi_a = system.coefficient.bounds
    n = system.dofmap.n
    hat, enr = system.dofmap.hat_dofs(), system.dofmap.enr_dofs()
    if not enr or not hat:
        return 1.0, 1.0, "decoupled"
    if n > dense_limit:
        return lo_a / hi_a, hi_a / lo_a, "coefficient bounds"
    M = system.matrix.to_dense()
    B = np.zeros_like(M)
    B[np.ix_(hat, hat)] = M[np.ix_(hat, hat)]
    B[np.ix_(enr, enr)] = M[np.ix_(enr, enr)]
    L = np.linalg.cholesky(B)
    C = np.linalg.solve(L, np.linalg.solve(L, M).T)
    ev = np.linalg.eigvalsh(0.5 * (C + C.T))
    return float(ev[0]), float(ev[-1]), "generalized eigenvalues"


def condition_sandwich(system: GlobalSystem, scaling: Callable = diagonal_delta, tol: float = 1e-8) -> Sandwich:
    """Two-sided bound on the scaled condition number from the hat block and
    the element-level constants."""
    L1, U1, source = assumption1(system)
    L2, U2, _ = assumption2(system.elements, scaling)
    rows = delta_and_assumption3(system.space, system.elements, scaling)
    ratios = [r.ratio for r in rows] or [1.0]
    L3, U3 = min(ratios), max(ratios)
    full = extreme_eigs(system.matrix, tol, unscaled=False)
    A11 = system.matrix.submatrix(system.dofmap.hat_dofs())
    r11 = extreme_eigs(A11, tol, unscaled=False)
    k11 = r11.scaled_kappa
    if not np.isfinite(L2):
        L2 = U2 = 1.0
    lower = L1 / U1 * k11
    upper = k11 * (U1 / L1) * max(1.0, U2 * U3 / r11.h_lambda_max) / min(1.0, L2 * L3 / r11.h_lambda_min)
    consts = dict(L1=L1, U1=U1, L2=L2, U2=U2, L3=L3, U3=U3, assumption1=source,
                  lam_min_11=r11.h_lambda_min, lam_max_11=r11.h_lambda_max)
    return Sandwich(full.scaled_kappa, k11, lower, upper, consts, slack=10 * tol)
