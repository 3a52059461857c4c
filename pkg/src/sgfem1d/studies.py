"""Experiment drivers: convergence, conditioning, round-off, assumption checks.

Results are lists of StudyRecord; CSV and a small hand-written SVG plot are
the output formats.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field, fields

import numpy as np

from .assembly import (GlobalSystem, assemble, assumption2, delta_and_assumption3, diagonal_delta,
                       element_stiffness, heaviside_delta, interface_delta)
from .enrichment import power_function
from .linalg import EPS, band_lu_nopivot, eta, extreme_eigs, solve
from .mesh import Mesh, uniform_mesh
from .problems import Problem, energy_error, make_problem
from .quadrature import QuadRule, integrate

CSV_FIELDS = ("N", "h", "dofs", "energy_error", "kappa2", "scaled_kappa", "eta", "wall_time")


class StudyError(RuntimeError):
    def __init__(self, N: int, cause: Exception):
        super().__init__(f"N={N}: {cause}")
        self.N = N


@dataclass
class StudyRecord:
    N: int
    h: float
    dofs: int
    energy_error: float | None = None
    kappa2: float | None = None
    scaled_kappa: float | None = None
    eta: float | None = None
    wall_time: float | None = None
    extra: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r2: float
    range: tuple[int, int]


@dataclass
class Solution:
    mesh: Mesh
    problem: Problem
    system: GlobalSystem
    coeffs: np.ndarray

    @property
    def space(self):
        return self.system.space


def solve_problem(problem: Problem, N: int, method: str | None = None, rule: QuadRule | None = None) -> Solution:
    mesh = uniform_mesh(N)
    bound = problem.bind(mesh)
    space = bound.space(mesh, method)
    system = assemble(space, bound.a, bound.load_spec(mesh), rule)
    coeffs = solve(band_lu_nopivot(system.matrix), system.load)
    return Solution(mesh, bound, system, coeffs)


def _upper(items):
    """Upper half of a sorted sequence; the median point is kept for odd lengths."""
    items = list(items)
    if len(items) <= 2:
        return items
    return items[len(items) // 2 :] if len(items) % 2 == 0 else items[(len(items) - 1) // 2 :]


def fit_loglog(xs, ys, upper_half: bool = True) -> FitResult:
    """Least squares line through (log10 x, log10 y).

    With upper_half, only the points with the larger half of x are used.
    """
    pts = sorted(zip(xs, ys))
    if upper_half:
        pts = _upper(pts)
    if len(pts) < 2:
        raise ValueError("need at least two points for a fit")
    lx = np.log10([p[0] for p in pts])
    ly = np.log10([p[1] for p in pts])
    slope, icpt = np.polyfit(lx, ly, 1)
    pred = slope * lx + icpt
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum((ly - pred) ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return FitResult(float(slope), float(icpt), min(max(r2, 0.0), 1.0), (pts[0][0], pts[-1][0]))


def _check_ns(Ns):
    Ns = list(Ns)
    if len(Ns) < 3 or Ns != sorted(Ns) or len(set(Ns)) != len(Ns):
        raise ValueError("need at least three distinct ascending N values")
    return Ns


def convergence_study(problem: Problem, method: str | None, Ns, rule: QuadRule | None = None,
                      upper_half: bool = True):
    """Energy error per N; the fitted slope is the rate in h."""
    records = []
    for N in _check_ns(Ns):
        t0 = time.perf_counter()
        try:
            sol = solve_problem(problem, N, method, rule)
            err = energy_error(sol.problem, sol.coeffs, sol.space, rule)
        except Exception as exc:  # noqa: BLE001 - reported with the offending N
            raise StudyError(N, exc) from exc
        records.append(StudyRecord(N, sol.mesh.h, sol.system.dofmap.n, energy_error=err,
                                   wall_time=time.perf_counter() - t0))
    used = _upper(records) if upper_half else records
    fit = fit_loglog([r.h for r in used], [r.energy_error for r in used], upper_half=False)
    return records, FitResult(fit.slope, fit.intercept, fit.r2, (used[0].N, used[-1].N))


def condition_study(problem: Problem, method: str | None, Ns, tol: float = 1e-8, unscaled: bool = True,
                    upper_half: bool = True):
    records = []
    for N in _check_ns(Ns):
        t0 = time.perf_counter()
        try:
            sol_sys = build_system(problem, N, method)
            rep = extreme_eigs(sol_sys.matrix, tol, unscaled=unscaled)
        except Exception as exc:  # noqa: BLE001
            raise StudyError(N, exc) from exc
        records.append(StudyRecord(N, 1.0 / N, sol_sys.dofmap.n,
                                   kappa2=rep.kappa2 if unscaled else None,
                                   scaled_kappa=rep.scaled_kappa, wall_time=time.perf_counter() - t0,
                                   extra={"converged": rep.converged, "iterations": rep.iterations}))
    fit = fit_loglog([r.N for r in records], [r.scaled_kappa for r in records], upper_half)
    return records, fit


def build_system(problem: Problem, N: int, method: str | None = None, rule: QuadRule | None = None) -> GlobalSystem:
    mesh = uniform_mesh(N)
    bound = problem.bind(mesh)
    return assemble(bound.space(mesh, method), bound.a, bound.load_spec(mesh), rule)


def eta_study(problem: Problem, Ns, method: str | None = None, tol: float = 1e-8, upper_half: bool = True):
    """Relative error of the elimination solution against the exact dof vector.

    Each record also carries eta / (scaled kappa * eps) in extra['eta_ratio'].
    """
    if problem.exact_dofs is None:
        raise ValueError(f"{problem.kind} has no exact dof vector")
    records = []
    for N in _check_ns(Ns):
        t0 = time.perf_counter()
        try:
            system = build_system(problem, N, method)
            mesh = system.space.mesh
            x = problem.bind(mesh).exact_dofs(system.space)
            xh = solve(band_lu_nopivot(system.matrix), system.load)
            e = eta(x, xh)
            rep = extreme_eigs(system.matrix, tol, unscaled=False)
        except Exception as exc:  # noqa: BLE001
            raise StudyError(N, exc) from exc
        records.append(StudyRecord(N, mesh.h, system.dofmap.n, scaled_kappa=rep.scaled_kappa, eta=e,
                                   wall_time=time.perf_counter() - t0,
                                   extra={"eta_ratio": e / (rep.scaled_kappa * EPS), "lost": e >= 0.5}))
    usable = [r for r in records if r.eta > 0]
    fit = fit_loglog([r.N for r in usable], [r.eta for r in usable], upper_half)
    return records, fit


# assumption sweeps --------------------------------------------------------


@dataclass
class AssumptionReport:
    family: str
    rows: list
    checks: dict

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def _cut_element(kind: str, beta: float, N: int):
    mesh = uniform_mesh(N)
    prob = make_problem(kind, beta=beta).bind(mesh)
    space = prob.space(mesh, "SGFEM")
    k = mesh.N // 2 + 1
    return mesh, space, element_stiffness(k, space, prob.a)


def interface_element_rows(beta_grid, N: int = 10):
    rows = []
    for beta in beta_grid:
        mesh, space, em = _cut_element("Interface1", beta, N)
        h = mesh.h
        scaled = em.A22 * np.outer(*(2 * [interface_delta(beta, h)(em)]))
        ev = np.linalg.eigvalsh(scaled)
        ratios = [r.ratio for r in delta_and_assumption3(space, [em], interface_delta(beta, h))]
        rows.append(dict(beta=beta, A22=em.A22, eig=ev, expected=np.array([(2 - beta) / 6, (1 + beta) / 2]),
                         unit_eig=np.linalg.eigvalsh(em.A22 / np.sqrt(np.outer(np.diag(em.A22), np.diag(em.A22)))),
                         ratios=ratios))
    return rows


def heaviside_element_rows(beta_grid, N: int = 10):
    rows = []
    for beta in beta_grid:
        mesh, space, em = _cut_element("Discontinuous", beta, N)
        d = heaviside_delta(mesh.h)(em)
        ev = np.linalg.eigvalsh(em.A22 * np.outer(d, d))
        T = math.sqrt(13 - 84 * beta + 228 * beta**2 - 288 * beta**3 + 144 * beta**4) / 6
        mid = 5 / 6 - 2 * beta + 2 * beta**2
        rows.append(dict(beta=beta, A22=em.A22, eig=ev, expected=np.array([mid - T, mid + T])))
    return rows


def singular_rows(alpha: float = 0.75, N: int = 64, D: float = 0.25, rule: QuadRule | None = None):
    """Per-element size of the modified singular function near the origin."""
    mesh = uniform_mesh(N)
    h = mesh.h
    f = power_function(alpha)
    kstar = max(i for i in range(N + 1) if i == 0 or float(mesh.vertices[i - 1]) < D) + 1
    rows = []
    for k in range(1, min(kstar, N) + 1):
        a, b = mesh.element(k)
        sq = integrate(lambda x: f.detrend(x, a, b)[1] ** 2, a, b, singular_at=0.0 if a == 0.0 else None,
                       rule=rule)
        G = abs(alpha * (alpha - 1)) * ((k - 0.5) * h) ** (alpha - 2)
        rows.append(dict(k=k, norm=math.sqrt(sq), G=G, scaled=math.sqrt(sq) / (G * h**1.5)))
    return rows


def assumption_study(family: str, beta_grid=None, N: int = 10, alpha: float = 0.75, tol: float = 1e-10):
    if beta_grid is None:
        beta_grid = [round(0.01 * j, 2) for j in range(1, 100)]
    if any(not 0 < b < 1 for b in beta_grid):
        raise ValueError("beta values must lie in (0, 1)")
    if family == "interface":
        rows = interface_element_rows(beta_grid, N)
        checks = {
            "eigenvalues match (2-beta)/6, (1+beta)/2": all(np.max(np.abs(r["eig"] - r["expected"])) <= tol for r in rows),
            "eigenvalues within [1/6, 1]": all(r["eig"][0] >= 1 / 6 - tol and r["eig"][-1] <= 1 + tol for r in rows),
            "assumption-3 ratio within (1, 6]": all(1 < x <= 6 + tol for r in rows for x in r["ratios"]),
        }
    elif family == "discontinuous":
        rows = heaviside_element_rows(beta_grid, N)
        top = 5 / 6 + math.sqrt(13) / 6
        checks = {
            "eigenvalues match 5/6-2b+2b^2 -/+ T": all(np.max(np.abs(r["eig"] - r["expected"])) <= tol for r in rows),
            "eigenvalues within [1/6, 5/6+sqrt(13)/6]": all(r["eig"][0] >= 1 / 6 - tol and r["eig"][-1] <= top + tol
                                                           for r in rows),
        }
    elif family == "singular":
        rows = singular_rows(alpha, max(N, 16))
        scaled = [r["scaled"] for r in rows]
        Gs = [r["G"] for r in rows]
        gr = [Gs[j] / Gs[j + 1] for j in range(len(Gs) - 1)]
        checks = {
            "band ratio C/c <= 10": max(scaled) / min(scaled) <= 10,
            "G ratio within [1, 3^(2-alpha)]": all(1 <= g <= 3 ** (2 - alpha) * (1 + 1e-14) for g in gr),
        }
    elif family == "quadratic":
        rows = []
        mesh = uniform_mesh(N)
        prob = make_problem("Smooth").bind(mesh)
        space = prob.space(mesh, "SGFEM")
        for k in (2, N // 2):
            em = element_stiffness(k, space, prob.a)
            rows.append(dict(k=k, A22=em.A22, eig=np.linalg.eigvalsh(em.A22 / mesh.h**3)))
        checks = {"eigenvalues 1/10, 1/6": all(np.max(np.abs(r["eig"] - [0.1, 1 / 6])) <= tol for r in rows)}
    else:
        raise ValueError("family must be interface, discontinuous, singular or quadratic")
    return AssumptionReport(family, rows, checks)


# output -------------------------------------------------------------------


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.17g}"


def emit_csv(records, path, include_timing: bool = True):
    """Write records; with include_timing=False the wall_time column stays empty."""
    if not records:
        raise ValueError("no records to write")
    try:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(CSV_FIELDS) + "\n")
            for r in records:
                vals = [getattr(r, name) for name in CSV_FIELDS]
                if not include_timing:
                    vals[-1] = None
                fh.write(",".join(_cell(v) for v in vals) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def read_csv(path) -> list[StudyRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            kw = {}
            for name in CSV_FIELDS:
                v = row[name]
                if v == "":
                    kw[name] = None
                elif name in ("N", "dofs"):
                    kw[name] = int(v)
                else:
                    kw[name] = float(v)
            out.append(StudyRecord(**kw))
    return out


def emit_svg_loglog(records, fields, path, x_field: str = "N", fit: FitResult | None = None,
                    title: str = "", width: int = 640, height: int = 440):
    """Log-log scatter of the given record fields against x_field."""
    if not records:
        raise ValueError("no records to plot")
    if isinstance(fields, str):
        fields = [fields]
    series = {}
    for name in fields:
        pts = [(getattr(r, x_field), getattr(r, name)) for r in records
               if getattr(r, name) is not None and getattr(r, name) > 0]
        if pts:
            series[name] = pts
    allx = [p[0] for s in series.values() for p in s]
    ally = [p[1] for s in series.values() for p in s]
    if not allx:
        raise ValueError("nothing positive to plot")
    lx0, lx1 = math.log10(min(allx)), math.log10(max(allx))
    ly0, ly1 = math.log10(min(ally)), math.log10(max(ally))
    lx1 += 1e-9 if lx1 == lx0 else 0
    ly1 += 1e-9 if ly1 == ly0 else 0
    m = 60

    def X(v):
        return m + (math.log10(v) - lx0) / (lx1 - lx0) * (width - 2 * m)

    def Y(v):
        return height - m - (math.log10(v) - ly0) / (ly1 - ly0) * (height - 2 * m)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
           '<rect width="100%" height="100%" fill="white"/>',
           f'<line x1="{m}" y1="{height - m}" x2="{width - m}" y2="{height - m}" stroke="black"/>',
           f'<line x1="{m}" y1="{m}" x2="{m}" y2="{height - m}" stroke="black"/>',
           f'<text x="{width / 2}" y="{height - 15}" text-anchor="middle">log10 {x_field}</text>',
           f'<text x="15" y="{height / 2}" transform="rotate(-90 15 {height / 2})" text-anchor="middle">'
           f'log10 {", ".join(series)}</text>']
    if title:
        out.append(f'<text x="{width / 2}" y="25" text-anchor="middle">{title}</text>')
    for tick in range(math.ceil(lx0), math.floor(lx1) + 1):
        out.append(f'<text x="{X(10 ** tick):.1f}" y="{height - m + 18}" text-anchor="middle">1e{tick}</text>')
    for tick in range(math.ceil(ly0), math.floor(ly1) + 1):
        out.append(f'<text x="{m - 6}" y="{Y(10 ** tick):.1f}" text-anchor="end">1e{tick}</text>')
    for c, (name, pts) in zip(colors * 4, series.items()):
        for x, y in pts:
            out.append(f'<circle cx="{X(x):.2f}" cy="{Y(y):.2f}" r="4" fill="{c}"><title>{name}</title></circle>')
    if fit is not None:
        xa, xb = fit.range
        ya = 10 ** (fit.slope * math.log10(xa) + fit.intercept)
        yb = 10 ** (fit.slope * math.log10(xb) + fit.intercept)
        out.append(f'<line x1="{X(xa):.2f}" y1="{Y(ya):.2f}" x2="{X(xb):.2f}" y2="{Y(yb):.2f}" '
                   'stroke="gray" stroke-dasharray="6,4"/>')
        out.append(f'<text x="{width - m}" y="{m}" text-anchor="end">slope {fit.slope:.3f} (r2 {fit.r2:.4f})</text>')
    out.append("</svg>")
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(out) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
