"""Local approximation spaces on patches and their stable (SGFEM) modification.

A modified function is the enrichment minus its piecewise-linear interpolant
at the patch vertices. On each element of the patch that interpolant is the
linear interpolant at the element endpoints, so everything here is evaluated
element by element.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .coefficient import CoefficientFn
from .mesh import Patch

ZERO_GRID = 32
ZERO_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class EnrichmentFunction:
    func: Callable
    dfunc: Callable
    breakpoints: tuple[float, ...] = ()
    label: str = ""
    # polynomial degree between consecutive breakpoints, None if not polynomial
    piece_degree: int | None = None
    # points where the derivative may blow up (quadrature grades toward them)
    singular_points: tuple[float, ...] = ()
    # (a, x) -> phi(x) - phi(a) without cancellation, when available
    increment: Callable | None = None
    # (x, a, b) -> phi minus its linear interpolant on [a, b], and derivative
    detrend_fn: Callable | None = None

    def eval(self, x):
        xa = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            v, d = np.asarray(self.func(xa), dtype=float), np.asarray(self.dfunc(xa), dtype=float)
        if np.ndim(x) == 0:
            return float(v), float(d)
        return np.broadcast_to(v, xa.shape), np.broadcast_to(d, xa.shape)

    def detrend(self, x, a: float, b: float):
        """phi - I phi on [a, b], with I the linear interpolant at a and b."""
        if self.detrend_fn is not None:
            return self.detrend_fn(np.asarray(x, dtype=float), a, b)
        x = np.asarray(x, dtype=float)
        if self.increment is not None:
            inc = self.increment(a, x)
            slope = float(self.increment(a, np.asarray(b))) / (b - a)
        else:
            fa, fb = self.eval(a)[0], self.eval(b)[0]
            inc = self.eval(x)[0] - fa
            slope = (fb - fa) / (b - a)
        return inc - (x - a) * slope, self.eval(x)[1] - slope

    def breaks_in(self, a: float, b: float) -> tuple[float, ...]:
        return tuple(p for p in self.breakpoints if a < p < b)


@dataclass(frozen=True, eq=False)
class ModifiedFunction(EnrichmentFunction):
    base: EnrichmentFunction | None = None
    # patch elements (global indices) on which the function is not identically zero
    support: tuple[int, ...] = ()


@dataclass(frozen=True)
class LocalSpace:
    patch: Patch
    functions: tuple[EnrichmentFunction, ...] = ()

    @property
    def n(self) -> int:
        return len(self.functions)


@dataclass(frozen=True)
class ModifiedLocalSpace:
    patch: Patch
    functions: tuple[ModifiedFunction, ...] = ()
    dropped: int = 0

    @property
    def n(self) -> int:
        return len(self.functions)


def patch_interpolant(f: EnrichmentFunction, patch: Patch) -> EnrichmentFunction:
    xs = np.asarray(patch.coords)
    ys = np.array([f.eval(v)[0] for v in patch.coords])
    slopes = np.diff(ys) / np.diff(xs)

    def func(x):
        return np.interp(x, xs, ys)

    def dfunc(x):
        j = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, len(slopes) - 1)
        return slopes[j]

    return EnrichmentFunction(func, dfunc, breakpoints=tuple(xs[1:-1]), label=f"I[{f.label}]",
                              piece_degree=1)


def _element_of(x, patch: Patch):
    """Position (0 or 1) of the patch element containing each x."""
    if len(patch.elements) == 1:
        return np.zeros(np.shape(x), dtype=int)
    return (np.asarray(x) >= patch.center).astype(int)


def _modified(f: EnrichmentFunction, patch: Patch) -> tuple[Callable, Callable]:
    bounds = patch.element_bounds()

    def both(x):
        x = np.asarray(x, dtype=float)
        pos = _element_of(x, patch)
        v = np.empty_like(x)
        d = np.empty_like(x)
        for j, (a, b) in enumerate(bounds):
            m = pos == j
            if np.any(m):
                vj, dj = f.detrend(x[m], a, b)
                v[m], d[m] = vj, dj
        return v, d

    return (lambda x: both(x)[0]), (lambda x: both(x)[1])


def _vanishes_on(f: EnrichmentFunction, a: float, b: float, scale: float) -> bool:
    if f.piece_degree is not None and f.piece_degree <= 1:
        # piecewise linear: the interpolant reproduces it unless a kink or jump
        # lies strictly inside the element
        return not f.breaks_in(a, b)
    t = (np.arange(ZERO_GRID) + 0.5) / ZERO_GRID
    x = a + (b - a) * t
    v, _ = f.detrend(x, a, b)
    return bool(np.max(np.abs(v)) < ZERO_TOL * scale)


def _patch_scale(f: EnrichmentFunction, patch: Patch) -> float:
    t = (np.arange(ZERO_GRID) + 0.5) / ZERO_GRID
    pts = [np.asarray(patch.coords)]
    for a, b in patch.element_bounds():
        pts.append(a + (b - a) * t)
    vals = f.eval(np.concatenate(pts))[0]
    return float(np.max(np.abs(vals)))


def modify(space: LocalSpace) -> ModifiedLocalSpace:
    patch = space.patch
    kept = []
    dropped = 0
    for f in space.functions:
        scale = _patch_scale(f, patch)
        support = tuple(k for k, (a, b) in zip(patch.elements, patch.element_bounds())
                        if scale > 0 and not _vanishes_on(f, a, b, scale))
        if not support:
            dropped += 1
            continue
        func, dfunc = _modified(f, patch)
        brk = tuple(sorted(set(f.breakpoints) | set(patch.coords[1:-1])))
        kept.append(ModifiedFunction(func, dfunc, breakpoints=brk, label=f"mod[{f.label}]",
                                     piece_degree=f.piece_degree,
                                     singular_points=f.singular_points,
                                     base=f, support=support))
    return ModifiedLocalSpace(patch=patch, functions=tuple(kept), dropped=dropped)


# catalog ------------------------------------------------------------------


def _complete_homogeneous(k: int, a: float, b: float, y):
    """h_k(a, b, y) and its derivative in y."""
    val = np.zeros_like(y)
    der = np.zeros_like(y)
    for i in range(k + 1):
        for j in range(k + 1 - i):
            m = k - i - j
            c = a**i * b**j
            val = val + c * y**m
            if m:
                der = der + c * m * y ** (m - 1)
    return val, der


def shifted_power(shift: float, p: int, label: str | None = None) -> EnrichmentFunction:
    """(x - shift)^p with a cancellation-free detrend."""
    if p < 1:
        raise ValueError("power must be >= 1")

    def func(x):
        return (x - shift) ** p

    def dfunc(x):
        return p * (x - shift) ** (p - 1)

    def detrend(x, a, b):
        if p == 1:
            z = np.zeros_like(x)
            return z, z
        q, dq = _complete_homogeneous(p - 2, a - shift, b - shift, x - shift)
        u, w = x - a, x - b
        return u * w * q, (u + w) * q + u * w * dq

    return EnrichmentFunction(func, dfunc, label=label or f"(x-{shift:g})^{p}", piece_degree=p,
                              detrend_fn=detrend)


def polynomial_space(patch: Patch, degree: int) -> LocalSpace:
    if degree < 0:
        raise ValueError("degree must be >= 0")
    xi = patch.center
    return LocalSpace(patch, tuple(shifted_power(xi, j) for j in range(1, degree + 1)))


def power_function(p: float) -> EnrichmentFunction:
    """Global x^p; integer p gets the exact polynomial treatment."""
    if float(p).is_integer() and p >= 1:
        return shifted_power(0.0, int(p), label=f"x^{int(p)}")

    def func(x):
        return np.where(x > 0, np.abs(x) ** p, 0.0)

    def dfunc(x):
        return np.where(x > 0, p * np.abs(x) ** (p - 1), np.inf if p < 1 else 0.0)

    return EnrichmentFunction(func, dfunc, breakpoints=(0.0,), label=f"x^{p:g}",
                              singular_points=(0.0,))


def _restricted(f: EnrichmentFunction, patch: Patch) -> EnrichmentFunction:
    """Keep only the breakpoints and singular points lying in the closed patch."""
    lo, hi = patch.interval
    return replace(f, breakpoints=tuple(p for p in f.breakpoints if lo <= p <= hi),
                   singular_points=tuple(p for p in f.singular_points if lo <= p <= hi))


def power_space(patch: Patch, p: float) -> LocalSpace:
    return LocalSpace(patch, (_restricted(power_function(p), patch),))


def interface_space(patch: Patch, a: CoefficientFn) -> LocalSpace:
    if not a.piecewise_constant:
        raise ValueError("interface enrichment needs a piecewise constant coefficient")
    lo, hi = patch.interval
    vals = a(np.array([lo, hi] + [p for p in a.breakpoints if lo < p < hi]))
    if np.any(vals <= 0):
        raise ValueError("coefficient must be positive on the patch")
    x0 = lo

    def func(x):
        return a.inv_integral(x0, x)

    def dfunc(x):
        return 1.0 / a(x)

    def increment(s, x):
        return a.inv_integral(s, x)

    f = EnrichmentFunction(func, dfunc, breakpoints=a.breaks_in(lo, hi), label="int 1/a",
                           piece_degree=1, increment=increment)
    return LocalSpace(patch, (f,))


def singular_space(patch: Patch, alpha: float) -> LocalSpace:
    if not 0.5 < alpha < 1.5 or alpha == 1.0:
        raise ValueError("alpha must lie in (1/2, 3/2) and differ from 1")
    f = _restricted(power_function(alpha), patch)
    return LocalSpace(patch, (shifted_power(patch.center, 1), f))


def heaviside(c: float) -> EnrichmentFunction:
    def func(x):
        return np.where(x < c, 1.0, -1.0)

    def dfunc(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    return EnrichmentFunction(func, dfunc, breakpoints=(c,), label=f"H[{c:g}]", piece_degree=0)


def heaviside_space(patch: Patch, c: float) -> LocalSpace:
    if c in patch.coords:
        raise ValueError(f"crack point {c!r} coincides with a mesh vertex")
    f = _restricted(heaviside(c), patch)
    return LocalSpace(patch, (shifted_power(patch.center, 1), f))
