"""Composite Gauss-Legendre quadrature with breakpoint splitting.

Intervals are split at every declared breakpoint. Subintervals ending at an
integrable singularity are graded geometrically toward it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class QuadratureError(ArithmeticError):
    def __init__(self, msg: str, panel: tuple[float, float]):
        super().__init__(msg)
        self.panel = panel


@dataclass(frozen=True)
class QuadRule:
    order: int = 8
    grading: float = 0.25
    # 0.25^80 ~ 1e-48: leaves a negligible tail for x^p with p >= -0.8
    graded_levels: int = 80

    def __post_init__(self):
        if self.order < 2:
            raise ValueError("order must be >= 2")
        if not 0.0 < self.grading < 1.0:
            raise ValueError("grading must lie in (0, 1)")
        if self.graded_levels < 1:
            raise ValueError("graded_levels must be >= 1")


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1] by Newton iteration on P_n."""
    if n < 1:
        raise ValueError("n must be positive")
    x = np.empty(n)
    w = np.empty(n)
    for i in range((n + 1) // 2):
        z = math.cos(math.pi * (i + 0.75) / (n + 0.5))
        for _ in range(100):
            p0, p1 = 1.0, z
            for j in range(2, n + 1):
                p0, p1 = p1, ((2 * j - 1) * z * p1 - (j - 1) * p0) / j
            dp = n * (z * p1 - p0) / (z * z - 1.0)
            dz = p1 / dp
            z -= dz
            if abs(dz) <= 1e-15:
                break
        p0, p1 = 1.0, z
        for j in range(2, n + 1):
            p0, p1 = p1, ((2 * j - 1) * z * p1 - (j - 1) * p0) / j
        dp = n * (z * p1 - p0) / (z * z - 1.0)
        wi = 2.0 / ((1.0 - z * z) * dp * dp)
        x[i], x[n - 1 - i] = z, -z
        w[i] = w[n - 1 - i] = wi
    if n % 2:
        x[n // 2] = 0.0
    order = np.argsort(x)
    x, w = x[order], w[order]
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _gauss_panel(lo: float, hi: float, n: int):
    t, w = gauss_legendre(n)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    return mid + half * t, half * w


def _graded(a: float, b: float, toward_left: bool, rule: QuadRule):
    """Panels on [a, b] graded toward one endpoint.

    Graded panels use twice the base order. The innermost panel uses the
    substitution s = e t^2, which removes an x^{-1/2} type endpoint blow-up.
    Refinement stops at the float spacing of the endpoint, so near a nonzero
    singular endpoint the attainable accuracy is limited by that spacing.
    """
    L = b - a
    end = a if toward_left else b
    floor = 64 * np.spacing(abs(end)) if end != 0.0 else 0.0
    r = rule.grading
    n = 2 * rule.order
    out = []
    e = L
    for _ in range(rule.graded_levels):
        if r * e <= floor:
            break
        near, far = r * e, e
        if toward_left:
            out.append((a + near, a + far) + _gauss_panel(a + near, a + far, n))
        else:
            out.append((b - far, b - near) + _gauss_panel(b - far, b - near, n))
        e = near
    t, w = gauss_legendre(n)
    t = 0.5 * (t + 1.0)
    s = e * t * t
    ws = w * e * t  # d s = 2 e t dt, dt = d(t_ref)/2
    x = a + s if toward_left else b - s
    keep = x != end  # nodes that rounded onto the endpoint carry no information
    out.append((a, a + e, x[keep], ws[keep]) if toward_left else (b - e, b, x[keep], ws[keep]))
    return sorted(out, key=lambda p: p[0])


def panel_list(a: float, b: float, breakpoints=(), singular_at=(), rule: QuadRule | None = None):
    """List of (lo, hi, nodes, weights) covering [a, b]."""
    rule = rule or QuadRule()
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    cuts = sorted({float(p) for p in breakpoints if a < p < b})
    edges = [a] + cuts + [b]
    sing = {float(s) for s in (singular_at or ())}
    out = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        left, right = lo in sing, hi in sing
        if left and right:
            mid = 0.5 * (lo + hi)
            out += _graded(lo, mid, True, rule)
            out += _graded(mid, hi, False, rule)
        elif left or right:
            out += _graded(lo, hi, left, rule)
        else:
            out.append((lo, hi) + _gauss_panel(lo, hi, rule.order))
    return out


def nodes_weights(a: float, b: float, breakpoints=(), singular_at=(), rule: QuadRule | None = None):
    """Concatenated nodes and weights, plus the panel list for diagnostics."""
    panels = panel_list(a, b, breakpoints, singular_at, rule)
    x = np.concatenate([p[2] for p in panels])
    w = np.concatenate([p[3] for p in panels])
    return x, w, panels


def check_finite(values: np.ndarray, panels, what: str = "integrand"):
    if np.all(np.isfinite(values)):
        return
    pos = 0
    for lo, hi, xs, _ in panels:
        chunk = values[..., pos : pos + len(xs)]
        if not np.all(np.isfinite(chunk)):
            raise QuadratureError(f"non-finite {what} on panel [{lo!r}, {hi!r}]", (lo, hi))
        pos += len(xs)
    raise QuadratureError(f"non-finite {what}", (panels[0][0], panels[-1][1]))


def integrate(f, a: float, b: float, breakpoints=(), singular_at=None, rule: QuadRule | None = None) -> float:
    """Integrate a vectorised f over [a, b].

    singular_at may be a single point or a collection of points; any
    subinterval ending at one of them is graded toward it.
    """
    if singular_at is None:
        sing = ()
    elif np.ndim(singular_at) == 0:
        sing = (float(singular_at),)
    else:
        sing = tuple(singular_at)
    x, w, panels = nodes_weights(a, b, breakpoints, sing, rule)
    with np.errstate(all="ignore"):
        y = np.asarray(f(x), dtype=float)
    check_finite(y, panels)
    return float(np.dot(w, y))
