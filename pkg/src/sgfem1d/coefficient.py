"""Diffusion coefficient a(x), bounded above and below by positive constants."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True, eq=False)
class CoefficientFn:
    """Piecewise constant coefficient, or a smooth callable with declared bounds.

    For the piecewise constant case values[j] holds on [breakpoints[j-1], breakpoints[j]),
    so at a breakpoint the value from the right is taken.
    """

    breakpoints: tuple[float, ...] = ()
    values: tuple[float, ...] = (1.0,)
    func: Callable | None = None
    bounds: tuple[float, float] | None = None

    def __post_init__(self):
        if self.func is None:
            if len(self.values) != len(self.breakpoints) + 1:
                raise ValueError("need one value per piece")
            if list(self.breakpoints) != sorted(self.breakpoints):
                raise ValueError("breakpoints must be sorted")
            if min(self.values) <= 0:
                raise ValueError("coefficient must be positive")
            if self.bounds is None:
                object.__setattr__(self, "bounds", (min(self.values), max(self.values)))
        elif self.bounds is None or self.bounds[0] <= 0:
            raise ValueError("smooth coefficient needs positive bounds (lo, hi)")

    @property
    def piecewise_constant(self) -> bool:
        return self.func is None

    def __call__(self, x):
        if self.func is not None:
            return self.func(x)
        idx = np.searchsorted(self.breakpoints, x, side="right")
        return np.asarray(self.values)[idx]

    def breaks_in(self, a: float, b: float) -> tuple[float, ...]:
        return tuple(p for p in self.breakpoints if a < p < b)

    def inv_integral(self, lo: float, x):
        """Integral of 1/a from lo to x, summed piece by piece (piecewise constant only)."""
        if self.func is not None:
            raise TypeError("closed-form integral needs a piecewise constant coefficient")
        x = np.asarray(x, dtype=float)
        edges = (-np.inf,) + tuple(self.breakpoints) + (np.inf,)
        out = np.zeros_like(x)
        for j, v in enumerate(self.values):
            seg = np.minimum(x, edges[j + 1]) - np.maximum(lo, edges[j])
            out = out + np.where(seg > 0, seg, 0.0) / v
        return out


def constant(value: float = 1.0) -> CoefficientFn:
    return CoefficientFn(values=(float(value),))


def piecewise(breakpoints, values) -> CoefficientFn:
    return CoefficientFn(breakpoints=tuple(float(b) for b in breakpoints),
                         values=tuple(float(v) for v in values))
