"""Uniform mesh on (0, 1), patches and hat functions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Mesh:
    N: int
    h: float
    vertices: np.ndarray

    @property
    def n_vertices(self) -> int:
        return self.N + 1

    def element(self, k: int) -> tuple[float, float]:
        """Endpoints of element k = 1..N, i.e. [x_{k-1}, x_k]."""
        if not 1 <= k <= self.N:
            raise IndexError(f"element index {k} outside 1..{self.N}")
        return float(self.vertices[k - 1]), float(self.vertices[k])

    def locate(self, x: float) -> int:
        """Element index containing x (right-closed at x=1)."""
        k = int(np.searchsorted(self.vertices, x, side="right"))
        return min(max(k, 1), self.N)


@dataclass(frozen=True)
class Patch:
    center_index: int
    interval: tuple[float, float]
    vertex_indices: tuple[int, ...]
    elements: tuple[int, ...]
    coords: tuple[float, ...]

    @property
    def center(self) -> float:
        return self.coords[self.vertex_indices.index(self.center_index)]

    def element_bounds(self) -> list[tuple[float, float]]:
        c = self.coords
        return [(c[j], c[j + 1]) for j in range(len(c) - 1)]


def uniform_mesh(N: int) -> Mesh:
    if int(N) != N or N < 2:
        raise ValueError(f"need an integer N >= 2, got {N}")
    N = int(N)
    # i/N is correctly rounded and hits 1.0 exactly at i = N
    x = np.arange(N + 1, dtype=float) / N
    x.setflags(write=False)
    return Mesh(N=N, h=1.0 / N, vertices=x)


def patch(mesh: Mesh, i: int) -> Patch:
    if not 0 <= i <= mesh.N:
        raise IndexError(f"vertex index {i} outside 0..{mesh.N}")
    verts = tuple(j for j in (i - 1, i, i + 1) if 0 <= j <= mesh.N)
    elems = tuple(k for k in (i, i + 1) if 1 <= k <= mesh.N)
    coords = tuple(float(mesh.vertices[j]) for j in verts)
    return Patch(center_index=i, interval=(coords[0], coords[-1]), vertex_indices=verts,
                 elements=elems, coords=coords)


def _local(x, a, b):
    """Local coordinate t = (x - a) / (b - a)."""
    return (x - a) / (b - a)


def hat_eval(mesh: Mesh, i: int, x):
    """Value and derivative of the hat function N_i.

    At a kink the derivative from the right is returned (from the left at x=1).
    Accepts scalars or arrays.
    """
    if not 0 <= i <= mesh.N:
        raise IndexError(f"vertex index {i} outside 0..{mesh.N}")
    xa = np.asarray(x, dtype=float)
    if np.any((xa < 0.0) | (xa > 1.0)):
        raise ValueError("x outside [0, 1]")
    xv = mesh.vertices
    xi = xv[i]
    inv_h = 1.0 / mesh.h
    val = np.zeros_like(xa)
    der = np.zeros_like(xa)
    # on each element the left hat is 1 - t and the right hat is t, with t
    # computed identically, so neighbouring values sum to 1 within an ulp
    if i > 0:
        left = (xa >= xv[i - 1]) & (xa < xi)
        val = np.where(left, _local(xa, xv[i - 1], xi), val)
        der = np.where(left, inv_h, der)
    if i < mesh.N:
        right = (xa >= xi) & (xa < xv[i + 1])
        val = np.where(right, 1.0 - _local(xa, xi, xv[i + 1]), val)
        der = np.where(right, -inv_h, der)
    # x = 1 belongs to the last element, take the left derivative there
    at_end = xa == 1.0
    if i == mesh.N:
        val = np.where(at_end, 1.0, val)
        der = np.where(at_end, inv_h, der)
    elif i == mesh.N - 1:
        der = np.where(at_end, -inv_h, der)
    if np.ndim(x) == 0:
        return float(val), float(der)
    return val, der


def element_hats(mesh: Mesh, k: int, x: np.ndarray):
    """Values and derivatives of N_{k-1}, N_k restricted to element k."""
    a, b = mesh.element(k)
    inv_h = 1.0 / mesh.h
    t = _local(x, a, b)
    return (1.0 - t, np.full_like(x, -inv_h)), (t, np.full_like(x, inv_h))
