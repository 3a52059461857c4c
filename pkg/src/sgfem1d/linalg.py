"""Banded symmetric matrices, elimination without pivoting, extreme eigenvalues.

Factor and solve loops run in plain Python floats in a fixed order, so results
are bitwise reproducible and power-of-two diagonal scalings commute exactly
with the elimination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

EPS = 2.0**-52
PIVOT_FLOOR = 1e-300


class SingularMatrixError(ArithmeticError):
    def __init__(self, pivot_index: int, pivot: float):
        super().__init__(f"pivot {pivot!r} at index {pivot_index} is numerically zero")
        self.pivot_index = pivot_index


class DegenerateMatrixError(ValueError):
    def __init__(self, dof: int, value: float):
        super().__init__(f"diagonal entry {value!r} of dof {dof} is not positive")
        self.dof = dof


class BandedSymMatrix:
    """Symmetric matrix stored as its lower band: band[i, d] = A[i, i - d]."""

    def __init__(self, n: int, bandwidth: int, band: np.ndarray | None = None):
        if n < 1 or bandwidth < 0:
            raise ValueError("need n >= 1 and bandwidth >= 0")
        self.n = n
        self.bandwidth = bandwidth
        if band is None:
            band = np.zeros((n, bandwidth + 1))
        if band.shape != (n, bandwidth + 1):
            raise ValueError(f"band storage must have shape {(n, bandwidth + 1)}")
        self.band = band

    @classmethod
    def from_dense(cls, M, bandwidth: int | None = None) -> "BandedSymMatrix":
        M = np.asarray(M, dtype=float)
        n = M.shape[0]
        if bandwidth is None:
            nz = np.nonzero(np.tril(M))
            bandwidth = int(np.max(nz[0] - nz[1])) if len(nz[0]) else 0
        A = cls(n, bandwidth)
        for d in range(bandwidth + 1):
            A.band[d:, d] = np.diagonal(M, -d)
        return A

    def copy(self) -> "BandedSymMatrix":
        return BandedSymMatrix(self.n, self.bandwidth, self.band.copy())

    def to_dense(self) -> np.ndarray:
        M = np.zeros((self.n, self.n))
        for d in range(self.bandwidth + 1):
            idx = np.arange(d, self.n)
            M[idx, idx - d] = self.band[d:, d]
            M[idx - d, idx] = self.band[d:, d]
        return M

    def __getitem__(self, ij) -> float:
        i, j = ij
        if i < j:
            i, j = j, i
        d = i - j
        if d > self.bandwidth:
            return 0.0
        return float(self.band[i, d])

    def add(self, i: int, j: int, value: float):
        if i < j:
            i, j = j, i
        d = i - j
        if d > self.bandwidth:
            raise IndexError(f"entry ({i}, {j}) outside bandwidth {self.bandwidth}")
        self.band[i, d] += value

    def diagonal(self) -> np.ndarray:
        return self.band[:, 0].copy()

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = self.band[:, 0] * x
        for d in range(1, self.bandwidth + 1):
            c = self.band[d:, d]
            y[d:] += c * x[:-d]
            y[:-d] += c * x[d:]
        return y

    def scale(self, d) -> "BandedSymMatrix":
        """Return D A D for the diagonal D = diag(d)."""
        d = np.asarray(d, dtype=float)
        out = self.copy()
        for k in range(self.bandwidth + 1):
            out.band[k:, k] = self.band[k:, k] * d[k:] * d[: self.n - k]
        return out

    def submatrix(self, idx) -> "BandedSymMatrix":
        """Principal submatrix on the sorted index list idx."""
        idx = list(idx)
        pos = {g: r for r, g in enumerate(idx)}
        entries = []
        w = 0
        for r, g in enumerate(idx):
            for d in range(self.bandwidth + 1):
                c = pos.get(g - d)
                if c is not None:
                    entries.append((r, c, self.band[g, d]))
                    w = max(w, r - c)
        out = BandedSymMatrix(len(idx), w)
        for r, c, v in entries:
            out.band[r, r - c] = v
        return out

    def gershgorin(self) -> tuple[float, float]:
        off = np.zeros(self.n)
        for d in range(1, self.bandwidth + 1):
            a = np.abs(self.band[d:, d])
            off[d:] += a
            off[:-d] += a
        diag = self.band[:, 0]
        return float(np.min(diag - off)), float(np.max(diag + off))


@dataclass
class LUFactors:
    """Unit lower L and upper U, both with half-bandwidth w.

    lower[i][d] = L[i, i-d] for d = 1..w, upper[k][d] = U[k, k+d] for d = 0..w.
    """

    n: int
    bandwidth: int
    lower: list
    upper: list

    def pivots(self) -> np.ndarray:
        return np.array([row[0] for row in self.upper])

    def L_dense(self) -> np.ndarray:
        L = np.eye(self.n)
        for i in range(self.n):
            for d in range(1, self.bandwidth + 1):
                if i - d >= 0:
                    L[i, i - d] = self.lower[i][d]
        return L

    def U_dense(self) -> np.ndarray:
        U = np.zeros((self.n, self.n))
        for k in range(self.n):
            for d in range(self.bandwidth + 1):
                if k + d < self.n:
                    U[k, k + d] = self.upper[k][d]
        return U


def band_lu_nopivot(A: BandedSymMatrix, shift: float = 0.0) -> LUFactors:
    """LU of A - shift*I by left-to-right elimination, no pivoting."""
    n, w = A.n, A.bandwidth
    band = A.band.tolist()
    # rows of the working matrix: work[i][j - i + w] = entry (i, j), |i - j| <= w
    work = []
    for i in range(n):
        row = [0.0] * (2 * w + 1)
        for d in range(w + 1):
            if i - d >= 0:
                row[w - d] = band[i][d]
            if i + d < n:
                row[w + d] = band[i + d][d]
        if shift:
            row[w] = row[w] - shift
        work.append(row)
    lower = [[1.0] + [0.0] * w for _ in range(n)]
    upper = []
    for k in range(n):
        rk = work[k]
        piv = rk[w]
        if not abs(piv) >= PIVOT_FLOOR:
            raise SingularMatrixError(k, piv)
        top = min(n, k + w + 1)
        for i in range(k + 1, top):
            ri = work[i]
            off = k - i + w
            l = ri[off] / piv
            lower[i][i - k] = l
            for j in range(k + 1, top):
                ri[j - i + w] = ri[j - i + w] - l * rk[j - k + w]
        upper.append(rk[w:])
    return LUFactors(n, w, lower, upper)


def solve(factors: LUFactors, b) -> np.ndarray:
    n, w = factors.n, factors.bandwidth
    b = np.asarray(b, dtype=float)
    if b.shape != (n,):
        raise ValueError(f"right-hand side has shape {b.shape}, expected ({n},)")
    lower, upper = factors.lower, factors.upper
    y = b.tolist()
    for i in range(n):
        li = lower[i]
        s = y[i]
        for j in range(max(0, i - w), i):
            s = s - li[i - j] * y[j]
        y[i] = s
    x = [0.0] * n
    for i in range(n - 1, -1, -1):
        ui = upper[i]
        s = y[i]
        for j in range(i + 1, min(n, i + w + 1)):
            s = s - ui[j - i] * x[j]
        x[i] = s / ui[0]
    return np.array(x)


def scaled_matrix(A: BandedSymMatrix) -> BandedSymMatrix:
    """H = D A D with D_ii = A_ii^{-1/2}."""
    diag = A.diagonal()
    for i, v in enumerate(diag):
        if not v > 0:
            raise DegenerateMatrixError(i, float(v))
    return A.scale(1.0 / np.sqrt(diag))


def _positive_definite_shift(A: BandedSymMatrix, shift: float, upper: bool):
    """Factor A - shift I and confirm by inertia that shift lies below (or, if
    upper, above) the whole spectrum: all pivots of the right sign."""
    try:
        F = band_lu_nopivot(A, shift)
    except SingularMatrixError:
        return None
    piv = F.pivots()
    ok = np.all(piv < 0) if upper else np.all(piv > 0)
    if ok and np.all(np.isfinite(piv)):
        return F
    return None


@dataclass
class EigenResult:
    value: float
    vector: np.ndarray
    iterations: int
    converged: bool
    residual: float


def extreme_eigenpair(A: BandedSymMatrix, which: str, tol: float = 1e-8, max_iter: int = 10000,
                      seed: int = 0) -> EigenResult:
    """Smallest ('min') or largest ('max') eigenpair of an SPD banded matrix.

    Shifted inverse iteration. The shift starts at 0 (min) or at the Gershgorin
    upper bound (max) and is moved toward the Rayleigh quotient whenever a
    factorization confirms it still lies outside the spectrum (all pivots
    positive), which keeps clustered spectra from stalling the iteration.
    """
    if which not in ("min", "max"):
        raise ValueError("which must be 'min' or 'max'")
    n = A.n
    glo, ghi = A.gershgorin()
    scale = max(abs(glo), abs(ghi))
    if n == 1:
        return EigenResult(float(A.band[0, 0]), np.ones(1), 0, True, 0.0)
    upper = which == "max"
    v = np.random.default_rng(seed).standard_normal(n)
    v /= np.linalg.norm(v)

    if upper:
        sigma = ghi + 8 * EPS * scale
        F = _positive_definite_shift(A, sigma, True)
        bump = 1e-12
        while F is None:
            sigma = ghi + bump * scale
            F = _positive_definite_shift(A, sigma, True)
            bump *= 10
    else:
        sigma = 0.0
        F = band_lu_nopivot(A)

    lam_prev = None
    d_prev = None
    lam = float("nan")
    res = float("inf")
    for it in range(1, max_iter + 1):
        y = solve(F, v)
        # v.y = 1/(lambda - sigma) for an exact eigenvector; this estimate avoids
        # the cancellation a Rayleigh quotient suffers at tiny eigenvalues
        vy = float(np.dot(v, y))
        norm = np.linalg.norm(y)
        if not np.isfinite(norm) or norm == 0 or vy == 0:
            return EigenResult(lam, v, it, False, res)
        lam = sigma + 1.0 / vy
        v = y / norm
        res = float(np.linalg.norm(A.matvec(v) - lam * v))
        if lam_prev is not None:
            d = abs(lam - lam_prev)
            if d <= tol * abs(lam) and res <= tol * scale:
                return EigenResult(lam, v, it, True, res)
            # slow contraction: try to move the shift closer to the estimate
            if d_prev is not None and d > 0.1 * d_prev:
                for theta in (0.9, 0.5):
                    cand = sigma + theta * (lam - sigma)
                    G = _positive_definite_shift(A, cand, upper)
                    if G is not None:
                        sigma, F = cand, G
                        break
            d_prev = d
        lam_prev = lam
    return EigenResult(lam, v, max_iter, False, res)


@dataclass
class CondReport:
    lambda_min: float
    lambda_max: float
    kappa2: float
    scaled_kappa: float
    h_lambda_min: float
    h_lambda_max: float
    iterations: dict = field(default_factory=dict)
    converged: bool = True


def extreme_eigs(A: BandedSymMatrix, tol: float = 1e-8, max_iter: int = 10000,
                 unscaled: bool = True) -> CondReport:
    """Condition numbers of A and of its diagonally scaled form H = DAD."""
    H = scaled_matrix(A)
    hmin = extreme_eigenpair(H, "min", tol, max_iter)
    hmax = extreme_eigenpair(H, "max", tol, max_iter)
    its = {"h_min": hmin.iterations, "h_max": hmax.iterations}
    ok = hmin.converged and hmax.converged
    if unscaled:
        amin = extreme_eigenpair(A, "min", tol, max_iter)
        amax = extreme_eigenpair(A, "max", tol, max_iter)
        its.update(a_min=amin.iterations, a_max=amax.iterations)
        ok = ok and amin.converged and amax.converged
        lmin, lmax = amin.value, amax.value
    else:
        lmin = lmax = float("nan")
    return CondReport(lambda_min=lmin, lambda_max=lmax, kappa2=lmax / lmin,
                      scaled_kappa=hmax.value / hmin.value, h_lambda_min=hmin.value,
                      h_lambda_max=hmax.value, iterations=its, converged=ok)


def _check_binary(g) -> np.ndarray:
    g = np.asarray(g)
    if not np.issubdtype(g.dtype, np.integer):
        if not np.all(g == np.round(g)):
            raise ValueError("exponents must be integers")
        g = g.astype(int)
    return g


def diagonal_scaled_solve(A: BandedSymMatrix, b, d) -> np.ndarray:
    """x = D * solve(DAD, Db) for an arbitrary positive diagonal d."""
    d = np.asarray(d, dtype=float)
    DAD = A.scale(d)
    Db = d * np.asarray(b, dtype=float)
    if not (np.all(np.isfinite(DAD.band)) and np.all(np.isfinite(Db))):
        raise OverflowError("scaled system is not finite")
    return d * solve(band_lu_nopivot(DAD), Db)


def bauer_binary_solve(A: BandedSymMatrix, b, g):
    """Solve directly and after scaling by D = diag(2^g); returns both solutions."""
    g = _check_binary(g)
    if g.shape != (A.n,):
        raise ValueError("need one exponent per unknown")
    x_direct = solve(band_lu_nopivot(A), b)
    with np.errstate(over="ignore", under="ignore"):
        d = np.ldexp(1.0, g)
        DAD = A.scale(d)
        Db = d * np.asarray(b, dtype=float)
    tiny = np.finfo(float).tiny
    vals = np.concatenate([DAD.band.ravel(), Db])
    if not np.all(np.isfinite(vals)) or np.any((vals != 0) & (np.abs(vals) < tiny)):
        raise OverflowError("binary scaling overflowed or underflowed")
    x_scaled = d * solve(band_lu_nopivot(DAD), Db)
    if not np.all(np.isfinite(x_scaled)):
        raise OverflowError("scaled solution is not finite")
    return x_direct, x_scaled


def eta(x_exact, x_computed) -> float:
    x = np.asarray(x_exact, dtype=float)
    nx = np.linalg.norm(x)
    if nx == 0:
        raise ValueError("exact vector is zero")
    return float(np.linalg.norm(x - np.asarray(x_computed, dtype=float)) / nx)


def dump_matrix(A: BandedSymMatrix, out: TextIO):
    """Header 'n bandwidth', then 'i j value' for the stored lower band."""
    out.write(f"{A.n} {A.bandwidth}\n")
    for i in range(A.n):
        for d in range(min(i, A.bandwidth), -1, -1):
            out.write(f"{i} {i - d} {float(A.band[i, d])!r}\n")


def load_matrix(src: TextIO) -> BandedSymMatrix:
    n, w = (int(t) for t in src.readline().split())
    A = BandedSymMatrix(n, w)
    for line in src:
        if line.strip():
            i, j, v = line.split()
            A.add(int(i), int(j), float(v))
    return A
