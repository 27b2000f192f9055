"""One-body (free-fermion) reduction of the XY chain and its localization kernel.

The quadratic form matrix is M = [[A, B], [-B, -A]] with A the tridiagonal
field/hopping block and B the antisymmetric anisotropy block. Dynamical
localization is diagnosed through the kernel

    K[j,k] = sup_t |(e^{-itM})_{j,k}| + |(e^{-itM})_{j, n+1+k}|,

estimated on a time grid with golden-section refinement around the largest
grid maxima of each entry's trace (refinement only ever raises an entry).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError
from .models import XYParams

DEFAULT_GRID_POINTS = 2000
DEFAULT_T_MAX = 50.0
REFINE_MAXIMA = 5


@dataclass(frozen=True)
class OneBodyMatrix:
    """Real symmetric 2(n+1) x 2(n+1) one-body matrix of an XY chain."""

    matrix: np.ndarray
    n: int

    @property
    def m(self) -> int:
        """Number of sites, n + 1."""
        return self.n + 1

    def blocks(self) -> tuple[np.ndarray, np.ndarray]:
        m = self.m
        return self.matrix[:m, :m], self.matrix[:m, m:]

    def eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        eps, W = np.linalg.eigh(self.matrix)
        return eps, W


@dataclass(frozen=True)
class LocalizationKernel:
    """Per-pair sup-over-time amplitude kernel on an (n+1)-site chain."""

    matrix: np.ndarray
    grid: np.ndarray
    refined: bool

    @property
    def n(self) -> int:
        return self.matrix.shape[0] - 1


def build_M(params: XYParams) -> OneBodyMatrix:
    """Assemble M = [[A, B], [-B, -A]]: A has lam*omega_j on the diagonal and
    -mu_j off it; B has -mu_j*gamma_j above the diagonal, +mu_j*gamma_j below."""
    m = params.n + 1
    A = np.zeros((m, m))
    A[np.arange(m), np.arange(m)] = params.lam * params.omega
    off = np.arange(m - 1)
    A[off, off + 1] = -params.mu
    A[off + 1, off] = -params.mu
    B = np.zeros((m, m))
    B[off, off + 1] = -params.mu * params.gamma
    B[off + 1, off] = params.mu * params.gamma
    M = np.block([[A, B], [-B, -A]])
    return OneBodyMatrix(matrix=M, n=params.n)


def propagator(one_body: OneBodyMatrix, t: float) -> np.ndarray:
    """U(t) = exp(-i t M), unitary; U(s)U(t) = U(s+t)."""
    eps, W = one_body.eigensystem()
    phases = np.exp(-1j * t * eps)
    return (W * phases[None, :]) @ W.T


def _default_grid() -> np.ndarray:
    return np.linspace(0.0, DEFAULT_T_MAX, DEFAULT_GRID_POINTS)


def _row_traces(W: np.ndarray, eps: np.ndarray, j: int, grid: np.ndarray, m: int) -> np.ndarray:
    """|U(t)_{j,k}| + |U(t)_{j,m+k}| for one row j over all t and k."""
    ph = np.exp(-1j * np.outer(grid, eps)) * W[j][None, :]
    a1 = ph @ W[:m, :].T
    a2 = ph @ W[m : 2 * m, :].T
    return np.abs(a1) + np.abs(a2)


def _refine_row(
    W: np.ndarray,
    eps: np.ndarray,
    j: int,
    grid: np.ndarray,
    traces: np.ndarray,
    row_sup: np.ndarray,
    m: int,
) -> None:
    """Golden-section refinement around the top grid maxima of each entry."""
    nt = grid.shape[0]
    if nt < 3:
        return
    dt = float(grid[1] - grid[0])
    tol_t = 1e-3 * dt
    Wj = np.ascontiguousarray(W[j])
    for k in range(m):
        g = traces[:, k]
        interior = (g[1:-1] >= g[:-2]) & (g[1:-1] >= g[2:])
        locs = np.flatnonzero(interior) + 1
        if g[0] >= g[1]:
            locs = np.append(locs, 0)
        if g[-1] >= g[-2]:
            locs = np.append(locs, nt - 1)
        if locs.size == 0:
            continue
        top = locs[np.argsort(g[locs], kind="stable")[::-1][:REFINE_MAXIMA]]
        Wk1 = np.ascontiguousarray(W[k])
        Wk2 = np.ascontiguousarray(W[m + k])
        best = row_sup[k]
        for i in top:
            lo = grid[max(i - 1, 0)]
            hi = grid[min(i + 1, nt - 1)]
            if hi <= lo:
                continue
            val = _kernels.golden_refine(Wj, Wk1, Wk2, eps, lo, hi, tol_t)
            if val > best:
                best = val
        row_sup[k] = best


def kernel_rows(
    one_body: OneBodyMatrix,
    rows,
    time_grid: np.ndarray | None = None,
    refine: bool = True,
) -> np.ndarray:
    """Selected rows of the localization kernel (performance path).

    Identical by construction to the same rows of localization_kernel: both
    run the one amplitude engine; this avoids forming the full matrix.
    """
    grid = _default_grid() if time_grid is None else np.asarray(time_grid, dtype=float)
    if grid.ndim != 1 or grid.shape[0] < 1:
        raise DomainError("time grid must be a nonempty 1-d array")
    m = one_body.m
    eps, W = one_body.eigensystem()
    rows = [int(r) for r in rows]
    if any(r < 0 or r >= m for r in rows):
        raise DomainError(f"row indices must lie in [0, {m - 1}]")
    out = np.zeros((len(rows), m))
    for i, j in enumerate(rows):
        traces = _row_traces(W, eps, j, grid, m)
        row_sup = traces.max(axis=0)
        if refine:
            _refine_row(W, eps, j, grid, traces, row_sup, m)
        out[i] = row_sup
    return out


def localization_kernel(
    one_body: OneBodyMatrix,
    time_grid: np.ndarray | None = None,
    refine: bool = True,
) -> LocalizationKernel:
    """Full (n+1) x (n+1) kernel; entries lie in [0, 2], and any grid
    refinement can only increase them."""
    grid = _default_grid() if time_grid is None else np.asarray(time_grid, dtype=float)
    K = kernel_rows(one_body, list(range(one_body.m)), time_grid=grid, refine=refine)
    return LocalizationKernel(matrix=K, grid=grid, refined=refine)


def xy_manybody_surrogate_bound(kernel: LocalizationKernel, X, Y) -> float:
    """4^|X| * sum_{j in X, k in Y} K[j,k]: one-body surrogate for the
    many-body estimator of the isotropic chain."""
    X = sorted(set(int(x) for x in X))
    Y = sorted(set(int(y) for y in Y))
    if not X or not Y:
        raise DomainError("X and Y must be nonempty")
    m = kernel.matrix.shape[0]
    if X[-1] >= m or Y[-1] >= m or X[0] < 0 or Y[0] < 0:
        raise DomainError("X, Y must be site subsets of the kernel's chain")
    s = float(kernel.matrix[np.ix_(X, Y)].sum())
    return float(4.0 ** len(X)) * s


def kernel_to_csv(kernel: LocalizationKernel, path) -> None:
    """Write the kernel matrix with a header row of site indices."""
    m = kernel.matrix.shape[0]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["site"] + [str(k) for k in range(m)])
        for j in range(m):
            writer.writerow([str(j)] + [repr(float(v)) for v in kernel.matrix[j]])
