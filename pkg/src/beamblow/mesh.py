"""Uniform interior grids and discrete clamped-boundary operators.

Fields live on the interior nodes of a uniform grid over (0, extent)^dim
with spacing h = extent/(n+1).  The boundary condition is clamped: the
field vanishes on the boundary and its normal derivative vanishes too,
which the fourth-order stencil encodes through mirror ghost values
(the ghost node one spacing outside equals the interior node one
spacing inside).

All integral quantities are quadrature sums weighted by h^dim, and the
gradient/Laplacian seminorms are defined through the operator matrices
themselves so that summation by parts is exact:

    grad_norm_sq(u) = h^dim * u^T (-L u)
    lap_norm_sq(u)  = h^dim * u^T (B u)

with L the Dirichlet Laplacian and B the clamped biharmonic matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class Grid:
    """Interior grid of an axis-aligned box with clamped boundary."""

    dim: int
    n_interior: int
    extent: float
    h: float
    weight: float

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_interior,) * self.dim

    @property
    def size(self) -> int:
        return self.n_interior**self.dim

    @property
    def volume(self) -> float:
        return self.extent**self.dim

    def axis_coords(self) -> np.ndarray:
        """Coordinates of interior nodes along one axis."""
        return self.h * np.arange(1, self.n_interior + 1)


def make_grid(dim: int, n_interior: int, extent: float = 1.0) -> Grid:
    if dim not in (1, 2):
        raise ValueError(f"dim must be 1 or 2, got {dim}")
    if n_interior < 1:
        raise ValueError(f"n_interior must be positive, got {n_interior}")
    if not extent > 0:
        raise ValueError(f"extent must be positive, got {extent}")
    h = extent / (n_interior + 1)
    return Grid(dim=dim, n_interior=n_interior, extent=float(extent),
                h=h, weight=h**dim)


def _lap_1d(n: int, h: float) -> sp.csr_matrix:
    main = np.full(n, -2.0)
    off = np.ones(n - 1)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr") / h**2


def _bih_1d(n: int, h: float) -> sp.csr_matrix:
    """Pentadiagonal fourth-difference with clamped (mirror ghost) closure.

    Interior indices 0..n-1 sit at x = h..nh; the physical boundary nodes
    carry zero and drop out, while second neighbours that land one node
    outside the boundary fold back onto the first interior node.
    """
    A = sp.lil_matrix((n, n))
    for i in range(n):
        A[i, i] += 6.0
        for j in (i - 1, i + 1):
            if 0 <= j < n:
                A[i, j] += -4.0
        for j in (i - 2, i + 2):
            jj = j
            if jj == -2:
                jj = 0
            elif jj == n + 1:
                jj = n - 1
            if 0 <= jj < n:
                A[i, jj] += 1.0
    return (A / h**4).tocsr()


@lru_cache(maxsize=None)
def laplacian_matrix(grid: Grid) -> sp.csr_matrix:
    """Dirichlet Laplacian on the interior nodes (negative definite)."""
    L1 = _lap_1d(grid.n_interior, grid.h)
    if grid.dim == 1:
        return L1
    eye = sp.identity(grid.n_interior, format="csr")
    return (sp.kron(L1, eye) + sp.kron(eye, L1)).tocsr()


@lru_cache(maxsize=None)
def biharmonic_matrix(grid: Grid) -> sp.csr_matrix:
    """Clamped biharmonic operator (symmetric positive definite).

    In 2d the mixed term pairs the two 1d Dirichlet Laplacians, and the
    pure fourth differences use the mirror-ghost closure, giving the
    13-point clamped plate stencil.
    """
    B1 = _bih_1d(grid.n_interior, grid.h)
    if grid.dim == 1:
        return B1
    L1 = _lap_1d(grid.n_interior, grid.h)
    eye = sp.identity(grid.n_interior, format="csr")
    return (sp.kron(B1, eye) + 2.0 * sp.kron(L1, L1)
            + sp.kron(eye, B1)).tocsr()


def _check_field(grid: Grid, u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.size,):
        raise ValueError(f"field shape {u.shape} does not match grid "
                         f"size ({grid.size},)")
    if not np.all(np.isfinite(u)):
        raise ValueError("field contains non-finite values")
    return u


def apply_laplacian(grid: Grid, u: np.ndarray) -> np.ndarray:
    return laplacian_matrix(grid) @ _check_field(grid, u)


def apply_biharmonic(grid: Grid, u: np.ndarray) -> np.ndarray:
    return biharmonic_matrix(grid) @ _check_field(grid, u)


def inner(grid: Grid, u: np.ndarray, v: np.ndarray) -> float:
    """Weighted L2 inner product."""
    return grid.weight * float(np.dot(u, v))


def norm_l2(grid: Grid, u: np.ndarray) -> float:
    return float(np.sqrt(grid.weight) * np.linalg.norm(u))


def norm_lq(grid: Grid, u: np.ndarray, q: float) -> float:
    """Weighted L^q norm, 1 <= q < inf."""
    if not q >= 1:
        raise ValueError(f"q must be >= 1, got {q}")
    return float((grid.weight * np.sum(np.abs(u)**q))**(1.0 / q))


def max_norm(u: np.ndarray) -> float:
    return float(np.max(np.abs(u))) if len(u) else 0.0


def grad_norm_sq(grid: Grid, u: np.ndarray) -> float:
    """Squared H^1_0 seminorm, computed through the Laplacian so the
    discrete Green identity (grad u, grad u) = -(lap u, u) is exact."""
    u = _check_field(grid, u)
    return grid.weight * float(u @ (-(laplacian_matrix(grid) @ u)))


def lap_norm_sq(grid: Grid, u: np.ndarray) -> float:
    """Squared L2 norm of the Laplacian, computed through the clamped
    biharmonic matrix so that (lap u, lap u) = (bih u, u) exactly."""
    u = _check_field(grid, u)
    return grid.weight * float(u @ (biharmonic_matrix(grid) @ u))
