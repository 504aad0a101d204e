"""Initial-data factories: presets and the arbitrary-energy construction.

The two-mode construction builds data u0 = r1 v1, u1 = r1 v1 + r2 v2
on the first two Dirichlet eigenfields of the (negative) Laplacian.
The radial amplitude r1 is pushed out until the single-mode energy
chi(r1) drops below the requested level R while the correlation
inner(u0, u1) = r1^2 clears B*R; the second mode then tops the energy
up to R exactly.  All amplitude searches are plain bisections, so the
construction is bit-for-bit reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConstructionFailure
from .functionals import ModelParams, potential_J
from .mesh import Grid, inner, norm_l2
from .spectra import compute_constants, smallest_eigen

PRESET_NAMES = ("sine_bump", "negative_energy", "high_energy")

_basis_cache: dict[Grid, tuple[np.ndarray, np.ndarray]] = {}


@dataclass(frozen=True)
class InitialData:
    """A displacement/velocity pair plus its construction record."""

    u0: np.ndarray
    u1: np.ndarray
    meta: dict = field(default_factory=dict)


def eigen_pair_basis(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """First two Dirichlet-Laplacian eigenfields, orthonormalized.

    Both fields carry unit weighted L2 norm; one explicit
    re-orthogonalization pass keeps |inner(v1, v2)| below 1e-10.
    """
    cached = _basis_cache.get(grid)
    if cached is None:
        _, v1 = smallest_eigen(grid, "laplacian")
        _, v2 = smallest_eigen(grid, "laplacian", deflate=v1)
        v2 = v2 - inner(grid, v1, v2) / inner(grid, v1, v1) * v1
        v2 = v2 / norm_l2(grid, v2)
        cross = abs(inner(grid, v1, v2))
        if cross > 1e-10:
            raise ConstructionFailure(
                f"basis re-orthogonalization left inner(v1, v2) = {cross:.3e}")
        _basis_cache[grid] = (v1, v2)
        cached = (v1, v2)
    v1, v2 = cached
    return v1.copy(), v2.copy()


def chi(r1: float, grid: Grid, v1: np.ndarray, params: ModelParams) -> float:
    """Single-mode energy of the pair (r1 v1, r1 v1).

    Equals r1^2/2 (||v1||^2 + ||grad v1||^2 + ||lap v1||^2)
    + beta r1^{2(gamma+1)}/(2(gamma+1)) ||grad v1||^{2(gamma+1)}
    - r1^{p+1}/(p+1) ||v1||_{p+1}^{p+1}, evaluated through the same
    discrete norms as the energy functional so that assembled data
    reproduce the requested level without cancellation error.
    """
    return 0.5 * r1**2 * norm_l2(grid, v1) ** 2 + potential_J(grid, r1 * v1, params)


def construct_energy_level(grid: Grid, params: ModelParams, R: float,
                           B: float) -> InitialData:
    """Blow-up data with E(0) = R exactly and inner(u0, u1) > B*R.

    Doubles r1 from 1 until chi(r1) < R and r1^2 > B*R both hold, then
    bisects inside the final power-of-two bracket, keeping the
    admissible end.  The second-mode amplitude r2 solves the quadratic
    that lands the assembled energy on R.
    """
    if B <= 0.0:
        raise ConstructionFailure("energy weight B must be positive")
    v1, v2 = eigen_pair_basis(grid)
    l2_v1_sq = norm_l2(grid, v1) ** 2
    l2_v2_sq = norm_l2(grid, v2) ** 2
    cross = inner(grid, v1, v2)

    def admissible(r1: float) -> bool:
        return chi(r1, grid, v1, params) < R and r1 * r1 * l2_v1_sq > B * R

    hi = 1.0
    while not admissible(hi):
        hi *= 2.0
        if hi > 2.0**60:
            raise ConstructionFailure(
                f"no admissible amplitude below 2^60 for R = {R}")
    lo = 0.5 * hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if admissible(mid):
            hi = mid
        else:
            lo = mid
    r1 = hi

    u0 = r1 * v1
    chi_val = 0.5 * r1**2 * l2_v1_sq + potential_J(grid, u0, params)
    # E(0) = ||r1 v1 + r2 v2||^2 / 2 + J(u0) = R, solved for r2 > 0
    b_lin = 2.0 * r1 * cross
    c_const = r1**2 * l2_v1_sq - 2.0 * (R - potential_J(grid, u0, params))
    disc = b_lin**2 - 4.0 * l2_v2_sq * c_const
    if disc <= 0.0:
        raise ConstructionFailure("second-mode amplitude has no real solution")
    r2 = (-b_lin + np.sqrt(disc)) / (2.0 * l2_v2_sq)
    u1 = r1 * v1 + r2 * v2
    return InitialData(u0=u0, u1=u1,
                       meta={"method": "energy_level", "R": R, "B": B,
                             "r1": r1, "r2": float(r2), "chi": chi_val})


def _negative_energy_amplitude(grid: Grid, params: ModelParams,
                               phi: np.ndarray) -> float:
    """Amplitude at which the potential energy of a*phi crosses zero."""

    def J_of(a: float) -> float:
        return potential_J(grid, a * phi, params)

    lo, hi = 1.0, 1.0
    for _ in range(80):
        if J_of(hi) < 0.0:
            break
        hi *= 2.0
    else:
        raise ConstructionFailure("potential energy never turns negative")
    for _ in range(80):
        if J_of(lo) > 0.0:
            break
        lo *= 0.5
    else:
        raise ConstructionFailure("potential energy has no positive branch")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if J_of(mid) < 0.0:
            hi = mid
        else:
            lo = mid
    return hi


def preset(name: str, grid: Grid, params: ModelParams,
           amplitude: float = 1.0, *, energy_R: float = 1.0,
           B: float | None = None) -> InitialData:
    """Named initial-data families.

    ``sine_bump``: amplitude times the first clamped-plate eigenfield,
    zero velocity.  ``negative_energy``: the same eigenfield scaled
    1.25x past its zero-potential amplitude (times ``amplitude``), so
    E(0) < 0 strictly.  ``high_energy``: two-mode construction at
    energy level ``energy_R`` with the growth weight ``B`` (computed
    from the concavity chain when not supplied).
    """
    if name not in PRESET_NAMES:
        raise ConstructionFailure(f"unknown preset {name!r}; "
                                  f"expected one of {PRESET_NAMES}")
    if name == "high_energy":
        if B is None:
            from .bounds import thm31_constants

            consts = compute_constants(grid, params)
            chain = thm31_constants(params, consts.B1)
            if not chain.feasible:
                raise ConstructionFailure("growth chain infeasible; "
                                          "cannot pick the energy weight B")
            B = chain.B
        data = construct_energy_level(grid, params, energy_R, B)
        data.meta["preset"] = name
        return data

    _, phi = smallest_eigen(grid, "biharmonic")
    if name == "sine_bump":
        u0 = amplitude * phi
        return InitialData(u0=u0, u1=np.zeros_like(u0),
                           meta={"preset": name, "amplitude": amplitude})

    root = _negative_energy_amplitude(grid, params, phi)
    a = 1.25 * root * amplitude
    u0 = a * phi
    if potential_J(grid, u0, params) >= 0.0:
        raise ConstructionFailure(
            f"amplitude {a} leaves E(0) >= 0; increase the amplitude factor")
    return InitialData(u0=u0, u1=np.zeros_like(u0),
                       meta={"preset": name, "amplitude": amplitude,
                             "scaled_amplitude": a, "zero_crossing": root})
