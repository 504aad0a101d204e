"""Energy functionals for the damped extensible beam model.

The model couples a clamped plate operator with an extensible-beam
nonlinearity M(s) = 1 + beta * s^gamma acting on the Laplacian, strong
damping, a power velocity damping of exponent r, and a focusing source
of exponent p.  Throughout, G = ||grad u||^2, Bq = ||lap u||^2 and
F = ||u||_{p+1}^{p+1}; the functionals of interest are

    J(u) = G/2 + Bq/2 + beta/(2(gamma+1)) G^{gamma+1} - F/(p+1)
    I(u) = G + Bq + beta G^{gamma+1} - F
    E(u, v) = ||v||^2 / 2 + J(u)

and the exact dissipation identity E'(t) = -||v||_{r+1}^{r+1}
- ||grad v||^2, which holds for the spatial discretization because all
norms are built from the operator matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import mesh
from .mesh import Grid


@dataclass(frozen=True)
class ModelParams:
    """Exponents and coefficients of the model.

    The admissible regime for the blow-up theory is 1 <= r < p and
    1 < 2*gamma + 1 < p with beta >= 0.  The dataclass allows gamma = 0
    (pure linear stiffness) so that individual functionals stay usable
    outside the full regime; the run-configuration layer enforces the
    strict regime for end-to-end runs.
    """

    p: float
    r: float
    gamma: float
    beta: float
    dim: int = 1

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if not (1 <= self.r < self.p):
            raise ValueError(f"need 1 <= r < p, got r={self.r}, p={self.p}")
        if not self.beta >= 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")
        if not 2 * self.gamma + 1 < self.p:
            raise ValueError(
                f"need 2*gamma + 1 < p, got gamma={self.gamma}, p={self.p}")
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")


def kirchhoff(params: ModelParams, s: float) -> float:
    """Stiffness coefficient M(s) = 1 + beta * s^gamma for s >= 0."""
    if s < 0:
        raise ValueError(f"stiffness argument must be nonnegative, got {s}")
    if params.gamma == 0:
        return 1.0 + params.beta
    return 1.0 + params.beta * s**params.gamma


def source_term(params: ModelParams, u: np.ndarray) -> np.ndarray:
    """Focusing source |u|^{p-1} u, evaluated nodewise."""
    return np.abs(u)**(params.p - 1.0) * u


def damping_term(params: ModelParams, v: np.ndarray) -> np.ndarray:
    """Velocity damping |v|^{r-1} v; the r = 1 case short-circuits to v
    so that zero velocity never evaluates 0^0."""
    if params.r == 1:
        return v
    return np.abs(v)**(params.r - 1.0) * v


def potential_J(grid: Grid, u: np.ndarray, params: ModelParams) -> float:
    G = mesh.grad_norm_sq(grid, u)
    Bq = mesh.lap_norm_sq(grid, u)
    F = mesh.norm_lq(grid, u, params.p + 1)**(params.p + 1)
    return potential_from_parts(G, Bq, F, params)


def potential_from_parts(G: float, Bq: float, F: float,
                         params: ModelParams) -> float:
    return (0.5 * (G + Bq)
            + params.beta / (2.0 * (params.gamma + 1.0)) * G**(params.gamma + 1.0)
            - F / (params.p + 1.0))


def nehari_I(grid: Grid, u: np.ndarray, params: ModelParams) -> float:
    G = mesh.grad_norm_sq(grid, u)
    Bq = mesh.lap_norm_sq(grid, u)
    F = mesh.norm_lq(grid, u, params.p + 1)**(params.p + 1)
    return nehari_from_parts(G, Bq, F, params)


def nehari_from_parts(G: float, Bq: float, F: float,
                      params: ModelParams) -> float:
    return G + Bq + params.beta * G**(params.gamma + 1.0) - F


def energy_E(grid: Grid, u: np.ndarray, v: np.ndarray,
             params: ModelParams) -> float:
    return 0.5 * mesh.norm_l2(grid, v)**2 + potential_J(grid, u, params)


def dissipation_rate(grid: Grid, v: np.ndarray, params: ModelParams) -> float:
    """Instantaneous energy loss -E'(t), always nonnegative."""
    return (mesh.norm_lq(grid, v, params.r + 1)**(params.r + 1)
            + mesh.grad_norm_sq(grid, v))


@dataclass(frozen=True)
class FunctionalSnapshot:
    """All scalar diagnostics of a state (u, v) at one instant."""

    E: float
    J: float
    I: float
    l2_u: float
    lp1_u: float
    linf_u: float
    l2_v: float
    grad_u_sq: float
    lap_u_sq: float
    dissipation_rate: float


def snapshot(grid: Grid, u: np.ndarray, v: np.ndarray,
             params: ModelParams) -> FunctionalSnapshot:
    G = mesh.grad_norm_sq(grid, u)
    Bq = mesh.lap_norm_sq(grid, u)
    lp1 = mesh.norm_lq(grid, u, params.p + 1)
    F = lp1**(params.p + 1)
    J = potential_from_parts(G, Bq, F, params)
    l2_v = mesh.norm_l2(grid, v)
    return FunctionalSnapshot(
        E=0.5 * l2_v**2 + J,
        J=J,
        I=nehari_from_parts(G, Bq, F, params),
        l2_u=mesh.norm_l2(grid, u),
        lp1_u=lp1,
        linf_u=mesh.max_norm(u),
        l2_v=l2_v,
        grad_u_sq=G,
        lap_u_sq=Bq,
        dissipation_rate=dissipation_rate(grid, v, params),
    )


def classify(grid: Grid, u: np.ndarray, params: ModelParams,
             depth: float, rtol: float = 1e-9) -> str:
    """Place a displacement field relative to the potential well.

    Returns one of ``stable_W`` (J < d and I > 0), ``unstable_V``
    (J < d and I < 0), ``near_nehari`` (I within a relative band of
    zero while J < d) or ``indeterminate`` (J >= d, where the sign of
    I carries no stability information).
    """
    G = mesh.grad_norm_sq(grid, u)
    Bq = mesh.lap_norm_sq(grid, u)
    F = mesh.norm_lq(grid, u, params.p + 1)**(params.p + 1)
    J = potential_from_parts(G, Bq, F, params)
    I = nehari_from_parts(G, Bq, F, params)
    scale = G + Bq + F
    if J >= depth:
        return "indeterminate"
    if abs(I) <= rtol * max(scale, 1.0):
        return "near_nehari"
    return "stable_W" if I > 0 else "unstable_V"


def lemma21_verdict(H_norm: float, I_val: float, J_val: float,
                    lam_star: float, depth: float, scale: float,
                    band: float = 1e-9) -> str:
    """Consistency verdict for the potential-well dichotomy.

    For states with J <= d the dichotomy is an equivalence: I < 0
    exactly when the graph norm exceeds lambda*.  Both failure modes
    (small norm with negative I, large norm with positive I) are
    therefore violations.  Comparisons within a relative ``band`` of
    the dividing values are reported as ``near_boundary`` rather than
    asserted either way.

    Returns ``outside_well``, ``near_boundary``, ``violation``,
    ``consistent_interior`` (H below lambda*, I positive) or
    ``consistent_exterior`` (I negative, H above lambda*).
    """
    tol_I = band * max(scale, 1.0)
    if J_val > depth + band * max(abs(depth), 1.0):
        return "outside_well"
    small_H = H_norm <= lam_star * (1.0 - band)
    large_H = H_norm >= lam_star * (1.0 + band)
    neg_I = I_val < -tol_I
    pos_I = I_val > tol_I
    if small_H and neg_I:
        return "violation"
    if large_H and pos_I:
        return "violation"
    if small_H and pos_I:
        return "consistent_interior"
    if neg_I and large_H:
        return "consistent_exterior"
    return "near_boundary"
