"""Blow-up certificates: growth laws and two-sided bounds on the blow-up time.

Four constant chains are evaluated for given initial data.  The
concavity chain (`thm31_*`) classifies the data and produces the
exponential growth law for inner(u, u_t) - B*E(t).  Two differential
inequality chains (`thm32_upper`, `thm33_upper`) give upper bounds on
the blow-up time for positive and negative initial energy.  Two
quadrature chains (`thm34_lower`, `thm35_lower`) give lower bounds.

Every abstract constant entering a chain (B1, lambda_1, C, B*, C_a,
C_b) is the discrete grid constant from :mod:`beamblow.spectra`, so
each inequality is evaluated for the semi-discrete system the
integrator actually advances, not for the continuum limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from .dynamics import DEFAULT_THRESHOLDS, BlowupEstimate, Trajectory, detect_blowup
from .errors import ConfigError, ConvergenceFailure
from .functionals import ModelParams, energy_E
from .mesh import Grid, grad_norm_sq, inner, lap_norm_sq, norm_l2, norm_lq
from .spectra import VariationalConstants


def _largest_admissible(pred, hi: float, *, iters: int = 100) -> float:
    """Largest x in (0, hi] passing ``pred``, located by bisection.

    Assumes ``pred`` holds near 0 and fails past a single changeover
    point.  Returns 0.0 when the predicate fails even arbitrarily
    close to 0 (infeasible chain).  The returned point itself passes
    the predicate.
    """
    if pred(hi):
        return hi
    lo = hi
    for _ in range(80):
        lo *= 0.5
        if pred(lo):
            break
    else:
        return 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo


# ---------------------------------------------------------------------------
# concavity chain


@dataclass(frozen=True)
class Thm31Chain:
    """Constants of the exponential-growth certificate.

    The free parameter eps is walked down through nested admissible
    intervals (delta0 >= delta1 >= delta2 >= delta3) and finally fixed
    at eps0 = delta3/2.  A is the growth rate, B the energy weight in
    the growth functional inner(u, u_t) - B*E(t).
    """

    p: float
    r: float
    B1: float
    s: float
    delta0: float
    delta1: float
    delta2: float
    delta3: float
    eps0: float
    A: float
    B: float
    feasible: bool
    note: str = ""

    def theta(self, eps: float) -> float:
        return eps**self.r * (1.0 - self.s) / (self.r + 1.0)

    def g(self, eps: float) -> float:
        return (self.p + 1.0) * (1.0 - self.theta(eps)) - 2.0 - eps

    def h(self, eps: float) -> float:
        return 0.5 * self.g(eps) / self.B1**2 - self.theta(eps)

    def A_of(self, eps: float) -> float:
        hval = self.h(eps)
        if hval <= 0.0:
            return 0.0
        return math.sqrt(2.0 * ((self.p + 1.0) * (1.0 - self.theta(eps)) + 2.0) * hval)

    def B_of(self, eps: float) -> float:
        aval = self.A_of(eps)
        if aval <= 0.0:
            return math.inf
        return (self.p + 1.0) * (1.0 - self.theta(eps)) / aval

    def self_consistent(self) -> bool:
        """Re-verify the defining inequalities at the final eps0."""
        if not self.feasible:
            return False
        ok = self.g(self.eps0) > 0.0 and self.h(self.eps0) > 0.0
        return ok and self.B_of(self.eps0) <= self.r / ((self.r + 1.0) * self.eps0)


def thm31_constants(params: ModelParams, B1: float) -> Thm31Chain:
    """Resolve the admissible eps window and the growth constants A, B.

    delta0 caps eps a priori; delta1 keeps g positive, delta2 keeps h
    positive, delta3 keeps the energy weight B(eps) below
    r/((r+1) eps).  Each restriction is located by bisection on its
    predicate.  eps0 = delta3/2 sits strictly inside every window.
    """
    if B1 <= 0.0:
        raise ValueError("B1 must be positive")
    p, r, gam = params.p, params.r, params.gamma
    s = (p - r) / (p - 1.0)
    one_minus_s = (r - 1.0) / (p - 1.0)

    if one_minus_s == 0.0:
        delta0 = 1.0
    else:
        cap = ((p - 2.0 * gam - 1.0) * (r + 1.0) / ((p + 1.0) * one_minus_s)) ** (1.0 / r)
        delta0 = min(1.0, cap)

    probe = Thm31Chain(p=p, r=r, B1=B1, s=s, delta0=delta0, delta1=0.0,
                       delta2=0.0, delta3=0.0, eps0=0.0, A=0.0,
                       B=math.inf, feasible=False)

    delta1 = _largest_admissible(lambda e: probe.g(e) > 0.0, delta0)
    delta2 = _largest_admissible(lambda e: probe.h(e) > 0.0, delta1) if delta1 > 0 else 0.0
    if delta2 > 0:
        weight_cap = lambda e: probe.B_of(e) <= r / ((r + 1.0) * e)
        delta3 = _largest_admissible(weight_cap, delta2)
    else:
        delta3 = 0.0

    if delta3 <= 0.0:
        return Thm31Chain(p=p, r=r, B1=B1, s=s, delta0=delta0, delta1=delta1,
                          delta2=delta2, delta3=0.0, eps0=0.0, A=0.0,
                          B=math.inf, feasible=False,
                          note="no admissible eps window")

    eps0 = 0.5 * delta3
    chain = Thm31Chain(p=p, r=r, B1=B1, s=s, delta0=delta0, delta1=delta1,
                       delta2=delta2, delta3=delta3, eps0=eps0,
                       A=probe.A_of(eps0), B=r / ((r + 1.0) * eps0),
                       feasible=True)
    if not chain.self_consistent():
        return Thm31Chain(p=p, r=r, B1=B1, s=s, delta0=delta0, delta1=delta1,
                          delta2=delta2, delta3=delta3, eps0=eps0,
                          A=chain.A, B=chain.B, feasible=False,
                          note="post-hoc consistency check failed")
    return chain


def thm31_check(grid: Grid, u0: np.ndarray, u1: np.ndarray,
                params: ModelParams, chain: Thm31Chain, E0: float) -> str:
    """Classify initial data for the growth certificate.

    ``case_i``: negative initial energy.  ``case_ii``: nonnegative
    energy dominated by the velocity correlation, E0 < inner(u0,u1)/B.
    Anything else is ``not-applicable``.
    """
    if E0 < 0.0:
        return "case_i"
    if not chain.feasible:
        return "not-applicable"
    if E0 < inner(grid, u0, u1) / chain.B:
        return "case_ii"
    return "not-applicable"


def growth_functional(grid: Grid, u: np.ndarray, v: np.ndarray,
                      chain: Thm31Chain, E_val: float) -> float:
    """F(t) = inner(u, u_t) - B*E(t); grows at least like F(0) e^{At}."""
    return inner(grid, u, v) - chain.B * E_val


def growth_series(traj: Trajectory, chain: Thm31Chain) -> np.ndarray:
    """Evaluate the growth functional along a recorded trajectory."""
    return np.array([rec.inner_uv - chain.B * rec.snap.E for rec in traj.records])


# ---------------------------------------------------------------------------
# upper bound, positive energy


@dataclass(frozen=True)
class Thm32Chain:
    """Constant chain for the positive-energy upper bound."""

    alpha: float = math.nan
    mu: float = math.nan
    M: float = math.nan
    mu0: float = math.nan
    zeta: float = math.nan
    eps: float = math.nan
    C1: float = math.nan
    s0: float = math.nan
    C2: float = math.nan
    mu1: float = math.nan
    mu2: float = math.nan
    L0: float = math.nan
    T_upper: float | None = None
    T_upper_as_printed: float | None = None
    applicable: bool = False
    note: str = ""


def _grad_interpolation_constant(alpha: float, gamma: float) -> float:
    """Best constant C2 with x^{2/(1-a)} <= C2 (x^2 + x^{2(g+1)}) for x >= 0.

    Scalar maximization of f(x) = x^m / (x^2 + x^{2(g+1)}), m = 2/(1-a).
    The ratio vanishes at both ends of (0, inf) whenever 2 < m < 2(g+1),
    with a single interior critical point; at either degenerate limit the
    supremum is 1 (approached at 0 or infinity).
    """
    m = 2.0 / (1.0 - alpha)
    hi = 2.0 * (gamma + 1.0)
    if m <= 2.0 + 1e-12 or m >= hi - 1e-12:
        return 1.0
    lx = math.log((m - 2.0) / (hi - m)) / (2.0 * gamma)

    def logf(y: float) -> float:
        return (m - hi) * y - math.log1p(math.exp(-(hi - 2.0) * y))

    best = logf(lx)
    res = minimize_scalar(lambda y: -logf(y), bounds=(lx - 2.0, lx + 2.0),
                          method="bounded", options={"xatol": 1e-14})
    if res.success:
        best = max(best, -float(res.fun))
    return math.exp(best)


def _c1_constant(alpha: float, p: float, volume: float) -> float:
    q = 2.0 * (1.0 - alpha) - 1.0
    return (q / (2.0 * (1.0 - alpha))) * volume ** ((p - 1.0) / (p + 1.0) / q)


def thm32_upper(grid: Grid, u0: np.ndarray, u1: np.ndarray,
                params: ModelParams, consts: VariationalConstants,
                mu: float = 1.0, *, m_safety: float = 2.0,
                alpha_override: float | None = None,
                eps_override: float | None = None) -> Thm32Chain:
    """Upper bound on the blow-up time for positive initial energy.

    The auxiliary functional L = H^{1-alpha} + eps(inner(u,u_t) +
    ||grad u||^2/2), H = E(0) - E(t), satisfies L' >= (mu1/mu2)
    L^{1/(1-alpha)} once M (the damping absorber) and eps are fixed.
    M is set to ``m_safety`` times the smallest value keeping both
    absorbed coefficients mu0 and zeta positive; eps to half its
    admissible cap (1-alpha)/M.  T_upper integrates that inequality;
    the as-printed variant with the inverted prefactor is reported
    alongside.
    """
    p, r, gam, beta = params.p, params.r, params.gamma, params.beta
    if mu <= 0.0:
        raise ValueError("mu must be positive")
    if gam <= 0.0 or beta <= 0.0:
        return Thm32Chain(mu=mu, note="needs gamma > 0 and beta > 0")
    E0 = energy_E(grid, u0, u1, params)
    alpha_cap = min((p - 1.0) / (2.0 * (p + 1.0)), gam / (gam + 1.0))
    if E0 <= 0.0:
        return Thm32Chain(mu=mu, alpha=alpha_cap,
                          note="needs E(0) > 0 (coefficient mu/2 E(0) degenerates)")
    alpha = alpha_cap if alpha_override is None else float(alpha_override)
    if not 0.0 < alpha <= alpha_cap:
        raise ConfigError(f"alpha override must lie in (0, {alpha_cap}]")

    s = (p - r) / (p - 1.0)
    lam1 = consts.lam1_bih
    coef_mu0 = 0.25 * (p + 2.0 * gam - 1.0) * lam1
    kappa = (p - (2.0 * gam + 1.0)) / (2.0 * (p + 1.0))
    base = r**r * E0 ** (alpha * r) / (r + 1.0) ** (r + 1.0)
    m_crit = (base * s / coef_mu0) ** (1.0 / r)
    if s < 1.0:
        m_crit = max(m_crit, (base * (1.0 - s) / kappa) ** (1.0 / r))
    M = m_safety * m_crit
    mu0 = coef_mu0 - base * s / M**r
    zeta = kappa - base * (1.0 - s) / M**r

    eps_cap = (1.0 - alpha) / M
    eps = 0.5 * eps_cap if eps_override is None else float(eps_override)
    if not 0.0 < eps <= eps_cap:
        raise ConfigError(f"eps override must lie in (0, {eps_cap}]")

    mu1 = eps * min(0.25 * (p + 2.0 * gam - 1.0),
                    (p - (2.0 * gam + 1.0)) / (2.0 * (gam + 1.0)) * beta,
                    0.5 * (p + 2.0 * gam + 3.0),
                    zeta,
                    0.5 * mu * E0)

    s0 = 2.0 / (2.0 * (1.0 - alpha) - 1.0)
    C1 = _c1_constant(alpha, p, grid.volume)
    C2 = _grad_interpolation_constant(alpha, gam)
    l = 1.0 / (1.0 - alpha)
    # the unit coefficient of H in the split of L^{1/(1-alpha)} belongs
    # in the max alongside the eps-weighted entries
    mu2 = 2.0 ** (2.0 * alpha / (1.0 - alpha)) * max(
        eps**l / (2.0 * (1.0 - alpha)),
        eps**l * C1 * s0 / (p + 1.0),
        eps**l * C1 * (p + 1.0 - s0) / (p + 1.0),
        (0.5 * eps) ** l * C2,
        1.0)

    L0 = eps * (inner(grid, u0, u1) + 0.5 * grad_norm_sq(grid, u0))
    norm_condition = norm_l2(grid, u0) ** 2 >= (p + 2.0 * gam + 3.0 + mu) / (2.0 * mu0) * E0

    chain = Thm32Chain(alpha=alpha, mu=mu, M=M, mu0=mu0, zeta=zeta, eps=eps,
                       C1=C1, s0=s0, C2=C2, mu1=mu1, mu2=mu2, L0=L0)
    if not norm_condition:
        return replace(chain, note="initial mass condition fails")
    if L0 <= 0.0:
        return replace(chain, note="L(0) <= 0")
    if mu1 <= 0.0:
        return replace(chain, note="vanishing growth coefficient")

    decay = L0 ** (-alpha / (1.0 - alpha)) * (1.0 - alpha) / alpha
    return Thm32Chain(alpha=alpha, mu=mu, M=M, mu0=mu0, zeta=zeta, eps=eps,
                      C1=C1, s0=s0, C2=C2, mu1=mu1, mu2=mu2, L0=L0,
                      T_upper=mu2 / mu1 * decay,
                      T_upper_as_printed=mu1 / mu2 * decay,
                      applicable=True)


# ---------------------------------------------------------------------------
# upper bound, negative energy


@dataclass(frozen=True)
class Thm33Chain:
    """Constant chain for the negative-energy upper bound."""

    alpha: float = math.nan
    H0: float = math.nan
    delta: float = math.nan
    C3: float = math.nan
    eps: float = math.nan
    mu3: float = math.nan
    mu4: float = math.nan
    L0: float = math.nan
    T_upper: float | None = None
    T_upper_as_printed: float | None = None
    applicable: bool = False
    note: str = ""


def thm33_upper(grid: Grid, u0: np.ndarray, u1: np.ndarray,
                params: ModelParams, consts: VariationalConstants, *,
                alpha_override: float | None = None,
                eps_override: float | None = None) -> Thm33Chain:
    """Upper bound on the blow-up time for negative initial energy.

    Here H = -E(t) >= H0 > 0 and no mass condition is needed.  delta
    is fixed so the binding positivity margin v1 - C3 delta^r equals
    half its delta -> 0 value; eps takes half the tighter of its two
    caps (the damping-absorption cap and, when inner(u0,u1) +
    ||grad u0||^2/2 < 0, the cap keeping L(0) positive).
    """
    p, r, gam, beta = params.p, params.r, params.gamma, params.beta
    if gam <= 0.0 or beta <= 0.0:
        return Thm33Chain(note="needs gamma > 0 and beta > 0")
    E0 = energy_E(grid, u0, u1, params)
    alpha_cap = min((p - r) / ((p + 1.0) * r),
                    (p - 1.0) / (2.0 * (p + 1.0)),
                    gam / (gam + 1.0))
    if E0 >= 0.0:
        return Thm33Chain(alpha=alpha_cap, note="needs E(0) < 0")
    H0 = -E0
    alpha = alpha_cap if alpha_override is None else float(alpha_override)
    if not 0.0 < alpha <= alpha_cap:
        raise ConfigError(f"alpha override must lie in (0, {alpha_cap}]")

    v1 = (p - (2.0 * gam + 1.0)) / (2.0 * (p + 1.0))
    # conservative measure factor: the printed exponent and the one the
    # Hoelder step actually produces coincide on unit volume; off unit
    # volume take whichever is larger
    e_printed = (p - r - (p + 1.0) * alpha * r) / (p + 1.0)
    e_derived = ((p + 1.0) * alpha * r + r + 1.0) * (p - r) / ((r + 1.0) * (p + 1.0))
    vol_factor = max(grid.volume**e_printed, grid.volume**e_derived)
    C3 = (1.0 + 1.0 / H0) / (r + 1.0) * (p + 1.0) ** (-alpha * r) * vol_factor

    delta = (v1 / (2.0 * C3)) ** (1.0 / r)
    m1 = v1 - C3 * delta**r
    m2 = 0.5 * (p + 2.0 * gam + 3.0) - C3 * delta**r

    correlation = inner(grid, u0, u1) + 0.5 * grad_norm_sq(grid, u0)
    eps_cap = (1.0 - alpha) * (r + 1.0) * delta / r
    if correlation < 0.0:
        eps_cap = min(eps_cap, H0 ** (1.0 - alpha) / (-correlation))
    eps = 0.5 * eps_cap if eps_override is None else float(eps_override)
    if not 0.0 < eps <= eps_cap:
        raise ConfigError(f"eps override must lie in (0, {eps_cap}]")

    mu3 = eps * min(0.25 * (p + 2.0 * gam - 1.0),
                    (p - (2.0 * gam + 1.0)) / (2.0 * (gam + 1.0)) * beta,
                    m1,
                    m2)

    C1 = _c1_constant(alpha, p, grid.volume)
    C2 = _grad_interpolation_constant(alpha, gam)
    l = 1.0 / (1.0 - alpha)
    mu4 = 2.0 ** (2.0 * alpha / (1.0 - alpha)) * max(
        eps**l / (2.0 * (1.0 - alpha)),
        1.0 + eps**l * C1 * (1.0 + 1.0 / H0),
        (0.5 * eps) ** l * C2)

    L0 = H0 ** (1.0 - alpha) + eps * correlation
    chain = Thm33Chain(alpha=alpha, H0=H0, delta=delta, C3=C3, eps=eps,
                       mu3=mu3, mu4=mu4, L0=L0)
    if L0 <= 0.0:
        return replace(chain, note="L(0) <= 0")
    if mu3 <= 0.0:
        return replace(chain, note="vanishing growth coefficient")

    decay = L0 ** (-alpha / (1.0 - alpha)) * (1.0 - alpha) / alpha
    return Thm33Chain(alpha=alpha, H0=H0, delta=delta, C3=C3, eps=eps,
                      mu3=mu3, mu4=mu4, L0=L0,
                      T_upper=mu4 / mu3 * decay,
                      T_upper_as_printed=mu3 / mu4 * decay,
                      applicable=True)


# ---------------------------------------------------------------------------
# lower bounds


@dataclass(frozen=True)
class Thm34Result:
    """Lower bound from the source-dominated growth of F = ||u||_{p+1}^{p+1}."""

    F0: float
    varpi: float
    K1: float
    K2: float
    T_lower_34_truncated: float
    T_lower_34_with_tail: float


@dataclass(frozen=True)
class Thm35Result:
    """Lower bound from the strong-damping smoothing of the quadratic energy."""

    G0: float
    C_eff: float
    T_lower_35: float
    note: str = ""


@dataclass(frozen=True)
class LowerBounds:
    """Merged view of both lower-bound chains."""

    F0: float
    varpi: float
    K1: float
    K2: float
    T_lower_34_truncated: float
    T_lower_34_with_tail: float
    G0: float
    C_eff: float
    T_lower_35: float

    @classmethod
    def from_parts(cls, r34: Thm34Result, r35: Thm35Result) -> "LowerBounds":
        return cls(F0=r34.F0, varpi=r34.varpi, K1=r34.K1, K2=r34.K2,
                   T_lower_34_truncated=r34.T_lower_34_truncated,
                   T_lower_34_with_tail=r34.T_lower_34_with_tail,
                   G0=r35.G0, C_eff=r35.C_eff, T_lower_35=r35.T_lower_35)


def _lower_34_integral(F0: float, K1: float, K2: float, p: float) -> tuple[float, float]:
    """Integrate 1/(K1 + y + K2 y^p) from F0 to infinity.

    Piecewise adaptive quadrature on doubling segments until the
    analytic overestimate of the remaining tail, Y^{1-p}/((p-1) K2),
    drops below 1e-8 of the accumulated value.  Returns (truncated,
    truncated + tail); the truncated value is the certified bound.
    """
    if F0 <= 0.0 and K1 <= 0.0:
        return math.inf, math.inf

    def integrand(y: float) -> float:
        return 1.0 / (K1 + y + K2 * y**p)

    total = 0.0
    a = F0
    width = max(F0, 1.0)
    for _ in range(4000):
        b = a + width
        part, _ = quad(integrand, a, b, limit=200)
        total += part
        a = b
        width *= 2.0
        tail = a ** (1.0 - p) / ((p - 1.0) * K2)
        if tail < 1e-8 * total:
            return total, total + tail
    raise ConvergenceFailure("lower-bound quadrature did not reach its tail target")


def thm34_lower(grid: Grid, u0: np.ndarray, u1: np.ndarray,
                params: ModelParams, b_star: float) -> Thm34Result:
    """Lower bound via F' <= K1 + F + K2 F^p for F = ||u||_{p+1}^{p+1}.

    varpi is the initial energy; for varpi <= 0 the energy terms in K1
    are dropped entirely (a conservative weakening, since the energy
    inequality only improves).  Zero data with K1 = 0 yields an
    infinite bound: no blow-up can start from rest.
    """
    if b_star <= 0.0:
        raise ValueError("b_star must be positive")
    p = params.p
    F0 = norm_lq(grid, u0, p + 1.0) ** (p + 1.0)
    varpi = energy_E(grid, u0, u1, params)
    w = max(varpi, 0.0)
    K1 = (p + 1.0) * (w + b_star ** (2.0 * p) * 2.0 ** (p - 2.0) * (2.0 * w) ** p)
    K2 = b_star ** (2.0 * p) * 2.0 ** (2.0 * p - 2.0) * (p + 1.0) ** (-p)
    truncated, with_tail = _lower_34_integral(F0, K1, K2, p)
    return Thm34Result(F0=F0, varpi=varpi, K1=K1, K2=K2,
                       T_lower_34_truncated=truncated,
                       T_lower_34_with_tail=with_tail)


def thm35_lower(grid: Grid, u0: np.ndarray, u1: np.ndarray,
                params: ModelParams, embed_ca: float, embed_cb: float) -> Thm35Result:
    """Lower bound via G' <= C_eff (2G)^p / 2^p for the quadratic energy G.

    G collects every quadratic piece of the energy plus the Kirchhoff
    well; the source term is absorbed through ||u_t||_{p+1} ||u||_{p+1}^p
    <= C_a C_b^p ||grad u_t|| ||lap u||^p and one Young split against
    the dissipation, leaving C_eff = (C_a C_b^p)^2 2^{p-2}.
    """
    if embed_ca <= 0.0 or embed_cb <= 0.0:
        raise ValueError("embedding constants must be positive")
    p, gam, beta = params.p, params.gamma, params.beta
    G = grad_norm_sq(grid, u0)
    G0 = (0.5 * norm_l2(grid, u1) ** 2 + 0.5 * G + 0.5 * lap_norm_sq(grid, u0)
          + beta / (2.0 * (gam + 1.0)) * G ** (gam + 1.0))
    C_eff = (embed_ca * embed_cb**p) ** 2 * 2.0 ** (p - 2.0)
    if G0 == 0.0:
        return Thm35Result(G0=0.0, C_eff=C_eff, T_lower_35=math.inf,
                           note="no-blow-up-possible-from-zero")
    return Thm35Result(G0=G0, C_eff=C_eff,
                       T_lower_35=G0 ** (1.0 - p) / ((p - 1.0) * C_eff))


# ---------------------------------------------------------------------------
# aggregation


@dataclass(frozen=True)
class BoundReport:
    """Everything the certificate machinery can say about one run."""

    E0: float
    thm31: Thm31Chain
    thm32: Thm32Chain
    thm33: Thm33Chain
    lowers: LowerBounds
    thm31_verdict: str
    verdicts: dict[str, bool] = field(default_factory=dict)
    T_upper: float | None = None
    T_num: float | None = None
    T_num_uncertainty: float | None = None
    blowup_detected: bool = False
    sandwich_ok: bool = True


def full_report(grid: Grid, u0: np.ndarray, u1: np.ndarray,
                params: ModelParams, consts: VariationalConstants,
                traj: Trajectory | None, *,
                estimate: BlowupEstimate | None = None,
                thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS,
                mu: float = 1.0, m_safety: float = 2.0,
                alpha_override: float | None = None,
                eps_override: float | None = None) -> BoundReport:
    """Evaluate every chain against one run and check the bound sandwich.

    Chain failures become not-applicable verdicts rather than errors.
    sandwich_ok is vacuously true when no blow-up was detected;
    otherwise it requires every certified lower bound at or below
    T_num and, when an upper chain applies, T_num at or below T_upper.
    """
    E0 = energy_E(grid, u0, u1, params)
    chain31 = thm31_constants(params, consts.B1)
    verdict31 = thm31_check(grid, u0, u1, params, chain31, E0)
    chain32 = thm32_upper(grid, u0, u1, params, consts, mu,
                          m_safety=m_safety, alpha_override=alpha_override,
                          eps_override=eps_override)
    chain33 = thm33_upper(grid, u0, u1, params, consts,
                          alpha_override=alpha_override,
                          eps_override=eps_override)
    lowers = LowerBounds.from_parts(
        thm34_lower(grid, u0, u1, params, consts.B_star),
        thm35_lower(grid, u0, u1, params, consts.C_a, consts.C_b))

    verdicts = {
        "thm31_case_i": verdict31 == "case_i",
        "thm31_case_ii": verdict31 == "case_ii",
        "thm32_applicable": bool(chain32.applicable and verdict31 == "case_ii"),
        "thm33_applicable": bool(chain33.applicable),
    }

    uppers = []
    if verdicts["thm32_applicable"] and chain32.T_upper is not None:
        uppers.append(chain32.T_upper)
    if verdicts["thm33_applicable"] and chain33.T_upper is not None:
        uppers.append(chain33.T_upper)
    T_upper = min(uppers) if uppers else None

    if estimate is None and traj is not None:
        times = traj.times()
        values = traj.series("lp1_u")
        estimate = detect_blowup(times, values, thresholds)

    detected = bool(estimate is not None and estimate.detected)
    T_num = estimate.T_num if estimate is not None else None
    uncertainty = estimate.uncertainty if estimate is not None else None

    sandwich_ok = True
    if detected and T_num is not None:
        for low in (lowers.T_lower_34_truncated, lowers.T_lower_35):
            if low > T_num:
                sandwich_ok = False
        if T_upper is not None and T_num > T_upper:
            sandwich_ok = False

    return BoundReport(E0=E0, thm31=chain31, thm32=chain32, thm33=chain33,
                       lowers=lowers, thm31_verdict=verdict31,
                       verdicts=verdicts, T_upper=T_upper, T_num=T_num,
                       T_num_uncertainty=uncertainty,
                       blowup_detected=detected, sandwich_ok=sandwich_ok)


def fmt(value) -> str:
    """Canonical scalar formatting for reports and CSV cells."""
    if value is None:
        return "none"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    return "%.17g" % float(value)


def report_items(report: BoundReport) -> list[tuple[str, str]]:
    """Flatten a BoundReport into ordered (key, value) string pairs."""
    c31, c32, c33, low = report.thm31, report.thm32, report.thm33, report.lowers
    items: list[tuple[str, str]] = [
        ("E0", fmt(report.E0)),
        ("thm31_verdict", report.thm31_verdict),
    ]
    items += [(k, fmt(v)) for k, v in report.verdicts.items()]
    items += [
        ("thm31.s", fmt(c31.s)),
        ("thm31.delta0", fmt(c31.delta0)),
        ("thm31.delta1", fmt(c31.delta1)),
        ("thm31.delta2", fmt(c31.delta2)),
        ("thm31.delta3", fmt(c31.delta3)),
        ("thm31.eps0", fmt(c31.eps0)),
        ("thm31.A", fmt(c31.A)),
        ("thm31.B", fmt(c31.B)),
        ("thm31.feasible", fmt(c31.feasible)),
        ("thm32.alpha", fmt(c32.alpha)),
        ("thm32.mu", fmt(c32.mu)),
        ("thm32.M", fmt(c32.M)),
        ("thm32.mu0", fmt(c32.mu0)),
        ("thm32.zeta", fmt(c32.zeta)),
        ("thm32.eps", fmt(c32.eps)),
        ("thm32.C1", fmt(c32.C1)),
        ("thm32.s0", fmt(c32.s0)),
        ("thm32.C2", fmt(c32.C2)),
        ("thm32.mu1", fmt(c32.mu1)),
        ("thm32.mu2", fmt(c32.mu2)),
        ("thm32.L0", fmt(c32.L0)),
        ("thm32.T_upper", fmt(c32.T_upper)),
        ("thm32.T_upper_as_printed", fmt(c32.T_upper_as_printed)),
        ("thm32.note", c32.note or "ok"),
        ("thm33.alpha", fmt(c33.alpha)),
        ("thm33.H0", fmt(c33.H0)),
        ("thm33.delta", fmt(c33.delta)),
        ("thm33.C3", fmt(c33.C3)),
        ("thm33.eps", fmt(c33.eps)),
        ("thm33.mu3", fmt(c33.mu3)),
        ("thm33.mu4", fmt(c33.mu4)),
        ("thm33.L0", fmt(c33.L0)),
        ("thm33.T_upper", fmt(c33.T_upper)),
        ("thm33.T_upper_as_printed", fmt(c33.T_upper_as_printed)),
        ("thm33.note", c33.note or "ok"),
        ("lower.F0", fmt(low.F0)),
        ("lower.varpi", fmt(low.varpi)),
        ("lower.K1", fmt(low.K1)),
        ("lower.K2", fmt(low.K2)),
        ("lower.T_lower_34_truncated", fmt(low.T_lower_34_truncated)),
        ("lower.T_lower_34_with_tail", fmt(low.T_lower_34_with_tail)),
        ("lower.G0", fmt(low.G0)),
        ("lower.C_eff", fmt(low.C_eff)),
        ("lower.T_lower_35", fmt(low.T_lower_35)),
        ("T_upper", fmt(report.T_upper)),
        ("T_num", fmt(report.T_num)),
        ("T_num_uncertainty", fmt(report.T_num_uncertainty)),
        ("blowup_detected", fmt(report.blowup_detected)),
        ("sandwich_ok", fmt(report.sandwich_ok)),
    ]
    return items


def report_lines(report: BoundReport) -> list[str]:
    """Render a BoundReport as `key = value` lines."""
    return [f"{key} = {value}" for key, value in report_items(report)]


def summary_row(report: BoundReport) -> dict[str, str]:
    """Compact per-run row for sweep tables and the bounds CSV."""
    return {
        "E0": fmt(report.E0),
        "thm31_verdict": report.thm31_verdict,
        "thm31_case_i": fmt(report.verdicts.get("thm31_case_i", False)),
        "thm31_case_ii": fmt(report.verdicts.get("thm31_case_ii", False)),
        "thm32_applicable": fmt(report.verdicts.get("thm32_applicable", False)),
        "thm33_applicable": fmt(report.verdicts.get("thm33_applicable", False)),
        "T_num": fmt(report.T_num),
        "T_upper": fmt(report.T_upper),
        "T_lower_34_truncated": fmt(report.lowers.T_lower_34_truncated),
        "T_lower_34_with_tail": fmt(report.lowers.T_lower_34_with_tail),
        "T_lower_35": fmt(report.lowers.T_lower_35),
        "sandwich_ok": fmt(report.sandwich_ok),
    }
