"""Analytic and numeric convergence-rate machinery.

Everything here is deterministic given its inputs: the discounted
inter-arrival kernel and its Laplace root w, the defective renewal
solver, the intake-overlap deficit eta and its power-law envelope, the
age-coalescence probabilities (p1, p2) for the three hazard regimes,
and the assembled total-variation / Wasserstein bound curves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .distributions import (
    DistributionSpec,
    Family,
    HazardProfile,
    hazard_profile,
)
from .errors import AssumptionError, CaseMismatchError, NoDensityError

__all__ = [
    "RenewalKernel",
    "RenewalSolution",
    "HolderData",
    "EtaProfile",
    "BoundCurve",
    "RateReport",
    "ModelSpec",
    "find_w",
    "solve_renewal",
    "exponential_case_decay",
    "eta",
    "eta_envelope",
    "age_bound_params",
    "default_age_params",
    "sample_age_bound",
    "age_bound_tail",
    "tau_A_tail_bound",
    "fit_dominating_exponential",
    "mean_discount_factor",
    "convergence_bounds",
    "exp_case_bounds",
]

_QUAD_OPTS = dict(epsabs=1e-12, epsrel=1e-12, limit=200)


# ---------------------------------------------------------------------------
# Discounted renewal kernel and its Laplace root
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RenewalKernel:
    """Sub-probability kernel J(dx) = E[exp(-p*Theta*x)] G(dx).

    ``density`` is the kernel density j, ``forcing`` the function
    z(t) = E[exp(-p*Theta*t)] P(DeltaT > t).  The kernel mass J(R) is
    strictly below 1 whenever Theta has positive support, which makes
    the renewal equation Z = z + J * Z defective.
    """

    G: DistributionSpec
    H: DistributionSpec
    p: float = 1.0

    def __post_init__(self):
        if self.p < 1:
            raise AssumptionError("kernel order p must be >= 1")

    def discount(self, t: float) -> float:
        """E[exp(-p*Theta*t)]."""
        return self.H.laplace(-self.p * t)

    def density(self, x: float) -> float:
        return self.discount(x) * self.G.density(x)

    def forcing(self, t: float) -> float:
        return self.discount(t) * self.G.survival(t)

    def mass(self) -> float:
        return self.psi(0.0)

    def domain_sup(self) -> float:
        """sup{u : psi(u) < inf}, from the supports of G and H."""
        return self.p * self.H.support()[0] + self.G.laplace_domain_sup()

    def psi(self, u: float) -> float:
        """Moment transform psi_J(u) = int exp(u*x) J(dx); +inf allowed."""
        if self.H.family is Family.DIRAC:
            return self.G.laplace(u - self.p * self.H.params[0])
        if u >= self.domain_sup():
            return math.inf
        lo, hi = self.G.support()
        try:
            val, _ = integrate.quad(
                lambda x: math.exp(u * x) * self.discount(x) * self.G.density(x),
                lo,
                hi,
                **_QUAD_OPTS,
            )
        except Exception:
            return math.inf
        return val


def find_w(kernel: RenewalKernel, cap: float = 64.0, tol: float = 1e-9) -> float:
    """Laplace root w = sup{u : psi_J(u) < 1}, bracketed by bisection.

    Returns +inf when psi_J stays below 1 all the way up to ``cap``
    (the decay is then faster than any probed exponential rate).
    """
    if kernel.psi(0.0) >= 1.0:
        raise AssumptionError(
            "kernel mass must be below 1; the metabolic rate must be positive"
        )
    hi = 1.0
    while kernel.psi(hi) < 1.0:
        hi *= 2.0
        if hi > cap:
            return math.inf
    lo = hi / 2.0 if hi > 1.0 else 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if kernel.psi(mid) < 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class RenewalSolution:
    grid: np.ndarray
    Z_tilted: np.ndarray  # exp(w_shift*t) * Z(t)
    Z: np.ndarray
    C: float  # grid maximum of the tilted solution
    w_shift: float

    def residual(self, kernel: RenewalKernel) -> np.ndarray:
        """Self-consistency defect |Z' - z' - J' * Z'| on the grid."""
        h = self.grid[1] - self.grid[0]
        jp = np.array([kernel.density(t) for t in self.grid]) * np.exp(
            self.w_shift * self.grid
        )
        zp = np.array([kernel.forcing(t) for t in self.grid]) * np.exp(
            self.w_shift * self.grid
        )
        n = len(self.grid)
        conv = np.convolve(jp, self.Z_tilted)[:n] * h
        conv -= 0.5 * h * (jp[0] * self.Z_tilted + jp * self.Z_tilted[0])
        return np.abs(self.Z_tilted - zp - conv)


def solve_renewal(
    kernel: RenewalKernel,
    w_shift: float = 0.0,
    grid_step: float = 1e-3,
    horizon: float = 10.0,
    forcing: Optional[Callable[[float], float]] = None,
    dri: bool = False,
) -> RenewalSolution:
    """Solve the tilted renewal equation Z' = z' + J' * Z' on a grid.

    Forward substitution of the trapezoid-discretized convolution.
    Requires the tilted kernel to stay defective (psi_J(w_shift) < 1)
    unless the caller vouches for direct Riemann integrability of the
    tilted forcing via ``dri=True``.
    """
    psi_at_shift = kernel.psi(w_shift)
    if psi_at_shift >= 1.0 and not dri:
        raise AssumptionError(
            f"tilted kernel is not defective (psi_J({w_shift:g}) = {psi_at_shift:g}); "
            "pass dri=True only if the tilted forcing is directly Riemann-integrable"
        )
    grid = np.arange(0.0, horizon + grid_step / 2, grid_step)
    n = len(grid)
    h = grid_step
    tilt = np.exp(w_shift * grid)
    jp = np.array([kernel.density(t) for t in grid]) * tilt
    if forcing is None:
        zp = np.array([kernel.forcing(t) for t in grid]) * tilt
    else:
        zp = np.array([forcing(t) for t in grid]) * tilt
    Zp = np.empty(n)
    Zp[0] = zp[0]
    denom = 1.0 - 0.5 * h * jp[0]
    for i in range(1, n):
        acc = 0.5 * h * jp[i] * Zp[0]
        if i > 1:
            acc += h * np.dot(jp[1:i], Zp[i - 1 : 0 : -1])
        Zp[i] = (zp[i] + acc) / denom
    Z = Zp * np.exp(-w_shift * grid)
    return RenewalSolution(grid=grid, Z_tilted=Zp, Z=Z, C=float(Zp.max()), w_shift=w_shift)


def exponential_case_decay(lam: float, H: DistributionSpec, p: float = 1.0) -> float:
    """Decay exponent lam * (1 - E[exp(-p*Theta*DeltaT)]) for G = Exp(lam)."""
    if lam <= 0:
        raise AssumptionError("rate must be positive")
    val, _ = integrate.quad(
        lambda t: lam * math.exp(-lam * t) * H.laplace(-p * t), 0.0, math.inf, limit=200
    )
    return lam * (1.0 - val)


def mean_discount_factor(G: DistributionSpec, H: DistributionSpec, p: float = 1.0) -> float:
    """E[exp(-p*Theta*DeltaT)] for independent DeltaT ~ G, Theta ~ H."""
    return RenewalKernel(G, H, p).mass()


# ---------------------------------------------------------------------------
# Intake overlap deficit eta
# ---------------------------------------------------------------------------


def eta(eps: float, F: DistributionSpec, method: str = "auto") -> float:
    """Half L1 distance between the intake density and its eps-shift."""
    if not F.has_density:
        raise NoDensityError("eta requires an intake law with a density")
    eps = abs(float(eps))
    if eps == 0.0:
        return 0.0
    if method not in ("auto", "closed", "quad"):
        raise ValueError(f"unknown method {method!r}")
    if method != "quad":
        closed = _eta_closed(eps, F)
        if closed is not None:
            return closed
        if method == "closed":
            raise ValueError(f"no closed form for {F.family.value}")
    return _eta_quad(eps, F)


def _eta_closed(eps: float, F: DistributionSpec) -> Optional[float]:
    if F.family is Family.UNIFORM:
        lo, hi = F.params
        return min(1.0, eps / (hi - lo))
    if F.family is Family.EXPONENTIAL:
        return -math.expm1(-F.params[0] * eps)
    if F.family is Family.SHIFTED_EXPONENTIAL:
        return -math.expm1(-F.params[1] * eps)
    return None


def _eta_quad(eps: float, F: DistributionSpec) -> float:
    lo, hi = F.support()
    pts = sorted({lo, lo + eps} | ({hi, hi + eps} if math.isfinite(hi) else set()))
    integrand = lambda u: abs(F.density(u) - F.density(u - eps))
    total = 0.0
    for left, right in zip(pts[:-1], pts[1:]):
        val, _ = integrate.quad(integrand, left, right, epsabs=1e-10, epsrel=1e-10, limit=200)
        total += val
    if not math.isfinite(hi):
        val, _ = integrate.quad(integrand, pts[-1], math.inf, epsabs=1e-10, limit=200)
        total += val
    return 0.5 * total


@dataclass(frozen=True)
class HolderData:
    """Smoothness data of the intake density: |f(x)-f(y)| <= K|x-y|**h,
    with either a compact support bound M or a polynomial tail
    f(x) <= C_tail * x**(-p_tail), p_tail > 2."""

    K: float
    h: float
    M: Optional[float] = None
    C_tail: Optional[float] = None
    p_tail: Optional[float] = None


@dataclass(frozen=True)
class EtaProfile:
    """eta together with whatever envelope data is available."""

    F: DistributionSpec
    holder: Optional[HolderData] = None

    def __call__(self, eps: float) -> float:
        return eta(eps, self.F)

    def tail_quantile_bound(self, eps: float) -> float:
        """Upper bound on the (1 - eps**h)-quantile of the intake law."""
        hd = self.holder
        if hd is None or hd.C_tail is None or hd.p_tail is None:
            raise AssumptionError("tail quantile bound needs polynomial-tail data")
        return (hd.C_tail / ((hd.p_tail - 1.0) * eps**hd.h)) ** (1.0 / (hd.p_tail - 1.0))


def eta_envelope(
    eps_max: float,
    F: DistributionSpec,
    holder: Optional[HolderData] = None,
    n_grid: int = 200,
) -> tuple[float, float]:
    """Power-law envelope (C, v) with sup_{x <= eps} eta(x) <= C * eps**v.

    Uses the smoothness data when supplied (compact support:
    C = K(M+1)/2, v = h; polynomial tail: the quantile-controlled
    constants), a closed form for the box and exponential families, and
    otherwise a numeric fit inflated to dominate eta on the grid.
    """
    if holder is not None:
        if holder.M is not None:
            return holder.K * (holder.M + 1.0) / 2.0, holder.h
        if holder.C_tail is not None and holder.p_tail is not None:
            if holder.p_tail <= 2.0:
                raise AssumptionError("polynomial tail exponent must exceed 2")
            C = (
                holder.K
                * ((holder.C_tail / (holder.p_tail - 1.0)) ** (1.0 / (holder.p_tail - 1.0)) + 1.0)
                / 2.0
                + 1.0
            )
            v = holder.h - holder.h / (holder.p_tail - 1.0)
            return C, v
    if F.family is Family.UNIFORM:
        lo, hi = F.params
        return 1.0 / (hi - lo), 1.0
    if F.family in (Family.EXPONENTIAL, Family.SHIFTED_EXPONENTIAL):
        rate = F.params[0] if F.family is Family.EXPONENTIAL else F.params[1]
        return rate, 1.0  # 1 - exp(-r*eps) <= r*eps
    # numeric fit, then inflate C so the envelope dominates on the grid
    eps_grid = np.geomspace(eps_max * 1e-3, eps_max, n_grid)
    vals = np.array([eta(e, F) for e in eps_grid])
    mask = vals > 0
    slope, icept = np.polyfit(np.log(eps_grid[mask]), np.log(vals[mask]), 1)
    v = max(min(slope, 1.0), 1e-6)
    C = float(np.max(vals[mask] / eps_grid[mask] ** v))
    return C, v


# ---------------------------------------------------------------------------
# Age-coalescence bound parameters and tail
# ---------------------------------------------------------------------------


def _validate_case(case: str, profile: HazardProfile):
    if case not in ("i", "ii", "iii"):
        raise ValueError(f"unknown case {case!r}")
    a, d, sup = profile.a, profile.d, profile.sup_zeta
    if case == "i":
        if not math.isfinite(d):
            raise CaseMismatchError("case i needs a finite hazard-blowup age d")
        if d <= 1.5 * a:
            raise CaseMismatchError(
                "case i needs d > 3a/2; configurations with d <= 3a/2 are rejected"
            )
    elif case == "ii":
        if math.isfinite(d) or math.isinf(sup):
            raise CaseMismatchError("case ii needs d = inf and a bounded hazard")
    else:
        if math.isfinite(d) or math.isfinite(sup):
            raise CaseMismatchError("case iii needs d = inf and an unbounded hazard")


def age_bound_params(
    case: str, profile: HazardProfile, eps: float, b: float, c: float
) -> tuple[float, float]:
    """Coalescence probabilities (p1, p2) for the requested hazard regime."""
    _validate_case(case, profile)
    a, d = profile.a, profile.d
    if eps <= a / 2.0:
        raise AssumptionError("closeness threshold must exceed a/2")
    if not (a < b < d):
        raise AssumptionError("jump-domain start b must lie in (a, d)")
    zeta_b = profile.zeta(b)
    if zeta_b <= 0.0:
        raise AssumptionError("hazard must be positive at the jump-domain start")
    if case == "ii":
        sup = profile.sup_zeta
        return math.exp(-b * sup), zeta_b / sup
    if not (b + eps < c < d):
        raise AssumptionError("jump-domain end c must satisfy b + eps < c < d")
    p1 = 1.0 - math.exp(-(eps - a / 2.0) * profile.zeta(eps + a / 2.0))
    base = math.exp(-b * profile.zeta(b + eps)) * (
        1.0 - math.exp(-(c - b - eps) * zeta_b)
    )
    if case == "i":
        return p1, base
    return p1, (zeta_b / profile.zeta(c)) * base


def default_age_params(profile: HazardProfile) -> tuple[float, float, float]:
    """Heuristic (eps, b, c) satisfying the case hypotheses for a profile."""
    a, d = profile.a, profile.d
    if math.isfinite(d):
        m = (d - 1.5 * a) / 4.0
        if m <= 0:
            raise CaseMismatchError(
                "case i needs d > 3a/2; configurations with d <= 3a/2 are rejected"
            )
        return a / 2.0 + m, a + m, 1.5 * a + 3.0 * m
    scale = profile.spec.mean() if profile.spec is not None else max(1.0, a)
    m = 0.5 * scale
    eps = a / 2.0 + 0.5 * m
    b = a + m
    return eps, b, b + eps + m


def sample_age_bound(
    case: str,
    p1: float,
    p2: float,
    eps: float,
    b: float,
    c: float,
    profile: HazardProfile,
    n: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw n copies of the stochastic upper bound on the age-coalescence time.

    The bound is a geometric mixture of geometric/exponential blocks;
    the exponential rate is zeta(b) in the bounded-hazard regime and
    zeta(c) otherwise.
    """
    _validate_case(case, profile)
    H = rng.geometric(p2, size=n)
    bounds_g = np.concatenate([[0], np.cumsum(H)])
    G = rng.geometric(p1, size=int(H.sum()))
    inner = np.add.reduceat(G, bounds_g[:-1])  # total inner count per replica
    if case == "i":
        return c + (2.0 * H - 1.0) * eps + (profile.d - eps) * inner
    n_inner = int(G.sum())
    rate = profile.zeta(b) if case == "ii" else profile.zeta(c)
    E = rng.exponential(1.0 / rate, size=n_inner)
    bounds_e = np.concatenate([[0], np.cumsum(G)])
    e_per_block = np.add.reduceat(E, bounds_e[:-1])  # one sum per (i) block
    e_per_rep = np.add.reduceat(e_per_block, bounds_g[:-1])
    if case == "ii":
        return b * inner + e_per_rep
    return c - eps + 2.0 * eps * H + (c - eps) * inner + e_per_rep


_TAIL_CACHE: dict = {}


def age_bound_tail(
    case: str,
    p1: float,
    p2: float,
    eps: float,
    b: float,
    c: float,
    profile: HazardProfile,
    grid: np.ndarray,
    n_mc: int = 10**6,
    seed: int = 20140611,
) -> np.ndarray:
    """Monte Carlo survival function of the bound variable on a grid."""
    key = (case, round(p1, 12), round(p2, 12), eps, b, c, n_mc, seed)
    sample = _TAIL_CACHE.get(key)
    if sample is None:
        rng = np.random.default_rng(seed)
        sample = np.sort(sample_age_bound(case, p1, p2, eps, b, c, profile, n_mc, rng))
        _TAIL_CACHE[key] = sample
    grid = np.asarray(grid, dtype=float)
    return 1.0 - np.searchsorted(sample, grid, side="right") / len(sample)


def fit_dominating_exponential(
    grid: np.ndarray, tail: np.ndarray, v_cap: Optional[float] = None
) -> tuple[float, float]:
    """Fit (C, v) with C*exp(-v*t) >= tail(t) at every grid point.

    The rate comes from a log-linear fit of the strictly positive tail
    values, clamped by ``v_cap`` when an analytic cap applies; the
    constant is then inflated to guarantee grid dominance.
    """
    grid = np.asarray(grid, dtype=float)
    tail = np.asarray(tail, dtype=float)
    mask = tail > 0
    if mask.sum() >= 2 and np.ptp(grid[mask]) > 0:
        slope, _ = np.polyfit(grid[mask], np.log(tail[mask]), 1)
        v = max(-slope, 1e-12)
    else:
        v = 1e-12 if v_cap is None else v_cap
    if v_cap is not None:
        v = min(v, v_cap)
    with np.errstate(over="ignore"):
        C = float(np.max(np.where(tail > 0, tail * np.exp(v * grid), 0.0)))
    return max(C, 1.0), v


def tau_A_tail_bound(
    case: str,
    p1: float,
    p2: float,
    eps: float,
    b: float,
    c: float,
    profile: HazardProfile,
    t: float,
    n_mc: int = 10**6,
) -> float:
    """P(bound variable > t), exact exponential when the hazard floor is
    positive, Monte Carlo otherwise."""
    if profile.inf_zeta > 0.0:
        return math.exp(-profile.inf_zeta * t)
    return float(
        age_bound_tail(case, p1, p2, eps, b, c, profile, np.array([t]), n_mc=n_mc)[0]
    )


def age_rate_cap(case: str, p1: float, p2: float, eps: float, profile: HazardProfile) -> Optional[float]:
    """Analytic cap on the exponential rate of the coalescence-time tail."""
    if case == "i":
        return 0.5 * min(
            -math.log(1.0 - p2) / (2.0 * eps),
            -math.log(1.0 - p1 * p2) / (profile.d - eps),
        )
    return None


# ---------------------------------------------------------------------------
# Assembled bound curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundCurve:
    """A theoretical bound t -> value, tagged with its provenance."""

    evaluate: Callable[[float], float]
    provenance: str
    kind: str  # "tv" or "w1"

    def __call__(self, t):
        if np.ndim(t) == 0:
            return self.evaluate(float(t))
        return np.array([self.evaluate(float(s)) for s in np.asarray(t).ravel()])


@dataclass(frozen=True)
class ModelSpec:
    """The model's three laws plus the (point) initial conditions."""

    F: DistributionSpec
    G: DistributionSpec
    H: DistributionSpec
    x0_mean: float = 0.0
    x0_tilde_mean: float = 0.0
    x0_max_mean: float = 0.0  # E[X_0 v X~_0]; for point inits, max(x0, x0~)


@dataclass
class RateReport:
    """Every analytic quantity feeding the bound curves."""

    p: float
    w: float
    v_G: float
    rho: float
    q: float  # E[exp(-Theta*DeltaT)]
    case: Optional[str]
    p1: Optional[float]
    p2: Optional[float]
    eps_age: Optional[float]
    b: Optional[float]
    c: Optional[float]
    C_renewal: float
    eta_C: float
    eta_v: float
    C1: float
    v1: float
    C2_prime: float
    v2_prime: float
    C2: float
    v2: float
    C3: float
    v3: float
    C4: float
    v4: float
    v_prime: float
    alpha: float
    beta: float
    C1_w1: float
    C2_w1: float
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "extras"}
        d.update(self.extras)
        return d


def _balanced_alpha_beta(v1: float, v2: float, v3: float) -> tuple[float, float]:
    """alpha, beta equalizing alpha*v1 = (beta-alpha)*v2 = (1-beta)*v3."""
    # beta = alpha * (1 + v1/v2); (1 - beta) * v3 = alpha * v1
    r = 1.0 + v1 / v2
    alpha = v3 / (v1 + v3 * r)
    return alpha, alpha * r


@dataclass
class MainBounds:
    tv: BoundCurve
    w1: BoundCurve
    report: RateReport

    def epsilon_tv_default(self, t: float) -> float:
        r = self.report
        return math.exp(-r.v_prime * (r.beta - r.alpha) * t)


def convergence_bounds(
    model: ModelSpec,
    alpha: Optional[float] = None,
    beta: Optional[float] = None,
    age_params: Optional[tuple[float, float, float]] = None,
    holder: Optional[HolderData] = None,
    p: float = 1.0,
    v3: Optional[float] = None,
    w_eps_frac: float = 0.05,
    w_cap: float = 64.0,
    renewal_step: float = 1e-3,
    n_mc: int = 10**6,
) -> MainBounds:
    """Assemble the three-phase TV bound and the Wasserstein bound.

    The TV curve is 1 - prod_i (1 - C_i exp(-v_i * phase_i * t)) and the
    Wasserstein curve C1 exp(-v1 alpha t) + C2 exp(-v2 (1-alpha) t),
    with every constant computed from the model laws.
    """
    F, G, H = model.F, model.G, model.H
    profile = hazard_profile(G)
    kernel = RenewalKernel(G, H, p)
    q = kernel.mass()
    rho = 1.0 - q
    if not 0.0 < rho < 1.0:
        raise AssumptionError("mean per-renewal contraction must lie in (0, 1)")

    # phase 1: age coalescence tail
    if profile.inf_zeta > 0.0:
        case = None
        p1 = p2 = eps_a = b = c = None
        v1 = profile.inf_zeta
        C1p = 1.0
    else:
        if math.isfinite(profile.d):
            case = "i"
        elif math.isfinite(profile.sup_zeta):
            case = "ii"
        else:
            case = "iii"
        eps_a, b, c = age_params if age_params is not None else default_age_params(profile)
        p1, p2 = age_bound_params(case, profile, eps_a, b, c)
        mean_scale = G.mean()
        tail_grid = np.linspace(0.0, 400.0 * mean_scale / max(p1 * p2, 1e-3), 400)
        tail = age_bound_tail(case, p1, p2, eps_a, b, c, profile, tail_grid, n_mc=n_mc)
        C1p, v1 = fit_dominating_exponential(
            tail_grid, tail, v_cap=age_rate_cap(case, p1, p2, eps_a, profile)
        )

    # phase 2: Wasserstein contraction rate
    const_rate = profile.constant_rate
    if const_rate is not None:
        # closed Poisson bound: exp(-lam*(1 - E[e^{-p Theta DT}])*t), no constant
        w = exponential_case_decay(const_rate, H, p)
        v2p = w / p
        C2p = 1.0
    else:
        w = find_w(kernel, cap=w_cap)
        w_eff = w if math.isfinite(w) else w_cap
        shift = w_eff * (1.0 - w_eps_frac)
        sol = solve_renewal(
            kernel, w_shift=shift, grid_step=renewal_step, horizon=10.0 / max(shift, 1e-3)
        )
        v2p = shift / p
        C2p = sol.C

    v_G = G.laplace_domain_sup()
    if v3 is None:
        v3 = 0.5 * v_G if math.isfinite(v_G) else max(1.0, 2.0 * v2p)
    C3 = G.laplace(v3)
    if not math.isfinite(C3):
        raise AssumptionError("the inter-arrival law must have the requested exponential moment")

    eta_C, eta_vp = eta_envelope(1.0, F, holder=holder)
    v_prime = v2p / (1.0 + eta_vp)
    v2 = v2p - v_prime
    v4 = eta_vp * v_prime
    C4 = eta_C

    EU = F.mean()
    c2_base = (model.x0_mean + model.x0_tilde_mean) * (1.0 + 1.0 / q) + 2.0 * EU / rho
    C2 = c2_base * C2p

    if alpha is None or beta is None:
        alpha, beta = _balanced_alpha_beta(v1, v2, v3)
    if not 0.0 < alpha < beta < 1.0:
        raise AssumptionError("phase fractions must satisfy 0 < alpha < beta < 1")

    C1_tv = C1p
    C1_w1 = (c2_base + 2.0 * H.mean() + 2.0 * G.mean()) * C1p
    C2_w1 = c2_base * C2p

    a_, b_ = alpha, beta

    def tv_eval(t: float, C1=C1_tv, C2=C2, C3=C3, C4=C4, v1=v1, v2=v2, v3v=v3, v4=v4):
        if t <= 0.0:
            return 1.0
        f1 = max(0.0, 1.0 - C1 * math.exp(-v1 * a_ * t))
        f2 = max(0.0, 1.0 - C2 * math.exp(-v2 * (b_ - a_) * t))
        f3 = max(0.0, 1.0 - C3 * math.exp(-v3v * (1.0 - b_) * t))
        f4 = max(0.0, 1.0 - C4 * math.exp(-v4 * (b_ - a_) * t))
        return min(1.0, 1.0 - f1 * f2 * f3 * f4)

    def w1_eval(t: float, C1=C1_w1, C2=C2_w1, v1=v1, v2p=v2p):
        return C1 * math.exp(-v1 * a_ * t) + C2 * math.exp(-v2p * (1.0 - a_) * t)

    report = RateReport(
        p=p, w=w, v_G=v_G, rho=rho, q=q,
        case=case, p1=p1, p2=p2, eps_age=eps_a if case else None,
        b=b if case else None, c=c if case else None,
        C_renewal=C2p, eta_C=eta_C, eta_v=eta_vp,
        C1=C1_tv, v1=v1, C2_prime=C2p, v2_prime=v2p, C2=C2, v2=v2,
        C3=C3, v3=v3, C4=C4, v4=v4, v_prime=v_prime,
        alpha=alpha, beta=beta, C1_w1=C1_w1, C2_w1=C2_w1,
    )
    tv = BoundCurve(tv_eval, "three-phase coalescence product bound (total variation)", "tv")
    w1 = BoundCurve(w1_eval, "age-tail plus contraction bound (Wasserstein-1)", "w1")
    return MainBounds(tv=tv, w1=w1, report=report)


def exp_case_bounds(
    lam: float,
    H: DistributionSpec,
    holder: HolderData,
    x0_sum_mean: float,
    x0_max_mean: float,
    EU: float,
) -> tuple[BoundCurve, BoundCurve, dict]:
    """The two total-variation bounds specific to memoryless inter-intakes.

    Method 1 refines the deterministic three-phase split with the
    memoryless age coalescence; method 2 splits at the random intake
    times and achieves the strictly better exponent lam*rho*h/(1+h).
    Requires a Holder intake density with compact support.
    """
    if holder.M is None:
        raise AssumptionError("the intake density must have compact support here")
    rho = 1.0 - mean_discount_factor(DistributionSpec.exponential(lam), H, 1.0)
    h = holder.h
    K, M = holder.K, holder.M
    km = K * (M + 1.0) / 2.0
    r1 = lam * rho * h / (1.0 + h + 2.0 * rho * h)
    r2 = lam * rho * h / (1.0 + h)
    C_m1 = x0_sum_mean * (1.0 + 1.0 / (1.0 - rho)) + 2.0 * EU / rho

    def m1_eval(t: float) -> float:
        if t <= 0.0:
            return 1.0
        e = math.exp(-r1 * t)
        val = 1.0 - max(0.0, 1.0 - e) ** 2 * max(0.0, 1.0 - C_m1 * e) * max(0.0, 1.0 - km * e)
        return min(1.0, val)

    def m2_eval(t: float) -> float:
        if t <= 0.0:
            return 1.0
        eps = math.exp(-lam * rho * t / (1.0 + h))
        miss = math.exp(-lam * t) * (
            1.0
            + lam * t
            + x0_max_mean
            / (eps * (1.0 - rho) ** 2)
            * (math.exp(lam * (1.0 - rho) * t) - 1.0 - lam * (1.0 - rho) * t)
        )
        val = 1.0 - max(0.0, 1.0 - miss) * max(0.0, 1.0 - km * eps**h)
        return min(1.0, val)

    meta = {
        "rho": rho,
        "rate_method1": r1,
        "rate_method2": r2,
        "C_method1": C_m1,
        "eta_envelope_constant": km,
    }
    m1 = BoundCurve(m1_eval, "memoryless-intake product bound, deterministic split", "tv")
    m2 = BoundCurve(m2_eval, "memoryless-intake bound, random split at intake times", "tv")
    return m1, m2, meta
