"""Coupled simulation of two contaminant processes.

The age pair follows the competing-risk scheme of the coupled-age
generator: the next event is generated with the elder's hazard, and at
the event a Bernoulli draw with probability zeta(younger)/zeta(elder)
decides whether the jump is common (both ages reset) or lone (only the
elder resets).  Because the hazard is non-decreasing, the younger
process never jumps alone; once a common jump occurs, every later jump
is simultaneous and the pair shares intakes and metabolic rates, which
makes the quantity gap decay deterministically.

The "TV" jump coupling additionally lands both quantities on the same
point with the maximal probability 1 - eta(gap), which is what turns
closeness into exact coalescence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .distributions import DistributionSpec, HazardProfile, hazard_profile
from .errors import AssumptionError, NoDensityError
from .pdmp import ProcessState
from . import rates

__all__ = [
    "CoupledState",
    "CouplingReport",
    "CouplingPhaseParams",
    "AgeTrajectory",
    "CoupledTrajectory",
    "simulate_coupled_ages",
    "simulate_coupled_full",
    "tv_jump_coupling",
    "run_three_phase",
    "age_coalescence_algorithm",
]

_MAX_REJECTIONS = 10**7


@dataclass
class CoupledState:
    y: ProcessState
    y_tilde: ProcessState
    ages_merged: bool = False
    fully_merged: bool = False


@dataclass
class CouplingReport:
    """Outcome of one coupled run; infinite times mean "not within horizon"."""

    tau_A: float = math.inf
    tau: float = math.inf
    n_events: int = 0
    phase_outcomes: dict = field(default_factory=dict)
    bound_sample: Optional[float] = None


@dataclass(frozen=True)
class CouplingPhaseParams:
    """Tuning of the three-phase coupling.

    ``alpha`` and ``beta`` are the phase-boundary fractions of the
    horizon, ``epsilon_tv`` the closeness threshold entering phase 3.
    ``epsilon_age``, ``b``, ``c`` tune the age-coalescence algorithm for
    hazards that can vanish.
    """

    alpha: float
    beta: float
    epsilon_tv: float
    epsilon_age: Optional[float] = None
    b: Optional[float] = None
    c: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.alpha < self.beta < 1.0:
            raise AssumptionError("phase fractions must satisfy 0 < alpha < beta < 1")
        if not 0.0 < self.epsilon_tv < 1.0:
            raise AssumptionError("closeness threshold must lie in (0, 1)")

    def validate_age_params(self, profile: HazardProfile):
        if self.epsilon_age is None or self.b is None or self.c is None:
            raise AssumptionError("age-coalescence tuning (epsilon_age, b, c) is unset")
        if self.epsilon_age <= profile.a / 2.0:
            raise AssumptionError("closeness threshold must exceed a/2")
        if self.c <= self.b + self.epsilon_age:
            raise AssumptionError("jump-domain end must satisfy c > b + epsilon")


# ---------------------------------------------------------------------------
# Coupled ages
# ---------------------------------------------------------------------------


@dataclass
class AgeTrajectory:
    events: list  # (time, common_flag)
    final: tuple  # ages at the horizon


def simulate_coupled_ages(
    a0: float,
    a0_tilde: float,
    profile: HazardProfile,
    horizon: float,
    rng: np.random.Generator,
    stop_at_merge: bool = False,
) -> tuple[CouplingReport, AgeTrajectory]:
    """Run the coupled age pair until the horizon.

    Both marginals are renewal age processes for the profile's law; the
    first common jump is the coalescence time of the pair.  With
    ``stop_at_merge`` the run ends at that jump, which is all the
    coalescence-time studies need.
    """
    a, at = float(a0), float(a0_tilde)
    t = 0.0
    events: list = []
    tau_A = math.inf
    merged = a == at
    if merged:
        tau_A = 0.0
    inverse = profile.inverse
    zeta = profile.zeta
    while True:
        if merged:
            if stop_at_merge:
                break
            s = inverse(a, rng.exponential())
            if t + s > horizon:
                a += horizon - t
                at = a
                break
            t += s
            a = at = 0.0
            events.append((t, True))
            continue
        elder, younger = (a, at) if a > at else (at, a)
        s = inverse(elder, rng.exponential())
        if t + s > horizon:
            a += horizon - t
            at += horizon - t
            break
        t += s
        elder_new = elder + s
        younger_new = younger + s
        if rng.random() * zeta(elder_new) < zeta(younger_new):
            merged = True
            tau_A = t
            a = at = 0.0
            events.append((t, True))
        else:
            if a > at:
                a, at = 0.0, younger_new
            else:
                a, at = younger_new, 0.0
            events.append((t, False))
    report = CouplingReport(tau_A=tau_A, tau=tau_A, n_events=len(events))
    return report, AgeTrajectory(events=events, final=(a, at))


# ---------------------------------------------------------------------------
# Maximal jump coupling
# ---------------------------------------------------------------------------


def tv_jump_coupling(
    x_minus: float,
    x_tilde_minus: float,
    F: DistributionSpec,
    rng: np.random.Generator,
) -> tuple[float, float, bool]:
    """Couple the two post-jump quantities with maximal merge probability.

    Marginally each quantity gains an intake drawn from F; the landing
    points coincide with probability 1 - eta(|gap|).  Sampling is by
    composition: the overlap component and the two residual components
    are drawn by rejection against F itself.
    """
    if not F.has_density:
        raise NoDensityError("the jump coupling needs an intake law with a density")
    delta = x_tilde_minus - x_minus
    if delta == 0.0:
        u = F.sample(rng)
        return x_minus + u, x_minus + u, True
    p_merge = 1.0 - rates.eta(abs(delta), F)
    f = F.density
    if rng.random() < p_merge:
        for _ in range(_MAX_REJECTIONS):
            v = F.sample(rng)
            fv = f(v)
            if fv > 0.0 and rng.random() * fv <= min(fv, f(v - delta)):
                return x_minus + v, x_minus + v, True
        raise RuntimeError("overlap rejection sampler failed to accept")
    u = _residual_draw(F, delta, rng)
    u_tilde = _residual_draw(F, -delta, rng)
    return x_minus + u, x_tilde_minus + u_tilde, False


def _residual_draw(F: DistributionSpec, shift: float, rng: np.random.Generator) -> float:
    """Draw from the residual density prop. to f(u) - min(f(u), f(u - shift))."""
    f = F.density
    for _ in range(_MAX_REJECTIONS):
        v = F.sample(rng)
        fv = f(v)
        if fv > 0.0 and rng.random() * fv <= fv - min(fv, f(v - shift)):
            return v
    raise RuntimeError("residual rejection sampler failed to accept")


# ---------------------------------------------------------------------------
# Full coupled process
# ---------------------------------------------------------------------------


@dataclass
class CoupledTrajectory:
    snapshot_times: list
    snapshots: list  # CoupledState at each requested time
    final: CoupledState


def simulate_coupled_full(
    init: ProcessState,
    init_tilde: ProcessState,
    F: DistributionSpec,
    G: DistributionSpec | HazardProfile,
    H: DistributionSpec,
    horizon: float,
    rng: np.random.Generator,
    tv_from: float = math.inf,
    record_times: tuple = (),
) -> tuple[CouplingReport, CoupledTrajectory]:
    """Simulate the coupled pair (Y, Y~) up to the horizon.

    Each component alone is a contaminant process for (F, G, H).  Common
    jumps share the intake and the new metabolic rate; from ``tv_from``
    on, common jumps instead use :func:`tv_jump_coupling`, which is what
    can produce full coalescence.
    """
    init.validate()
    init_tilde.validate()
    profile = G if isinstance(G, HazardProfile) else hazard_profile(G)
    x, th, ag = init.x, init.theta, init.age
    xt, tht, agt = init_tilde.x, init_tilde.theta, init_tilde.age
    t = 0.0
    tau_A = math.inf
    tau = math.inf
    n_events = 0
    ages_merged = ag == agt
    if ages_merged:
        tau_A = 0.0
    fully_merged = ages_merged and x == xt and th == tht
    if fully_merged:
        tau = 0.0
    attempt_time = math.inf
    attempt_success = False

    rec = sorted(record_times)
    rec_idx = 0
    snap_times: list = []
    snaps: list = []

    def record_up_to(limit: float):
        nonlocal rec_idx
        while rec_idx < len(rec) and rec[rec_idx] < limit:
            r = rec[rec_idx]
            dt = r - t
            snap_times.append(r)
            snaps.append(
                CoupledState(
                    ProcessState(x * math.exp(-th * dt), th, ag + dt, r),
                    ProcessState(xt * math.exp(-tht * dt), tht, agt + dt, r),
                    ages_merged,
                    fully_merged,
                )
            )
            rec_idx += 1

    inverse = profile.inverse
    zeta = profile.zeta
    while True:
        if ages_merged:
            s = inverse(ag, rng.exponential())
            tev = t + s
            if tev > horizon:
                break
            record_up_to(tev)
            x *= math.exp(-th * s)
            xt *= math.exp(-tht * s)
            t = tev
            ag = agt = 0.0
            n_events += 1
            thn = H.sample(rng)
            if fully_merged:
                u = F.sample(rng)
                x += u
                xt = x
            elif tev >= tv_from:
                x, xt, ok = tv_jump_coupling(x, xt, F, rng)
                if attempt_time == math.inf:
                    attempt_time = tev
                    attempt_success = ok
                if ok:
                    fully_merged = True
                    tau = tev
            else:
                u = F.sample(rng)
                x += u
                xt += u
                if x == xt:
                    fully_merged = True
                    tau = tev
            th = tht = thn
        else:
            elder, younger = (ag, agt) if ag > agt else (agt, ag)
            s = inverse(elder, rng.exponential())
            tev = t + s
            if tev > horizon:
                break
            record_up_to(tev)
            x *= math.exp(-th * s)
            xt *= math.exp(-tht * s)
            t = tev
            n_events += 1
            elder_new = elder + s
            younger_new = younger + s
            if rng.random() * zeta(elder_new) < zeta(younger_new):
                ages_merged = True
                tau_A = tev
                ag = agt = 0.0
                thn = H.sample(rng)
                if tev >= tv_from:
                    x, xt, ok = tv_jump_coupling(x, xt, F, rng)
                    if attempt_time == math.inf:
                        attempt_time = tev
                        attempt_success = ok
                    if ok:
                        fully_merged = True
                        tau = tev
                else:
                    u = F.sample(rng)
                    x += u
                    xt += u
                    if x == xt:
                        fully_merged = True
                        tau = tev
                th = tht = thn
            else:
                u = F.sample(rng)
                thn = H.sample(rng)
                if ag > agt:
                    ag, agt = 0.0, younger_new
                    x += u
                    th = thn
                else:
                    ag, agt = younger_new, 0.0
                    xt += u
                    tht = thn

    record_up_to(horizon * (1.0 + 1e-15) if horizon in rec else horizon)
    dt = horizon - t
    final = CoupledState(
        ProcessState(x * math.exp(-th * dt), th, ag + dt, horizon),
        ProcessState(xt * math.exp(-tht * dt), tht, agt + dt, horizon),
        ages_merged,
        fully_merged,
    )
    report = CouplingReport(
        tau_A=tau_A,
        tau=tau,
        n_events=n_events,
        phase_outcomes={
            "tv_attempt_time": attempt_time,
            "tv_first_attempt_merged": attempt_success,
        },
    )
    return report, CoupledTrajectory(snap_times, snaps, final)


def run_three_phase(
    init: ProcessState,
    init_tilde: ProcessState,
    params: CouplingPhaseParams,
    F: DistributionSpec,
    G: DistributionSpec | HazardProfile,
    H: DistributionSpec,
    horizon: float,
    rng: np.random.Generator,
) -> CouplingReport:
    """Run the three-phase coupling for one horizon and report the tree.

    Phase boundaries are alpha*horizon and beta*horizon; from the second
    boundary on, common jumps use the maximal jump coupling.  The report
    carries the four tree outcomes and bounds the total variation at the
    horizon through the indicator of non-coalescence.
    """
    beta_t = params.beta * horizon
    report, traj = simulate_coupled_full(
        init,
        init_tilde,
        F,
        G,
        H,
        horizon,
        rng,
        tv_from=beta_t,
        record_times=(beta_t,),
    )
    gap_at_beta = math.inf
    for r, st in zip(traj.snapshot_times, traj.snapshots):
        if r == beta_t:
            gap_at_beta = abs(st.y.x - st.y_tilde.x)
    attempt_time = report.phase_outcomes.get("tv_attempt_time", math.inf)
    fy, fyt = traj.final.y, traj.final.y_tilde
    l1_final = (
        abs(fy.x - fyt.x) + abs(fy.theta - fyt.theta) + abs(fy.age - fyt.age)
    )
    report.phase_outcomes = {
        "age_merge_by_alpha": report.tau_A <= params.alpha * horizon,
        "close_at_beta": gap_at_beta < params.epsilon_tv,
        "jump_by_horizon": attempt_time <= horizon,
        "merged_at_first_attempt": report.phase_outcomes.get(
            "tv_first_attempt_merged", False
        ),
        "gap_at_beta": gap_at_beta,
        "tv_attempt_time": attempt_time,
        "l1_final": l1_final,
    }
    return report


def age_coalescence_algorithm(
    case: str,
    params: CouplingPhaseParams,
    profile: HazardProfile,
    rng: np.random.Generator,
    horizon: float = math.inf,
    a0: float = 0.0,
    a0_tilde: float = 1.0,
) -> CouplingReport:
    """Exact coupled-age run plus one draw of the theoretical bound variable.

    The bound variable is sampled with fresh randomness: the comparison
    is between laws, not pathwise.
    """
    params.validate_age_params(profile)
    p1, p2 = rates.age_bound_params(case, profile, params.epsilon_age, params.b, params.c)
    if math.isinf(horizon):
        # coalescence is a.s. finite; cap generously for the exact run
        horizon = 1e6
    report, _ = simulate_coupled_ages(
        a0, a0_tilde, profile, horizon, rng, stop_at_merge=True
    )
    report.bound_sample = float(
        rates.sample_age_bound(
            case, p1, p2, params.epsilon_age, params.b, params.c, profile, 1, rng
        )[0]
    )
    return report
