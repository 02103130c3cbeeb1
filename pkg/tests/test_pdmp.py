"""Tests of the exact single-trajectory simulator."""

import math

import numpy as np
import pytest

from contamsim.distributions import DistributionSpec, hazard_profile
from contamsim.errors import ContamsimError
from contamsim.pdmp import EventLog, ProcessState, simulate_path, state_at


def _laws(lam=1.0):
    return (
        DistributionSpec.uniform(0.0, 1.0),
        DistributionSpec.exponential(lam),
        DistributionSpec.dirac(1.0),
    )


def test_state_validation():
    with pytest.raises(ContamsimError):
        ProcessState(-1.0, 1.0, 0.0).validate()
    with pytest.raises(ContamsimError):
        ProcessState(1.0, 0.0, 0.0).validate()
    with pytest.raises(ContamsimError):
        simulate_path(ProcessState(1.0, 1.0, 0.0), *_laws(), horizon=0.0,
                      rng=np.random.default_rng(0))


def test_zero_intake_pure_decay():
    # with zero intakes the quantity is exactly x0 * exp(-integral of theta)
    F = DistributionSpec.dirac(0.0)
    G = DistributionSpec.exponential(1.0)
    H = DistributionSpec.dirac(2.0)
    rng = np.random.default_rng(1)
    init = ProcessState(3.0, 2.0, 0.0)
    log, final = simulate_path(init, F, G, H, 5.0, rng)
    assert final.x == pytest.approx(3.0 * math.exp(-2.0 * 5.0), rel=1e-12)
    assert final.t == 5.0
    # quantity along the path is non-increasing when intakes vanish
    prev = init.x
    for t in np.linspace(0.0, 5.0, 50):
        cur = state_at(log, init, t).x
        assert cur <= prev + 1e-15
        prev = cur


def test_event_count_is_poisson():
    # memoryless inter-intakes make the counts Poisson(lam * horizon)
    F, G, H = _laws(lam=2.0)
    rng = np.random.default_rng(2)
    horizon = 3.0
    counts = []
    for _ in range(20_000):
        log, _ = simulate_path(ProcessState(1.0, 1.0, 0.0), F, G, H, horizon, rng)
        counts.append(log.n_events())
    counts = np.array(counts)
    mu = 2.0 * horizon
    assert counts.mean() == pytest.approx(mu, abs=4.5 * math.sqrt(mu / len(counts)))
    # chi-square goodness of fit on the bulk cells
    from scipy import stats

    kmax = int(stats.poisson.ppf(0.999, mu))
    obs = np.array([(counts == k).sum() for k in range(kmax)] + [(counts >= kmax).sum()])
    pk = stats.poisson.pmf(np.arange(kmax), mu)
    probs = np.append(pk, 1.0 - pk.sum())
    chi2 = ((obs - len(counts) * probs) ** 2 / (len(counts) * probs)).sum()
    assert chi2 < stats.chi2.ppf(0.999, kmax)


def test_residual_first_wait_uses_initial_age():
    # delayed intakes: starting past the delay removes the dead time
    F = DistributionSpec.dirac(1.0)
    G = DistributionSpec.shifted_exponential(5.0, 1000.0)
    H = DistributionSpec.dirac(1.0)
    rng = np.random.default_rng(3)
    # from age 0 the first event comes essentially at the shift
    log, _ = simulate_path(ProcessState(0.0, 1.0, 0.0), F, G, H, 6.0, rng)
    assert log.jump_times[0] == pytest.approx(5.0, abs=0.05)
    # from age 5 it comes almost immediately
    log, _ = simulate_path(ProcessState(0.0, 1.0, 5.0), F, G, H, 6.0, rng)
    assert log.jump_times[0] < 0.05


def test_stationary_mean_time_average():
    # long-run time average of X equals E[U] * lam / E[Theta] here:
    # E[X_inf] = E[U] * lam / theta for unit theta and Poisson(lam) intakes
    F, G, H = _laws(lam=1.0)
    rng = np.random.default_rng(4)
    horizon = 40_000.0
    log, _ = simulate_path(ProcessState(0.0, 1.0, 0.0), F, G, H, horizon, rng)
    # exact integral of the path: sum over inter-event segments
    init = ProcessState(0.0, 1.0, 0.0)
    total = 0.0
    x = init.x
    theta = init.theta
    prev = 0.0
    for i, t in enumerate(log.jump_times):
        dt = t - prev
        total += x / theta * (1.0 - math.exp(-theta * dt))
        x = x * math.exp(-theta * dt) + log.intakes[i]
        theta = log.thetas[i]
        prev = t
    dt = horizon - prev
    total += x / theta * (1.0 - math.exp(-theta * dt))
    assert total / horizon == pytest.approx(0.5, abs=0.02)


def test_state_at_recovers_jumps():
    F, G, H = _laws()
    rng = np.random.default_rng(5)
    init = ProcessState(2.0, 1.0, 0.0)
    log, final = simulate_path(init, F, G, H, 10.0, rng)
    assert log.n_events() > 2
    # the state just after each jump includes the intake; just before not
    for i, t in enumerate(log.jump_times):
        after = state_at(log, init, t)
        before = state_at(log, init, t - 1e-9)
        gained = after.x - before.x * math.exp(-before.theta * 1e-9)
        assert gained == pytest.approx(log.intakes[i], abs=1e-7)
        assert after.age == 0.0
        assert after.theta == log.thetas[i]
    # endpoint agrees with the returned final state
    end = state_at(log, init, 10.0)
    assert end.x == pytest.approx(final.x, rel=1e-12)
    assert end.age == pytest.approx(final.age, rel=1e-12)
    with pytest.raises(ContamsimError):
        state_at(log, init, 11.0)


def test_age_law_at_large_time():
    # for memoryless intakes the age at a fixed large time is
    # min(Exp(lam), t), here essentially Exp(lam)
    F, G, H = _laws(lam=1.0)
    rng = np.random.default_rng(6)
    ages = []
    for _ in range(20_000):
        _, final = simulate_path(ProcessState(0.0, 1.0, 0.0), F, G, H, 15.0, rng)
        ages.append(final.age)
    ages = np.sort(ages)
    ref = DistributionSpec.exponential(1.0)
    cdf = np.array([ref.cdf(a) for a in ages])
    emp = np.arange(1, len(ages) + 1) / len(ages)
    assert np.max(np.abs(emp - cdf)) <= 1.63 / math.sqrt(len(ages)) + math.exp(-15.0)


def test_event_log_counting():
    log = EventLog(jump_times=[1.0, 2.0, 3.5], intakes=[0.1] * 3, thetas=[1.0] * 3,
                   horizon=5.0)
    assert log.count_up_to(0.5) == 0
    assert log.count_up_to(2.0) == 2
    assert log.count_up_to(5.0) == 3


def test_reproducibility():
    F, G, H = _laws()
    a = simulate_path(ProcessState(1.0, 1.0, 0.0), F, G, H, 20.0,
                      np.random.default_rng([9, 0, 3]))
    b = simulate_path(ProcessState(1.0, 1.0, 0.0), F, G, H, 20.0,
                      np.random.default_rng([9, 0, 3]))
    assert a[0].jump_times == b[0].jump_times
    assert a[1].x == b[1].x


def test_general_hazard_inter_arrival_law():
    # non-memoryless timing: the gap between the first two events is a
    # plain draw from G (taking every gap in a fixed window would be a
    # length-biased sample); KS-test it against the closed-form CDF
    F = DistributionSpec.dirac(0.0)
    G = DistributionSpec.gamma(2.0, 1.0)
    H = DistributionSpec.dirac(1.0)
    rng = np.random.default_rng(8)
    gaps = []
    for _ in range(20_000):
        log, _ = simulate_path(ProcessState(0.0, 1.0, 0.0), F, G, H, 30.0, rng)
        ts = log.jump_times
        if len(ts) >= 2:
            gaps.append(ts[1] - ts[0])
    gaps = np.sort(gaps)
    cdf = np.array([G.cdf(g) for g in gaps])
    emp = np.arange(1, len(gaps) + 1) / len(gaps)
    assert np.max(np.abs(emp - cdf)) <= 1.63 / math.sqrt(len(gaps))
