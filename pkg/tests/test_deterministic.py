"""Deterministic compute stages: M/D/1 wait distribution and quadrature ages.

Oracles used here:
  * Takacs moments of the M/G/1 wait: E[W] = lam E[S^2]/(2(1-rho)),
    E[W^2] = 2 E[W]^2 + lam E[S^3]/(3(1-rho)), with deterministic S.
  * Monte-Carlo conditional waits from DES waiting-time samples.
  * The partial-scheme closed branch (server at least as fast as the
    local stage implies zero queueing).
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from aoi_mec import (
    Scheme,
    SchemeParams,
    SimConfig,
    TimeModel,
    UnstableSchemeError,
    collect_wait_samples,
    md1_wait_cdf,
    md1_wait_distribution,
)
from aoi_mec import deterministic as dt
from aoi_mec.deterministic import _expected_slack, cond_wait_remote


def test_cdf_known_values():
    # F(0) = 1 - rho exactly; F(1/mu) = (1-rho) e^rho
    assert md1_wait_cdf(0.0, 0.5, 1.0) == 0.5
    assert md1_wait_cdf(1.0, 0.5, 1.0) == pytest.approx(0.5 * math.exp(0.5), rel=1e-12)
    assert md1_wait_cdf(-1.0, 0.5, 1.0) == 0.0
    with pytest.raises(UnstableSchemeError):
        md1_wait_cdf(1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        md1_wait_cdf(1.0, -0.5, 1.0)


def test_distribution_shape():
    w = md1_wait_distribution(0.8, 1.0)
    assert w.atom_at_zero == pytest.approx(0.2, rel=1e-12)
    assert w.cdf(0.0) == pytest.approx(w.atom_at_zero, rel=1e-12)
    grid = np.linspace(0.0, w.tail_cutoff() * 1.05, 2000)
    vals = w.cdf(grid)
    assert np.all(np.diff(vals) >= -1e-9)
    assert np.all((vals >= 0.0) & (vals <= 1.0))
    assert vals[-1] == 1.0
    assert w.density(w.tail_cutoff() + 1.0) == 0.0
    with pytest.raises(UnstableSchemeError):
        md1_wait_distribution(1.0, 0.5)


def test_tail_cutoff_covers_mass():
    for rho in (0.1, 0.5, 0.9):
        w = md1_wait_distribution(rho, 1.0)
        t = w.tail_cutoff()
        assert dt._complement_value(t * w.mu, rho) < dt.TAIL_EPS
        # cutoff is breakpoint-aligned
        assert (t * w.mu) == pytest.approx(round(t * w.mu), abs=1e-9)


def test_takacs_moments():
    # lam = 0.5, mu = 1: E[W] = 1/2, E[W^2] = 2/4 + (0.5/1.5) = 5/6
    w = md1_wait_distribution(0.5, 1.0)
    mass = w.expect(lambda x: 1.0)
    mean = w.expect(lambda x: x)
    second = w.expect(lambda x: x * x)
    assert mass == pytest.approx(1.0, abs=1e-8)
    assert mean == pytest.approx(0.5, abs=1e-7)
    assert second == pytest.approx(5.0 / 6.0, abs=1e-6)
    # same moments at an unequal service rate
    w = md1_wait_distribution(0.9, 1.5)
    rho = 0.6
    ew = rho / (2.0 * 1.5 * (1.0 - rho))
    ew2 = 2.0 * ew**2 + 0.9 * (1.0 / 1.5) ** 3 / (3.0 * (1.0 - rho))
    assert w.expect(lambda x: x) == pytest.approx(ew, abs=1e-7)
    assert w.expect(lambda x: x * x) == pytest.approx(ew2, abs=1e-6)


def test_expect_lower_truncation_and_atom():
    w = md1_wait_distribution(0.5, 1.0)
    full = w.expect(lambda x: 1.0)
    no_atom = w.expect(lambda x: 1.0, include_atom=False)
    assert full - no_atom == pytest.approx(w.atom_at_zero, abs=1e-8)
    tail = w.expect(lambda x: 1.0, lower=1.0, include_atom=False)
    assert tail == pytest.approx(1.0 - w.cdf(1.0), abs=1e-8)
    assert w.expect(lambda x: 1.0, lower=w.tail_cutoff() + 1.0) == 0.0


def test_interpolant_matches_exact_density():
    w = md1_wait_distribution(0.7, 1.0)
    rng = np.random.default_rng(3)
    pts = rng.uniform(0.0, w.tail_cutoff(), 200)
    fast = np.array([w._density_fast(x) for x in pts])
    exact = w.density(pts)
    assert np.max(np.abs(fast - exact)) < 1e-9


def test_expected_slack_is_plus_part_mean():
    # E[(a - Y)+] for Y ~ exp(rate), against direct integration and the
    # vectorized reimplementation used by the conditional-wait oracles
    for a, rate in [(0.5, 1.0), (2.0, 0.3), (0.0, 1.0), (-1.0, 2.0)]:
        assert _expected_slack(a, rate) == pytest.approx(
            float(_slack_arr(a, rate)), abs=1e-14)
        direct = quad(lambda y: max(a - y, 0.0) * rate * math.exp(-rate * y),
                      0.0, max(a, 0.0) + 1.0)[0] if a > 0 else 0.0
        assert _expected_slack(a, rate) == pytest.approx(direct, abs=1e-10)


def _slack_arr(a, rate):
    a = np.asarray(a, dtype=float)
    return np.where(a > 0.0, a + np.expm1(-rate * np.maximum(a, 0.0)) / rate, 0.0)


def test_cond_wait_remote_against_sampled_waits():
    # empirical waits of the same queue + exact slack kernel = independent
    # estimate of the conditional wait integral
    mu_t, mu_s = 0.5, 1.0
    samples = collect_wait_samples(
        SimConfig(Scheme.REMOTE, SchemeParams(1.0, mu_t, mu_s),
                  time_model=TimeModel.deterministic(), n_messages=400_000, seed=11)
    )
    wait = md1_wait_distribution(mu_t, mu_s)
    s = 1.0 / mu_s
    for y in (0.2, 0.8, 1.5, 3.0, 6.0):
        mc = np.mean(np.where(samples <= y - s,
                              _slack_arr(s, mu_t),
                              _slack_arr(samples + 2.0 * s - y, mu_t)))
        assert cond_wait_remote(y, mu_t, mu_s, wait) == pytest.approx(mc, abs=5e-3)


def test_cond_wait_partial_against_sampled_waits():
    mu_l, mu_t, mu_s = 2.0, 1.0, 1.0
    samples = collect_wait_samples(
        SimConfig(Scheme.PARTIAL, SchemeParams(mu_l, mu_t, mu_s),
                  time_model=TimeModel.deterministic(), n_messages=400_000, seed=13)
    )
    mu_eq = mu_l * mu_s / (mu_l - mu_s)
    wait = md1_wait_distribution(mu_t, mu_eq)
    s, d = 1.0 / mu_s, 1.0 / mu_l
    for b in (0.6, 1.2, 2.2, 3.0):
        mc = np.mean(np.where(samples <= b - s,
                              _slack_arr(s - d, mu_t),
                              _slack_arr(samples + 2.0 * s - d - b, mu_t)))
        assert dt._cond_wait_partial(b, mu_l, mu_t, mu_s, wait) == pytest.approx(mc, abs=5e-3)


def test_local_age():
    assert dt.aoi_local(1.0).mean == 1.5
    assert dt.aoi_local(3.0).mean == 0.5
    assert dt.aoi_local(1.0).method.value == "closed-form"


def test_remote_age_values():
    est = dt.aoi_remote(0.5, 1.0)
    assert est.method.value == "quadrature"
    assert est.mean == pytest.approx(5.297442541395238, abs=1e-5)
    # fast server: only channel sawtooth left, age -> 2/mu_t
    assert dt.aoi_remote(0.5, 200.0).mean == pytest.approx(4.0, rel=2e-3)
    with pytest.raises(UnstableSchemeError):
        dt.aoi_remote(1.0, 1.0)


def test_partial_age_closed_branch():
    # server >= local stage rate: the equivalent service time is <= 0,
    # nothing ever queues, and the age is the no-wait sawtooth value
    est = dt.aoi_partial(SchemeParams(1.0, 1.0, 2.0))
    assert est.method.value == "closed-form"
    assert est.mean == pytest.approx(3.75, rel=1e-12)
    # explicit no-wait assembly at another triple
    mu_l, mu_t, mu_s = 2.0, 1.0, 3.0
    base = (1.0 / (mu_s * mu_l) + 1.0 / (mu_s * mu_t) + 1.5 / mu_l**2
            + 3.0 / (mu_l * mu_t) + 2.0 / mu_t**2)
    expected = mu_l * mu_t / (mu_l + mu_t) * base
    assert dt.aoi_partial(SchemeParams(mu_l, mu_t, mu_s)).mean == pytest.approx(
        expected, rel=1e-12)
    # very fast server converges to the same sawtooth with 1/mu_s -> 0
    limit = dt.aoi_partial(SchemeParams(1.0, 1.0, 1e9)).mean
    assert limit == pytest.approx(3.25, rel=1e-6)


def test_partial_age_quadrature_branch():
    est = dt.aoi_partial(SchemeParams(2.0, 0.5, 1.0))
    assert est.method.value == "quadrature"
    assert est.mean == pytest.approx(5.6149943333838905, abs=1e-5)
    with pytest.raises(UnstableSchemeError):
        dt.aoi_partial(SchemeParams(2.0, 2.0, 1.0))


def test_partial_branches_continuous():
    closed = dt.aoi_partial(SchemeParams(1.0, 1.0, 1.0)).mean
    quadr = dt.aoi_partial(SchemeParams(1.0, 1.0, 1.0 - 1e-3)).mean
    assert quadr == pytest.approx(closed, rel=1e-2)
