"""Partition rate models and the optimal-split search."""

import math

import numpy as np
import pytest

from aoi_mec import (
    Scheme,
    SchemeParams,
    TaskProfile,
    TimeModel,
    UnstableSchemeError,
    analytic_aoi,
    local_rate,
    min_age_floor,
    optimize_alpha,
    optimize_alpha_scaled,
    rates_from_profile,
    remote_rates,
    scaled_rates,
    scheme_for_alpha,
)
from aoi_mec.partition import _optimize, _try_partial, _analytic_evaluator

PROFILE = TaskProfile(message_bits=1.0, cycles=1000.0, channel_rate=0.5,
                      local_freq=1.0, remote_freq=9.0)


def test_profile_rates():
    p = rates_from_profile(PROFILE, 0.5)
    assert (p.mu_l, p.mu_t, p.mu_s) == (2.0, 1.0, 18.0)
    assert local_rate(PROFILE) == 1.0
    assert remote_rates(PROFILE) == (0.5, 9.0)
    for bad in (0.0, 1.0, -0.1, 1.1):
        with pytest.raises(ValueError):
            rates_from_profile(PROFILE, bad)


def test_scaled_rates():
    p = scaled_rates(SchemeParams(1.0, 2.0, 3.0), 0.25)
    assert (p.mu_l, p.mu_t, p.mu_s) == (pytest.approx(4.0 / 3.0), 8.0, 12.0)
    with pytest.raises(ValueError):
        scaled_rates(SchemeParams(1.0, 2.0, 3.0), 1.0)


def test_helpers():
    assert min_age_floor(0.5) == 4.0
    with pytest.raises(ValueError):
        min_age_floor(0.0)
    assert scheme_for_alpha(0.0) is Scheme.LOCAL
    assert scheme_for_alpha(1.0) is Scheme.REMOTE
    assert scheme_for_alpha(0.3) is Scheme.PARTIAL


def test_optimum_dominates_endpoints():
    # sweep the server load with the other rates fixed; the optimized split
    # must never lose to either pure scheme, and must collapse to local
    # when the server is nearly saturated
    model = TimeModel.exponential()
    for mu_l in (0.1, 0.5):
        for rho_s in np.linspace(0.05, 0.95, 10):
            base = SchemeParams(mu_l, rho_s * 1.0, 1.0)
            best = optimize_alpha_scaled(base, model, grid_points=64)
            assert 0.0 <= best.alpha <= 1.0
            assert best.stable
            candidates = [analytic_aoi(Scheme.LOCAL, base, model).mean]
            if rho_s < 1.0:
                candidates.append(analytic_aoi(Scheme.REMOTE, base, model).mean)
            assert best.aoi.mean <= min(candidates) + 1e-6


def test_optimum_collapses_to_local_when_channel_slow():
    # mu_t far below mu_l: any offloaded share pays >= 2/mu_t, keep it local
    for mu_l in (0.1, 0.5):
        base = SchemeParams(mu_l, 0.05, 1.0)
        best = optimize_alpha_scaled(base, grid_points=64)
        local = analytic_aoi(Scheme.LOCAL, base, TimeModel.exponential()).mean
        assert abs(best.aoi.mean - local) / local <= 1e-3


def test_refinement_never_worse_than_grid():
    base = SchemeParams(0.5, 0.5, 1.0)
    best = optimize_alpha_scaled(base, grid_points=48)
    evaluate = _analytic_evaluator(TimeModel.exponential())
    grid = [
        _try_partial(evaluate, scaled_rates(base, (j + 1.0) / 49.0))
        for j in range(48)
    ]
    assert best.aoi.mean <= min(grid) + 1e-12
    # pinned optimum for this base (dense-grid golden search)
    assert best.alpha == pytest.approx(0.2263, abs=2e-3)
    assert best.aoi.mean == pytest.approx(3.885966, rel=1e-4)


def test_scale_invariance():
    # rates are inverse times: scaling all three by k scales the age by 1/k
    base = SchemeParams(0.5, 0.5, 1.0)
    ref = optimize_alpha_scaled(base, grid_points=64)
    for k in (0.1, 3.0):
        scaled = optimize_alpha_scaled(
            SchemeParams(k * base.mu_l, k * base.mu_t, k * base.mu_s),
            grid_points=64)
        assert scaled.alpha == pytest.approx(ref.alpha, rel=1e-6)
        assert scaled.aoi.mean == pytest.approx(ref.aoi.mean / k, rel=1e-9)


def test_profile_optimizer_beats_dense_scan():
    best = optimize_alpha(PROFILE, grid_points=128)
    assert 0.0 <= best.alpha <= 1.0
    model = TimeModel.exponential()
    direct = [analytic_aoi(Scheme.PARTIAL, rates_from_profile(PROFILE, a), model).mean
              for a in np.linspace(0.01, 0.99, 99)]
    assert best.aoi.mean <= min(direct) + 1e-9


def test_all_unstable_raises():
    # mu_s far below the partial arrival rate at every split
    rates_at = lambda a: scaled_rates(SchemeParams(10.0, 10.0, 0.01), a)
    evaluate = _analytic_evaluator(TimeModel.exponential())
    with pytest.raises(UnstableSchemeError):
        _optimize(rates_at, endpoints=[], evaluate=evaluate,
                  grid_points=16, refine_tol=1e-3)


def test_simulation_evaluator_consistent():
    base = SchemeParams(0.5, 0.5, 1.0)
    sim = optimize_alpha_scaled(base, evaluator="simulation", grid_points=8,
                                refine_tol=5e-2, messages=20_000, seed=7)
    ana = optimize_alpha_scaled(base, grid_points=64)
    assert sim.aoi.mean == pytest.approx(ana.aoi.mean, rel=0.05)
    assert sim.aoi.ci_halfwidth is not None


def test_deterministic_model_optimum():
    # remote endpoint unstable (mu_s/alpha == mu_t/alpha), interior split wins
    base = SchemeParams(0.5, 2.0, 2.0)
    model = TimeModel.deterministic()
    best = optimize_alpha_scaled(base, model, grid_points=6, refine_tol=1e-2)
    local = analytic_aoi(Scheme.LOCAL, base, model).mean
    assert best.aoi.mean < local
    assert 0.0 < best.alpha < 1.0
    assert best.alpha == pytest.approx(0.859, abs=0.02)
    assert best.aoi.mean == pytest.approx(1.656968, rel=1e-3)
