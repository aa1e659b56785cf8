"""Closed forms for exponential stage times, against hand-computed values."""

import math

import numpy as np
import pytest

from aoi_mec import (
    Scheme,
    SchemeParams,
    UnstableSchemeError,
    check_stability,
    interarrival_lst,
    system_time_rate,
)
from aoi_mec import exponential as ex
from aoi_mec.exponential import ROOT_RESIDUAL_TOL


def test_local_closed_form():
    assert ex.aoi_local(1.0).mean == 2.0
    assert ex.aoi_local(2.0).mean == 1.0
    assert ex.aoi_local(1.0).method.value == "closed-form"
    with pytest.raises(ValueError):
        ex.aoi_local(0.0)


def test_remote_closed_form_value():
    # (mu_t, mu_s) = (0.5, 1): ratio term 2/3, plus 2 mu_s/mu_t + 1 = 5 -> 17/3
    assert ex.aoi_remote(0.5, 1.0).mean == pytest.approx(17.0 / 3.0, rel=1e-12)


def test_remote_rejects_unstable():
    with pytest.raises(UnstableSchemeError):
        ex.aoi_remote(2.0, 1.0)
    with pytest.raises(UnstableSchemeError):
        ex.aoi_remote(1.0, 1.0)


def test_interarrival_lst_values():
    # product of stage transforms; at s=0 total mass 1
    assert interarrival_lst(0.0, 1.0, 2.0) == 1.0
    assert interarrival_lst(1.0, 1.0, 2.0) == pytest.approx(1.0 / 3.0, rel=1e-12)
    # Erlang-2 limit mu_l == mu_t: (mu/(s+mu))^2
    assert interarrival_lst(1.0, 3.0, 3.0) == pytest.approx((3.0 / 4.0) ** 2, rel=1e-12)
    with pytest.raises(ValueError):
        interarrival_lst(-0.1, 1.0, 1.0)


def test_system_time_rate_known_roots():
    # (1,2,3): discriminant 28, a = 0 -> xi = 14/sqrt(28) = sqrt(7)
    r = system_time_rate(SchemeParams(1.0, 2.0, 3.0))
    assert r.rate == pytest.approx(math.sqrt(7.0), rel=1e-14)
    # (1,1,1): xi = 2/(1+sqrt(5)) = (sqrt(5)-1)/2
    r = system_time_rate(SchemeParams(1.0, 1.0, 1.0))
    assert r.rate == pytest.approx((math.sqrt(5.0) - 1.0) / 2.0, rel=1e-14)


def test_system_time_rate_fixed_point_property():
    # xi must satisfy xi = mu_s (1 - b(xi)) on random stable triples,
    # including draws pushed toward the stability boundary
    rng = np.random.default_rng(42)
    tested = 0
    while tested < 300:
        mu_l, mu_t, mu_s = np.exp(rng.uniform(np.log(1e-2), np.log(1e2), 3))
        p = SchemeParams(mu_l, mu_t, mu_s)
        if check_stability(Scheme.PARTIAL, p).margin <= 1e-6:
            continue
        r = system_time_rate(p)
        assert 0.0 < r.rate < mu_s
        assert r.residual < ROOT_RESIDUAL_TOL * r.rate
        lhs = mu_s * (1.0 - interarrival_lst(r.rate, mu_l, mu_t))
        assert lhs == pytest.approx(r.rate, rel=1e-12)
        tested += 1


def test_system_time_rate_rejects_unstable():
    with pytest.raises(UnstableSchemeError):
        system_time_rate(SchemeParams(1.0, 2.0, 0.5))


def test_partial_closed_form_value():
    est = ex.aoi_partial(SchemeParams(1.0, 2.0, 3.0))
    assert est.mean == pytest.approx(3.0370205029017942, rel=1e-12)


def test_partial_degenerate_rates_continuous():
    # mu_t == mu_l is a removable 0/0 in the coefficients; the averaged
    # evaluation must agree with nearby direct evaluations
    at_eq = ex.aoi_partial(SchemeParams(1.0, 1.0, 2.0)).mean
    lo = ex.aoi_partial(SchemeParams(1.0, 1.0 - 1e-4, 2.0)).mean
    hi = ex.aoi_partial(SchemeParams(1.0, 1.0 + 1e-4, 2.0)).mean
    assert min(lo, hi) < at_eq < max(lo, hi) or abs(at_eq - 0.5 * (lo + hi)) < 1e-8
    assert at_eq == pytest.approx(0.5 * (lo + hi), rel=1e-6)
    # continuity across the switch threshold itself
    inside = ex.aoi_partial(SchemeParams(1.0, 1.0 + 0.9e-6, 2.0)).mean
    outside = ex.aoi_partial(SchemeParams(1.0, 1.0 + 1.1e-6, 2.0)).mean
    assert inside == pytest.approx(outside, rel=1e-6)


def test_partial_limits_match_simpler_schemes():
    # huge channel + server: only local compute left
    fast = ex.aoi_partial(SchemeParams(1.0, 1e6, 1e6)).mean
    assert fast == pytest.approx(ex.aoi_local(1.0).mean, rel=1e-3)
    # free local stage: reduces to the remote scheme
    free_local = ex.aoi_partial(SchemeParams(1e6, 0.5, 1.0)).mean
    assert free_local == pytest.approx(ex.aoi_remote(0.5, 1.0).mean, rel=1e-3)


def test_partial_rejects_unstable():
    with pytest.raises(UnstableSchemeError):
        ex.aoi_partial(SchemeParams(1.0, 2.0, 0.5))
