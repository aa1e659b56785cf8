"""Single entry point for the analytic (non-simulation) age values."""

from __future__ import annotations

from . import deterministic, exponential
from .core import AoiEstimate, Scheme, SchemeParams, StageKind, TimeModel


def analytic_aoi(scheme: Scheme, params: SchemeParams, time_model: TimeModel) -> AoiEstimate:
    """Closed form where one exists, quadrature otherwise.

    Transmission is exponential in every model; the time model selects the
    distribution family of the compute stages. Mixed families (exponential
    local with deterministic remote, or vice versa) have no analytic path
    here and must be simulated.
    """
    scheme = Scheme(scheme)
    if scheme is Scheme.LOCAL:
        if time_model.local is StageKind.EXPONENTIAL:
            return exponential.aoi_local(params.mu_l)
        return deterministic.aoi_local(params.mu_l)
    if scheme is Scheme.REMOTE:
        if time_model.remote is StageKind.EXPONENTIAL:
            return exponential.aoi_remote(params.mu_t, params.mu_s)
        return deterministic.aoi_remote(params.mu_t, params.mu_s)
    if time_model.local is not time_model.remote:
        raise ValueError(
            "no analytic form for mixed stage families under the partial scheme"
        )
    if time_model.local is StageKind.EXPONENTIAL:
        return exponential.aoi_partial(params)
    return deterministic.aoi_partial(params)
