"""Partition fraction: rate models and the optimal split search.

Profile model: a share alpha of each update's compute demand is offloaded.
The source processes the retained share, the channel carries the offloaded
share's data, the edge server processes the offloaded share:

    mu_l = 1000 f_l / ((1-alpha) c)     [f in GHz, c in Megacycles]
    mu_t = R / (alpha l)                [R in Mbit/s, l in Mbit]
    mu_s = 1000 f_s / (alpha c)

alpha = 0 is exactly the local scheme and alpha = 1 the remote scheme; the
diverging unused rates at the endpoints are never materialized, the
endpoints are evaluated through those schemes instead.

Rate model (for sweeps given directly in rates): the base rates describe the
whole update, a split scales them to mu_l/(1-alpha), mu_t/alpha, mu_s/alpha.

The search evaluates a uniform interior alpha grid, keeps the best stable
grid point, refines inside its neighbor bracket by golden section, and
compares against the endpoint schemes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .analytic import analytic_aoi
from .core import (
    AoiEstimate,
    Scheme,
    SchemeParams,
    TaskProfile,
    TimeModel,
    UnstableSchemeError,
    check_stability,
)

GRID_POINTS = 512
REFINE_TOL = 1e-4
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def rates_from_profile(profile: TaskProfile, alpha: float) -> SchemeParams:
    """Stage rates for an interior split 0 < alpha < 1.

    The exact endpoints have no finite rate triple (the unused stage rate
    diverges); use local_rate / remote_rates and the matching scheme there.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(
            "alpha must lie strictly inside (0, 1); alpha=0 is the local scheme "
            "and alpha=1 the remote scheme"
        )
    return SchemeParams(
        mu_l=1000.0 * profile.local_freq / ((1.0 - alpha) * profile.cycles),
        mu_t=profile.channel_rate / (alpha * profile.message_bits),
        mu_s=1000.0 * profile.remote_freq / (alpha * profile.cycles),
    )


def local_rate(profile: TaskProfile) -> float:
    """mu_l when the whole update is computed at the source (alpha = 0)."""
    return 1000.0 * profile.local_freq / profile.cycles


def remote_rates(profile: TaskProfile) -> tuple[float, float]:
    """(mu_t, mu_s) when the whole update is offloaded (alpha = 1)."""
    return (
        profile.channel_rate / profile.message_bits,
        1000.0 * profile.remote_freq / profile.cycles,
    )


def scheme_for_alpha(alpha: float) -> Scheme:
    if alpha == 0.0:
        return Scheme.LOCAL
    if alpha == 1.0:
        return Scheme.REMOTE
    return Scheme.PARTIAL


def scaled_rates(base: SchemeParams, alpha: float) -> SchemeParams:
    """Rate-model split: stage demands scale with the assigned share."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly inside (0, 1)")
    return SchemeParams(
        mu_l=base.mu_l / (1.0 - alpha),
        mu_t=base.mu_t / alpha,
        mu_s=base.mu_s / alpha,
    )


def min_age_floor(mu_t: float) -> float:
    """2/mu_t, the age floor of any offloading split over this channel."""
    if mu_t <= 0:
        raise ValueError("mu_t must be positive")
    return 2.0 / mu_t


@dataclass(frozen=True)
class PartitionPoint:
    """Optimal split: alpha, its rates (None at the exact endpoints), age."""

    alpha: float
    params: SchemeParams | None
    aoi: AoiEstimate
    stable: bool = True


Evaluator = Callable[[Scheme, SchemeParams], AoiEstimate]


def _analytic_evaluator(time_model: TimeModel) -> Evaluator:
    return lambda scheme, params: analytic_aoi(scheme, params, time_model)


def _simulation_evaluator(time_model: TimeModel, messages: int, seed: int) -> Evaluator:
    from .simulate import SimConfig, simulate  # avoid import cycle at module load

    def run(scheme: Scheme, params: SchemeParams) -> AoiEstimate:
        return simulate(
            SimConfig(scheme=scheme, params=params, time_model=time_model,
                      n_messages=messages, seed=seed)
        ).aoi

    return run


def _try_partial(evaluate: Evaluator, params: SchemeParams) -> float:
    if not check_stability(Scheme.PARTIAL, params).stable:
        return math.inf
    try:
        return evaluate(Scheme.PARTIAL, params).mean
    except UnstableSchemeError:  # inside the guard band
        return math.inf


def _golden_refine(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def _optimize(
    rates_at: Callable[[float], SchemeParams],
    endpoints: list[tuple[float, SchemeParams | None, AoiEstimate | None]],
    evaluate: Evaluator,
    grid_points: int,
    refine_tol: float,
) -> PartitionPoint:
    alphas = [(j + 1.0) / (grid_points + 1.0) for j in range(grid_points)]
    values = [_try_partial(evaluate, rates_at(a)) for a in alphas]

    best: PartitionPoint | None = None
    for alpha, params, estimate in endpoints:
        if estimate is not None and (best is None or estimate.mean < best.aoi.mean):
            best = PartitionPoint(alpha, params, estimate)

    k = int(min(range(len(values)), key=values.__getitem__))
    if math.isfinite(values[k]):
        step = 1.0 / (grid_points + 1.0)
        lo = alphas[k - 1] if k > 0 and math.isfinite(values[k - 1]) else max(
            alphas[k] - step, 0.0
        )
        hi = alphas[k + 1] if k + 1 < len(alphas) and math.isfinite(values[k + 1]) else min(
            alphas[k] + step, 1.0
        )
        f = lambda a: _try_partial(evaluate, rates_at(a))
        a_ref, v_ref = _golden_refine(f, lo, hi, refine_tol)
        # refinement must never lose to the grid scan
        if values[k] < v_ref:
            a_ref, v_ref = alphas[k], values[k]
        if best is None or v_ref < best.aoi.mean:
            best = PartitionPoint(a_ref, rates_at(a_ref),
                                  evaluate(Scheme.PARTIAL, rates_at(a_ref)))
    if best is None:
        raise UnstableSchemeError("no stable split found on the alpha grid")
    return best


def _endpoint(alpha, scheme, params, evaluate):
    try:
        return (alpha, None, evaluate(scheme, params))
    except UnstableSchemeError:
        return (alpha, None, None)


def optimize_alpha(
    profile: TaskProfile,
    time_model: TimeModel = TimeModel.exponential(),
    evaluator: str = "analytic",
    *,
    grid_points: int = GRID_POINTS,
    refine_tol: float = REFINE_TOL,
    messages: int = 200_000,
    seed: int = 0,
) -> PartitionPoint:
    """Best partition fraction for a task profile, endpoints included.

    evaluator is "analytic" or "simulation"; the endpoint candidates
    alpha=0/1 are evaluated through the local/remote schemes.
    """
    evaluate = _make_evaluator(evaluator, time_model, messages, seed)
    mu_t1, mu_s1 = remote_rates(profile)
    endpoints = [
        _endpoint(0.0, Scheme.LOCAL,
                  SchemeParams(local_rate(profile), mu_t1, mu_s1), evaluate),
        _endpoint(1.0, Scheme.REMOTE,
                  SchemeParams(local_rate(profile), mu_t1, mu_s1), evaluate),
    ]
    return _optimize(lambda a: rates_from_profile(profile, a), endpoints,
                     evaluate, grid_points, refine_tol)


def optimize_alpha_scaled(
    base: SchemeParams,
    time_model: TimeModel = TimeModel.exponential(),
    evaluator: str = "analytic",
    *,
    grid_points: int = GRID_POINTS,
    refine_tol: float = REFINE_TOL,
    messages: int = 200_000,
    seed: int = 0,
) -> PartitionPoint:
    """Best split under the rate model (endpoints: local/remote at base rates)."""
    evaluate = _make_evaluator(evaluator, time_model, messages, seed)
    endpoints = [
        _endpoint(0.0, Scheme.LOCAL, base, evaluate),
        _endpoint(1.0, Scheme.REMOTE, base, evaluate),
    ]
    return _optimize(lambda a: scaled_rates(base, a), endpoints,
                     evaluate, grid_points, refine_tol)


def _make_evaluator(evaluator: str, time_model: TimeModel,
                    messages: int, seed: int) -> Evaluator:
    if evaluator == "analytic":
        return _analytic_evaluator(time_model)
    if evaluator == "simulation":
        return _simulation_evaluator(time_model, messages, seed)
    raise ValueError(f"unknown evaluator {evaluator!r}")


__all__ = [
    "GRID_POINTS",
    "REFINE_TOL",
    "PartitionPoint",
    "local_rate",
    "min_age_floor",
    "optimize_alpha",
    "optimize_alpha_scaled",
    "rates_from_profile",
    "remote_rates",
    "scaled_rates",
    "scheme_for_alpha",
]
