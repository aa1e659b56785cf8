"""Closed-form mean age for exponential stage times.

Local is a renewal sawtooth driven by exp(mu_l). Remote is an M/M/1 queue
fed at rate mu_t with service rate mu_s, ages accumulated over the zero-wait
sawtooth. Partial is a GI/M/1 queue whose inter-arrival time is the sum of
two independent exponentials (local compute + transmit); its waiting time is
exponential with rate xi, the positive root of

    xi = mu_s * (1 - b(xi)),      b = LST of the inter-arrival time,

which for a two-exponential sum is available in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import (
    AoiEstimate,
    FixedPointError,
    Method,
    Scheme,
    SchemeParams,
    require_stable,
)

# Relative residual above which the explicit GI/M/1 root is rejected.
ROOT_RESIDUAL_TOL = 1e-9

# |mu_t - mu_l| below this relative threshold switches the partial closed
# form to symmetric perturbation averaging (its coefficients have a
# removable singularity at mu_t == mu_l).
DEGENERACY_REL = 1e-6
_PERTURB_REL = 1e-5


def aoi_local(mu_l: float) -> AoiEstimate:
    """Mean age 2/mu_l: one mean compute time of lag plus one of sawtooth."""
    if not (mu_l > 0 and math.isfinite(mu_l)):
        raise ValueError("mu_l must be positive and finite")
    return AoiEstimate(2.0 / mu_l, Method.CLOSED_FORM)


def aoi_remote(mu_t: float, mu_s: float) -> AoiEstimate:
    """Mean age of the remote scheme (M/M/1 at the edge server)."""
    params = SchemeParams(mu_l=1.0, mu_t=mu_t, mu_s=mu_s)
    require_stable(Scheme.REMOTE, params)
    ratio = (2.0 * mu_t**3 - mu_t**2 * mu_s + mu_t * mu_s**2) / (
        mu_s * (mu_s + mu_t) * (mu_s - mu_t)
    )
    return AoiEstimate((ratio + 2.0 * mu_s / mu_t + 1.0) / mu_s, Method.CLOSED_FORM)


def interarrival_lst(s: float, mu_l: float, mu_t: float) -> float:
    """LST of the partial-scheme inter-arrival time (exp(mu_l) + exp(mu_t)).

    Evaluated as the product of the stage LSTs, which is identical to the
    partial-fraction form but has no removable singularity at mu_l == mu_t
    (where it degenerates to the Erlang-2 transform).
    """
    if s < 0:
        raise ValueError("transform argument must be nonnegative")
    return (mu_l / (s + mu_l)) * (mu_t / (s + mu_t))


@dataclass(frozen=True)
class SystemTimeRate:
    """GI/M/1 stationary system-time rate and its fixed-point residual."""

    rate: float
    residual: float


def system_time_rate(params: SchemeParams) -> SystemTimeRate:
    """Solve xi = mu_s (1 - b(xi)) for the partial scheme's queue.

    Uses the explicit quadratic root. When mu_l + mu_t >= mu_s the root is
    computed from the rationalized form
        xi = 2 (mu_l mu_s + mu_t mu_s - mu_l mu_t) / (sqrt(disc) + a)
    (a = mu_l + mu_t - mu_s), avoiding cancellation near the stability
    boundary where xi -> 0. The residual of the defining fixed point is
    checked; a violation is an implementation bug, not a data error.
    """
    require_stable(Scheme.PARTIAL, params)
    mu_l, mu_t, mu_s = params.mu_l, params.mu_t, params.mu_s
    a = mu_l + mu_t - mu_s
    disc = (mu_s - mu_t + mu_l) ** 2 + 4.0 * mu_t * mu_s
    root = math.sqrt(disc)
    if a >= 0.0:
        # disc - a^2 == 4 (mu_l mu_s + mu_t mu_s - mu_l mu_t), positive iff stable
        xi = 2.0 * (mu_l * mu_s + mu_t * mu_s - mu_l * mu_t) / (root + a)
    else:
        xi = 0.5 * (root - a)
    residual = abs(xi - mu_s * (1.0 - interarrival_lst(xi, mu_l, mu_t)))
    if not residual < ROOT_RESIDUAL_TOL * xi:
        raise FixedPointError(
            f"system-time rate residual {residual:.3e} exceeds "
            f"{ROOT_RESIDUAL_TOL:.1e} * xi = {ROOT_RESIDUAL_TOL * xi:.3e}"
        )
    return SystemTimeRate(xi, residual)


@dataclass(frozen=True)
class WaitCoefficients:
    """Dimensionless weights of the conditional-wait expression.

    local_weight multiplies the terms tied to the local-compute rate,
    transmit_weight those tied to the transmit rate. Both blow up as
    mu_t -> mu_l; callers must handle that degeneracy.
    """

    local_weight: float
    transmit_weight: float


def _wait_coefficients(mu_l: float, mu_t: float, mu_s: float) -> WaitCoefficients:
    return WaitCoefficients(
        local_weight=mu_t * mu_s / ((mu_t - mu_l) * (mu_l + mu_s)),
        transmit_weight=mu_l * mu_s / ((mu_t - mu_l) * (mu_t + mu_s)),
    )


def _aoi_partial_raw(mu_l: float, mu_t: float, mu_s: float, xi: float) -> float:
    coef = _wait_coefficients(mu_l, mu_t, mu_s)
    phi, phit = coef.local_weight, coef.transmit_weight
    decay = (
        (mu_l * mu_t / (mu_t - mu_l))
        * (1.0 / (xi + mu_l) ** 2 - 1.0 / (xi + mu_t) ** 2)
        * (1.0 / xi - phi / (mu_l + xi) + phit / (mu_t + xi))
    )
    bracket = (
        1.0 / (mu_l * mu_s)
        + 1.0 / (mu_t * mu_s)
        + 2.0 / mu_l**2
        + 2.0 / mu_t**2
        + 3.0 / (mu_l * mu_t)
        + decay
    )
    value = (
        1.0 / mu_s
        + (phi - 1.0) / mu_l
        - (1.0 + phit) / mu_t
        + mu_l * mu_t / (mu_l + mu_t) * bracket
    )
    if __debug__:
        # Second assembly from the building blocks E[WB], E[T B], E[B Bprev],
        # E[B^2]; must agree with the flattened form to float accuracy.
        eb = 1.0 / mu_l + 1.0 / mu_t
        e_b_bprev = 1.0 / mu_l**2 + 1.0 / mu_t**2 + 2.0 / (mu_l * mu_t)
        e_b2 = 2.0 / mu_l**2 + 2.0 / mu_t**2 + 2.0 / (mu_l * mu_t)
        e_wb = eb * (1.0 / mu_s + (phi - 1.0) / mu_l - (phit + 1.0) / mu_t) + decay
        alt = mu_l * mu_t / (mu_l + mu_t) * (e_wb + eb / mu_s + e_b_bprev + 0.5 * e_b2)
        assert abs(alt - value) <= 1e-12 * abs(value), (
            f"partial closed-form assembly mismatch: {value!r} vs {alt!r}"
        )
    return value


def aoi_partial(params: SchemeParams) -> AoiEstimate:
    """Mean age of the partial scheme (GI/M/1 at the edge server).

    Near mu_t == mu_l the coefficients are a 0/0 limit; the value is taken
    as the average of two symmetric perturbations of mu_t, which cancels
    the leading error term.
    """
    require_stable(Scheme.PARTIAL, params)
    mu_l, mu_t, mu_s = params.mu_l, params.mu_t, params.mu_s
    if abs(mu_t - mu_l) <= DEGENERACY_REL * mu_l:
        lo = SchemeParams(mu_l, mu_l * (1.0 - _PERTURB_REL), mu_s)
        hi = SchemeParams(mu_l, mu_l * (1.0 + _PERTURB_REL), mu_s)
        value = 0.5 * (
            _aoi_partial_raw(mu_l, lo.mu_t, mu_s, system_time_rate(lo).rate)
            + _aoi_partial_raw(mu_l, hi.mu_t, mu_s, system_time_rate(hi).rate)
        )
    else:
        value = _aoi_partial_raw(mu_l, mu_t, mu_s, system_time_rate(params).rate)
    return AoiEstimate(value, Method.CLOSED_FORM)
