"""Domain model: schemes, stage-time models, parameters and stability.

Three ways to serve computation-heavy status updates from a source with a
zero-wait generation policy:

* local   -- compute everything at the source, no queueing anywhere;
* remote  -- ship the raw update to an edge server over an exponential
             channel and compute there (the server queue is the bottleneck);
* partial -- split each update, preprocess a share locally, ship the rest.

Remote and partial form a two-node tandem: the first node (local compute +
transmit) never queues because of zero-wait generation, the second (edge
server) is a FCFS queue fed by the first node's departures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

# Evaluators refuse configurations closer to the stability boundary than
# this relative margin; exact boundary equality is rejected as unstable.
STABILITY_GUARD = 1e-9


class Scheme(Enum):
    LOCAL = "local"
    REMOTE = "remote"
    PARTIAL = "partial"


class StageKind(Enum):
    EXPONENTIAL = "exponential"
    DETERMINISTIC = "deterministic"


@dataclass(frozen=True)
class TimeModel:
    """Distribution family per stage. Transmission is always exponential."""

    local: StageKind = StageKind.EXPONENTIAL
    remote: StageKind = StageKind.EXPONENTIAL

    @staticmethod
    def exponential() -> "TimeModel":
        return TimeModel(StageKind.EXPONENTIAL, StageKind.EXPONENTIAL)

    @staticmethod
    def deterministic() -> "TimeModel":
        return TimeModel(StageKind.DETERMINISTIC, StageKind.DETERMINISTIC)


@dataclass(frozen=True)
class SchemeParams:
    """Stage rates: local compute mu_l, transmit mu_t, remote compute mu_s.

    Mean stage times are 1/rate regardless of the stage distribution.
    Rates not used by a scheme (e.g. mu_t, mu_s under local) are ignored
    but must still be positive and finite.
    """

    mu_l: float
    mu_t: float
    mu_s: float

    def __post_init__(self) -> None:
        for name in ("mu_l", "mu_t", "mu_s"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite rate, got {v!r}")


@dataclass(frozen=True)
class TaskProfile:
    """Physical task description for the partition model.

    message_bits   l   [Mbit]       raw update size
    cycles         c   [Megacycle]  total compute demand per update
    channel_rate   R   [Mbit/s]     transmit rate of the channel
    local_freq     f_l [GHz]        source CPU frequency
    remote_freq    f_s [GHz]        edge CPU frequency
    """

    message_bits: float
    cycles: float
    channel_rate: float
    local_freq: float
    remote_freq: float

    def __post_init__(self) -> None:
        for name in ("message_bits", "cycles", "channel_rate", "local_freq", "remote_freq"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")


class Method(Enum):
    CLOSED_FORM = "closed-form"
    QUADRATURE = "quadrature"
    SIMULATION = "simulation"


@dataclass(frozen=True)
class AoiEstimate:
    """A mean age value plus how it was obtained.

    ci_halfwidth is only set for simulation estimates (confidence interval
    half-width of the batch-means estimator).
    """

    mean: float
    method: Method
    ci_halfwidth: float | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mean) and self.mean > 0):
            raise ValueError(f"mean age must be positive and finite, got {self.mean!r}")
        if self.ci_halfwidth is not None and self.ci_halfwidth < 0:
            raise ValueError("ci_halfwidth must be nonnegative")


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    margin: float
    condition: str


class UnstableSchemeError(ValueError):
    """Requested configuration has no stationary regime (or sits in the guard band)."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class FixedPointError(RuntimeError):
    """Residual check of an analytic root failed; indicates an implementation bug."""


def check_stability(scheme: Scheme, params: SchemeParams) -> StabilityReport:
    """Stationarity of the edge-server queue under each scheme.

    Local has no queue at all. Remote requires the server to outpace the
    channel. Partial requires it to outpace the first node's throughput
    mu_l*mu_t/(mu_l+mu_t) (the zero-wait node emits one update per local
    compute plus transmit time). The margin is the relative headroom
    (service rate over arrival rate, minus one); the conditions do not
    depend on the stage distribution family, only on the rates.
    """
    scheme = Scheme(scheme)
    if scheme is Scheme.LOCAL:
        return StabilityReport(True, math.inf, "always stable (no queueing stage)")
    if scheme is Scheme.REMOTE:
        margin = params.mu_s / params.mu_t - 1.0
        return StabilityReport(margin > 0, margin, "mu_s > mu_t")
    arrival = params.mu_l * params.mu_t / (params.mu_l + params.mu_t)
    margin = params.mu_s / arrival - 1.0
    return StabilityReport(margin > 0, margin, "mu_s > mu_l*mu_t/(mu_l + mu_t)")


def require_stable(
    scheme: Scheme, params: SchemeParams, guard: float = STABILITY_GUARD
) -> StabilityReport:
    """Raise UnstableSchemeError unless stable with relative margin > guard."""
    report = check_stability(scheme, params)
    if not report.stable or report.margin <= guard:
        raise UnstableSchemeError(
            f"{scheme.value} scheme is not stably dimensioned "
            f"(need {report.condition}; relative margin {report.margin:.3g}, "
            f"guard {guard:.1e})"
        )
    return report
