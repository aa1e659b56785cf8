"""Discrete-event simulation of the three schemes.

The zero-wait policy makes the event structure renewal-like: message i's
stage times fix the gap B_i between consecutive arrivals at the edge queue,
and the queue itself is a single Lindley recursion

    W_i = (W_{i-1} + S_{i-1} - B_i)+,    T_i = W_i + S_i.

Stage times are drawn vectorized from counter-based Philox streams (one
stream per stage, keyed by the seed and a fixed stage id) and consumed in
message order, so runs are bitwise reproducible and message i's stage times
do not depend on how many messages are simulated. The recursion itself is
sequential and runs in a compiled loop.

The time-average age is the exact sawtooth area between the first and last
completion of the post-warmup window, decomposed into per-update trapezoids;
confidence intervals come from batch means over contiguous message blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy import stats

from .core import (
    AoiEstimate,
    Method,
    Scheme,
    SchemeParams,
    StageKind,
    TimeModel,
    require_stable,
)

_STAGE_ID = {"local": 0, "transmit": 1, "remote": 2}


@dataclass(frozen=True)
class SimConfig:
    scheme: Scheme
    params: SchemeParams
    time_model: TimeModel = TimeModel.exponential()
    n_messages: int = 1_000_000
    warmup: int | None = None  # None resolves to 5% of n_messages
    seed: int = 0
    batch_count: int = 30
    confidence: float = 0.99
    keep_wait_samples: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not isinstance(self.n_messages, int) or self.n_messages < 2:
            raise ValueError("n_messages must be an integer >= 2")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        if self.batch_count < 10:
            raise ValueError("batch_count must be at least 10")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must be in (0, 1)")
        warm = self.resolved_warmup()
        if warm < 0 or self.n_messages - warm - 1 < self.batch_count:
            raise ValueError(
                "need at least one age trapezoid per batch after warmup "
                f"(n={self.n_messages}, warmup={warm}, batches={self.batch_count})"
            )

    def resolved_warmup(self) -> int:
        return self.warmup if self.warmup is not None else int(0.05 * self.n_messages)


@dataclass(frozen=True)
class MessageLog:
    """Columnar per-message records (index i = message i).

    generated:   g_i, sampling instant (zero-wait: g_{i+1} == arrived_i
                 for queueing schemes, == completed_i for local)
    local_done:  end of the local compute stage
    arrived:     arrival at the edge queue (== local_done for local)
    completed:   final completion instant
    gap:         B_i, inter-arrival gap closed by message i
    system_time: T_i = W_i + S_i at the edge queue (0 for local)
    wait:        W_i
    service:     S_i (0 for local)
    """

    generated: np.ndarray
    local_done: np.ndarray
    arrived: np.ndarray
    completed: np.ndarray
    gap: np.ndarray
    system_time: np.ndarray
    wait: np.ndarray
    service: np.ndarray

    def __len__(self) -> int:
        return len(self.gap)

    def window(self, start: int, stop: int | None = None) -> "MessageLog":
        sl = slice(start, stop)
        return MessageLog(*(getattr(self, f)[sl] for f in (
            "generated", "local_done", "arrived", "completed",
            "gap", "system_time", "wait", "service")))


@dataclass(frozen=True)
class SimResult:
    aoi: AoiEstimate
    mean_wait: float
    batch_means: np.ndarray
    n_messages: int
    warmup: int
    wait_samples: np.ndarray | None = None


@njit(cache=True)
def _lindley(gaps, services):  # pragma: no cover - compiled
    n = gaps.shape[0]
    wait = np.empty(n)
    systime = np.empty(n)
    wait[0] = 0.0
    systime[0] = services[0]
    for i in range(1, n):
        slack = systime[i - 1] - gaps[i]
        w = slack if slack > 0.0 else 0.0
        wait[i] = w
        systime[i] = w + services[i]
    return wait, systime


def _stage_stream(seed: int, stage: str) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence([seed, _STAGE_ID[stage]]))
    )


def _draw_stage(seed: int, stage: str, kind: StageKind, rate: float, n: int) -> np.ndarray:
    if kind is StageKind.DETERMINISTIC:
        return np.full(n, 1.0 / rate)
    return _stage_stream(seed, stage).exponential(1.0 / rate, n)


def _stage_times(config: SimConfig) -> tuple[np.ndarray, np.ndarray | None]:
    """Returns (gaps B, services S); S is None for the local scheme."""
    p, tm, n, seed = config.params, config.time_model, config.n_messages, config.seed
    if config.scheme is Scheme.LOCAL:
        return _draw_stage(seed, "local", tm.local, p.mu_l, n), None
    transmit = _draw_stage(seed, "transmit", StageKind.EXPONENTIAL, p.mu_t, n)
    services = _draw_stage(seed, "remote", tm.remote, p.mu_s, n)
    if config.scheme is Scheme.REMOTE:
        return transmit, services
    local = _draw_stage(seed, "local", tm.local, p.mu_l, n)
    return local + transmit, services


def _window_stats(gap: np.ndarray, systime: np.ndarray, batch_count: int):
    """Exact sawtooth area split into batch windows.

    Trapezoid i (i >= 1) spans the completions of messages i-1 and i:
    Q_i = T_i B_{i-1} + B_i B_{i-1} + B_{i-1}^2 / 2, plus a boundary
    correction ((B+T)_last^2 - (B+T)_first^2)/2 per window. Batch windows
    are contiguous trapezoid blocks, so areas and durations add up exactly
    to the full-window values.
    """
    q = systime[1:] * gap[:-1] + gap[1:] * gap[:-1] + 0.5 * gap[:-1] ** 2
    m = len(gap)
    bounds = (np.arange(batch_count + 1) * (m - 1)) // batch_count
    q_sums = np.add.reduceat(q, bounds[:-1])
    b_sums = np.add.reduceat(gap[1:], bounds[:-1])
    peak = gap[bounds] + systime[bounds]
    areas = q_sums + 0.5 * (peak[1:] ** 2 - peak[:-1] ** 2)
    taus = b_sums + systime[bounds[1:]] - systime[bounds[:-1]]
    return areas, taus


def simulate(config: SimConfig) -> SimResult:
    """Run the scheme and return the batch-means age estimate.

    Refuses unstable configurations (the age has no stationary mean there).
    """
    if config.scheme is not Scheme.LOCAL:
        require_stable(config.scheme, config.params)
    gap, services = _stage_times(config)
    if services is None:
        wait = np.zeros_like(gap)
        systime = np.zeros_like(gap)
    else:
        wait, systime = _lindley(gap, services)

    warm = config.resolved_warmup()
    gap_w, sys_w, wait_w = gap[warm:], systime[warm:], wait[warm:]
    areas, taus = _window_stats(gap_w, sys_w, config.batch_count)
    total_tau = float(np.sum(taus))
    if not math.isfinite(total_tau) or total_tau <= 0.0:
        raise RuntimeError("simulated clock overflowed or collapsed")
    mean_age = float(np.sum(areas)) / total_tau

    batch_means = areas / taus
    k = config.batch_count
    spread = float(np.std(batch_means, ddof=1))
    half = float(stats.t.ppf(0.5 + config.confidence / 2.0, k - 1) * spread / math.sqrt(k))
    return SimResult(
        aoi=AoiEstimate(mean_age, Method.SIMULATION, ci_halfwidth=half),
        mean_wait=float(np.mean(wait_w)),
        batch_means=batch_means,
        n_messages=config.n_messages,
        warmup=warm,
        wait_samples=wait_w.copy() if config.keep_wait_samples else None,
    )


def collect_wait_samples(config: SimConfig) -> np.ndarray:
    """Post-warmup waiting times, for distributional checks."""
    if config.scheme is Scheme.LOCAL:
        raise ValueError("the local scheme has no queueing stage")
    cfg = SimConfig(
        scheme=config.scheme,
        params=config.params,
        time_model=config.time_model,
        n_messages=config.n_messages,
        warmup=config.warmup,
        seed=config.seed,
        batch_count=config.batch_count,
        confidence=config.confidence,
        keep_wait_samples=True,
    )
    return simulate(cfg).wait_samples


def message_log(config: SimConfig) -> MessageLog:
    """Full per-message record columns (meant for modest n_messages)."""
    gap, services = _stage_times(config)
    n = config.n_messages
    if services is None:
        wait = np.zeros(n)
        systime = np.zeros(n)
        services = np.zeros(n)
        completed = np.cumsum(gap)
        generated = np.concatenate(([0.0], completed[:-1]))
        local_done = completed
        arrived = completed
    else:
        wait, systime = _lindley(gap, services)
        arrived = np.cumsum(gap)
        generated = np.concatenate(([0.0], arrived[:-1]))
        if config.scheme is Scheme.REMOTE:
            local_done = generated
        else:
            local_done = arrived - _draw_stage(
                config.seed, "transmit", StageKind.EXPONENTIAL, config.params.mu_t, n
            )
        completed = arrived + systime
    return MessageLog(
        generated=generated,
        local_done=local_done,
        arrived=arrived,
        completed=completed,
        gap=gap,
        system_time=systime,
        wait=wait,
        service=services,
    )


def accumulate_aoi(log: MessageLog) -> float:
    """Time-average age over the span between the log's first and last
    completion, from the exact trapezoid decomposition."""
    gap, systime = log.gap, log.system_time
    if len(gap) < 2:
        raise ValueError("need at least two messages to accumulate an age window")
    q = systime[1:] * gap[:-1] + gap[1:] * gap[:-1] + 0.5 * gap[:-1] ** 2
    area = float(np.sum(q)) + 0.5 * (
        (gap[-1] + systime[-1]) ** 2 - (gap[0] + systime[0]) ** 2
    )
    tau = float(np.sum(gap[1:])) + systime[-1] - systime[0]
    return area / tau
