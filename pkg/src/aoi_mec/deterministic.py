"""Mean age for deterministic compute times (exponential transmission).

Local is again a renewal sawtooth. Remote is an M/D/1 queue at the edge
server. Partial is a GI/D/1 queue whose inter-arrival time is a constant
plus an exponential; its Lindley recursion

    W' = (W + 1/mu_s - 1/mu_l - Y)+

collapses to W == 0 when mu_s >= mu_l, and otherwise is exactly the
recursion of an M/D/1 queue with service time 1/mu_s - 1/mu_l, i.e.
service rate mu = mu_l*mu_s/(mu_l - mu_s) and utilization rho = mu_t/mu.

The stationary M/D/1 waiting time has an atom 1-rho at zero plus a
continuous density on (0, inf); both come from the classical alternating
series over k <= floor(w*mu). The series terms grow like exp(theta*w*mu)
while the result stays bounded, so float64 summation is used only while the
largest term is small enough for the requested absolute accuracy, and an
exact mpmath summation takes over beyond that.

Mean-age values are double integrals (over the previous inter-arrival gap
and the waiting time). They are evaluated as nested adaptive quadratures
with forced breakpoints at every kink: the waiting density is only piecewise
smooth (breakpoints at multiples of the service time), the conditional wait
switches regimes where the gap equals one service time, and the moving inner
limit drags those kinks into the outer integrand.
"""

from __future__ import annotations

import math
import warnings
from bisect import bisect_right

import numpy as np
from mpmath import mp
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq
from scipy.special import gammaln

from .core import (
    AoiEstimate,
    Method,
    QuadratureError,
    Scheme,
    SchemeParams,
    UnstableSchemeError,
    require_stable,
)

INNER_TOL = 1e-8  # absolute, waiting-time integrals
OUTER_TOL = 1e-6  # absolute, gap integrals
TAIL_EPS = 1e-12  # waiting-time tail mass kept out of the integration range
_KINK_EPS = 1e-14  # forced-breakpoint strength cap (kink size decays like rho^k)
_F64_EPS = 2.3e-16
_CHEB_DEG = 16


def _expected_slack(a: float, rate: float) -> float:
    """E[(a - Y)+] for Y ~ exp(rate); zero when the region is empty (a <= 0)."""
    if a <= 0.0:
        return 0.0
    # a - (1 - exp(-rate*a))/rate, written via expm1 for small rate*a
    return a + math.expm1(-rate * a) / rate


# ---------------------------------------------------------------------------
# Alternating waiting-time series (t = w * mu is dimensionless)


def _cdf_series_f64(t: float, rho: float) -> tuple[float, float, int]:
    """float64 value of S(t) = sum_k (rho^k/k!)(k-t)^k e^{rho(t-k)}.

    Returns (value, largest |term|, term count) so the caller can judge
    cancellation. F(w) = (1 - rho) * S(w*mu).
    """
    kmax = int(math.floor(t))
    lm0 = rho * t
    if kmax < 1:
        return math.exp(lm0), math.exp(lm0), 1
    ks = np.arange(1.0, kmax + 1.0)
    x = t - ks
    with np.errstate(divide="ignore", invalid="ignore"):
        lm = ks * math.log(rho) - gammaln(ks + 1.0) + ks * np.log(x) + rho * x
    lm = np.where(x > 0.0, lm, -np.inf)  # the k == t term vanishes
    signs = np.where(ks % 2.0 == 0.0, 1.0, -1.0)
    top = max(lm0, float(np.max(lm)))
    s = math.exp(lm0 - top) + float(np.sum(signs * np.exp(lm - top)))
    return s * math.exp(top), math.exp(top), kmax + 1


def _cdf_series_mp(t: float, rho: float, dps: int) -> float:
    with mp.workdps(dps):
        tt, rr = mp.mpf(t), mp.mpf(rho)
        total = mp.exp(rr * tt)
        for k in range(1, int(math.floor(t)) + 1):
            x = tt - k
            total += rr**k / mp.factorial(k) * (-x) ** k * mp.exp(rr * x)
        return float(total)


def _pdf_series_f64(t: float, rho: float, mu: float) -> tuple[float, float, int]:
    """float64 value of the density series (without the 1-rho factor)."""
    kmax = int(math.floor(t))
    lm0 = math.log(mu * rho) + rho * t
    if kmax < 1:
        return math.exp(lm0), math.exp(lm0), 1
    ks = np.arange(1.0, kmax + 1.0)
    x = t - ks
    xs = np.where(x > 0.0, x, 1.0)  # placeholder; masked below
    with np.errstate(divide="ignore", invalid="ignore"):
        lm = (
            math.log(mu)
            + ks * math.log(rho)
            - gammaln(ks + 1.0)
            + rho * x
            + (ks - 1.0) * np.log(xs)
            + np.log(rho * x + ks)
        )
    # at x == 0 only the k == 1 term survives (the density jump at w = 1/mu)
    lm = np.where((x <= 0.0) & (ks >= 2.0), -np.inf, lm)
    signs = np.where(ks % 2.0 == 0.0, 1.0, -1.0)
    top = max(lm0, float(np.max(lm)))
    s = math.exp(lm0 - top) + float(np.sum(signs * np.exp(lm - top)))
    return s * math.exp(top), math.exp(top), kmax + 1


def _pdf_series_mp(t: float, rho: float, mu: float, dps: int) -> float:
    with mp.workdps(dps):
        tt, rr = mp.mpf(t), mp.mpf(rho)
        total = mu * rr * mp.exp(rr * tt)
        for k in range(1, int(math.floor(t)) + 1):
            x = tt - k
            total += (
                rr**k
                / mp.factorial(k)
                * mu
                * mp.exp(rr * x)
                * (-x) ** (k - 1)
                * (rr * (-x) - k)
            )
        return float(total)


def _mp_digits(top: float, abs_target: float) -> int:
    return max(25, int((math.log(top) - math.log(abs_target)) / math.log(10.0)) + 10)


_TAIL_SWITCH = 1e-6  # complement size below which the complement form takes over


def _cdf_value(t: float, rho: float, abs_target: float = 1e-10) -> float:
    if t < 0.0:
        return 0.0
    value, top, n = _cdf_series_f64(t, rho)
    scaled = (1.0 - rho) * value
    if top * _F64_EPS * n > abs_target or scaled > 1.0 - _TAIL_SWITCH:
        # past the noise gate the float64 sum is unusable outright; near 1 its
        # noise floor exceeds the true increments and would break monotonicity.
        # the complement form is exact to ~1e-14 absolute (~1e-12 relative at
        # the TAIL_EPS truncation level), so cdf values stay nondecreasing
        scaled = 1.0 - _complement_value(t, rho)
    return min(max(scaled, 0.0), 1.0)


def _pdf_value(t: float, rho: float, mu: float, abs_target: float) -> float:
    if t <= 0.0:
        return 0.0
    value, top, n = _pdf_series_f64(t, rho, mu)
    if top * _F64_EPS * n > abs_target:
        value = _pdf_series_mp(t, rho, mu, _mp_digits(top, abs_target))
    return max((1.0 - rho) * value, 0.0)


def _complement_value(t: float, rho: float) -> float:
    """1 - F to 1e-14 absolute, for tail-cutoff searches."""
    value, top, n = _cdf_series_f64(t, rho)
    if top * _F64_EPS * n <= 1e-15:
        return 1.0 - (1.0 - rho) * value
    dps = _mp_digits(top, 1e-16)
    with mp.workdps(dps):
        tt, rr = mp.mpf(t), mp.mpf(rho)
        total = mp.exp(rr * tt)
        for k in range(1, int(math.floor(t)) + 1):
            x = tt - k
            total += rr**k / mp.factorial(k) * (-x) ** k * mp.exp(rr * x)
        return float(1 - (1 - rr) * total)


class WaitDistribution:
    """Stationary waiting time of an M/D/1-type queue.

    Mixed distribution: probability mass 1-rho at exactly zero plus a
    continuous density on (0, inf). `expect` integrates a function against
    this mixed measure with the atom handled explicitly and the density
    integrated piecewise between its breakpoints (multiples of the service
    time), truncated where the remaining tail mass is below TAIL_EPS.
    """

    def __init__(self, arrival_rate: float, service_rate: float):
        if arrival_rate <= 0 or service_rate <= 0:
            raise ValueError("rates must be positive")
        rho = arrival_rate / service_rate
        if rho >= 1.0 - 1e-9:
            raise UnstableSchemeError(
                f"waiting-time distribution undefined at utilization {rho:.6g}"
            )
        self.arrival_rate = arrival_rate
        self.mu = service_rate
        self.rho = rho
        self.atom_at_zero = 1.0 - rho
        self._cutoff: float | None = None
        self._interp: tuple[np.ndarray, np.ndarray] | None = None

    # -- point evaluation ---------------------------------------------------

    def cdf(self, w):
        if np.ndim(w) > 0:
            return np.array([self.cdf(float(x)) for x in np.asarray(w).ravel()]).reshape(
                np.shape(w)
            )
        x = float(w)
        # past the cutoff the complement is < TAIL_EPS by construction, and
        # the alternating series would need huge working precision out there
        if x >= self.tail_cutoff():
            return 1.0
        return _cdf_value(x * self.mu, self.rho)

    def density(self, w):
        """Continuous part only; the atom at zero is `atom_at_zero`."""
        if np.ndim(w) > 0:
            return np.array(
                [self.density(float(x)) for x in np.asarray(w).ravel()]
            ).reshape(np.shape(w))
        x = float(w)
        if x >= self.tail_cutoff():
            return 0.0
        return _pdf_value(x * self.mu, self.rho, self.mu, self._pdf_target())

    def _pdf_target(self) -> float:
        return 1e-11 * self.mu

    # -- support geometry ----------------------------------------------------

    def tail_cutoff(self, eps: float = TAIL_EPS) -> float:
        """Smallest breakpoint-aligned w with P(W > w) < eps (cached)."""
        if self._cutoff is None:
            # asymptotic decay exponent: rho*(e^theta - 1) = theta
            g = lambda th: self.rho * math.expm1(th) - th
            hi = 1.0
            while g(hi) < 0.0:
                hi *= 2.0
            theta = brentq(g, 1e-12, hi, xtol=1e-12)
            t = max(1.0, (-math.log(eps * (1.0 - self.rho)) + 3.0) / theta)
            while _complement_value(t, self.rho) >= eps:
                t *= 1.3
            self._cutoff = math.ceil(t) / self.mu
        return self._cutoff

    def breakpoints(self) -> np.ndarray:
        """Density kinks k/mu inside (0, cutoff]."""
        t_max = self.tail_cutoff() * self.mu
        return np.arange(1.0, math.floor(t_max + 0.5) + 0.5) / self.mu

    # -- integration ----------------------------------------------------------

    def _interpolant(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-piece Chebyshev fits of the density, built once.

        Quadrature evaluates the density thousands of times; fitting each
        smooth piece once (with the exact hybrid evaluator, extended
        precision where needed) makes every later evaluation cheap without
        giving up accuracy.
        """
        if self._interp is None:
            edges = np.concatenate(([0.0], self.breakpoints()))
            target = self._pdf_target()
            coeffs = np.empty((len(edges) - 1, _CHEB_DEG + 1))
            for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
                f = np.vectorize(
                    lambda x: _pdf_value(
                        (0.5 * (a + b) + 0.5 * (b - a) * x) * self.mu,
                        self.rho,
                        self.mu,
                        target,
                    )
                )
                coeffs[i] = np.polynomial.chebyshev.chebinterpolate(f, _CHEB_DEG)
            self._interp = (edges, coeffs)
        return self._interp

    def _density_fast(self, w: float) -> float:
        edges, coeffs = self._interpolant()
        if w <= 0.0 or w >= edges[-1]:
            return 0.0
        i = bisect_right(edges, w) - 1
        a, b = edges[i], edges[i + 1]
        x = 2.0 * (w - a) / (b - a) - 1.0
        return float(np.polynomial.chebyshev.chebval(x, coeffs[i]))

    def expect(self, g, lower: float = 0.0, include_atom: bool = True,
               tol: float = INNER_TOL) -> float:
        """Integral of g against the waiting-time measure on [lower, inf).

        The atom contributes atom * g(0) when lower <= 0 and include_atom
        is set; the density part is integrated piece by piece.
        """
        total = 0.0
        if include_atom and lower <= 0.0:
            total += self.atom_at_zero * g(0.0)
        lo = max(lower, 0.0)
        hi = self.tail_cutoff()
        if lo >= hi:
            return total
        cuts = self.breakpoints()
        edges = [lo] + [float(c) for c in cuts if lo < c < hi] + [hi]
        return total + _piecewise_quad(lambda w: self._density_fast(w) * g(w), edges, tol)


def _piecewise_quad(fn, edges, tol: float) -> float:
    pieces = [(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    per = tol / max(len(pieces), 1)
    total = 0.0
    err = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        for a, b in pieces:
            try:
                val, e = quad(fn, a, b, epsabs=per, epsrel=1e-9, limit=200)
            except IntegrationWarning as exc:  # pragma: no cover - defensive
                raise QuadratureError(f"quadrature failed on [{a:.6g}, {b:.6g}]: {exc}")
            total += val
            err += e
    if err > 100.0 * tol:  # pragma: no cover - defensive
        raise QuadratureError(f"accumulated quadrature error {err:.2e} too large")
    return total


def md1_wait_distribution(mu_arr: float, mu_srv: float) -> WaitDistribution:
    return WaitDistribution(mu_arr, mu_srv)


def md1_wait_cdf(w: float, mu_arr: float, mu_srv: float) -> float:
    """P(W <= w) for the stationary M/D/1 wait (arrival mu_arr, service mu_srv)."""
    if mu_arr <= 0 or mu_srv <= 0:
        raise ValueError("rates must be positive")
    rho = mu_arr / mu_srv
    if rho >= 1.0 - 1e-9:
        raise UnstableSchemeError(f"M/D/1 wait undefined at utilization {rho:.6g}")
    if w < 0.0:
        return 0.0
    return _cdf_value(w * mu_srv, rho)


# ---------------------------------------------------------------------------
# Scheme-level values


def aoi_local(mu_l: float) -> AoiEstimate:
    """Mean age 3/(2 mu_l): deterministic sawtooth with period 1/mu_l."""
    if not (mu_l > 0 and math.isfinite(mu_l)):
        raise ValueError("mu_l must be positive and finite")
    return AoiEstimate(1.5 / mu_l, Method.CLOSED_FORM)


def cond_wait_remote(y: float, mu_t: float, mu_s: float,
                     wait: WaitDistribution | None = None) -> float:
    """E[W_i | previous transmission time = y] under the remote scheme.

    Conditioning on the previous inter-arrival gap y, the previous system
    time T either ended before the next arrival (T <= y, the new wait is a
    fresh (s - Y)+ race) or ran past it (the new wait is T - y + s - Y,
    clipped at zero and averaged over Y). s = 1/mu_s is the service time.
    """
    if y < 0.0:
        raise ValueError("gap must be nonnegative")
    if wait is None:
        wait = md1_wait_distribution(mu_t, mu_s)
    s = 1.0 / mu_s
    split = y - s
    slack_s = _expected_slack(s, mu_t)
    g = lambda w: _expected_slack(w + 2.0 * s - y, mu_t)
    if split >= 0.0:
        # mass of W on [0, split] (atom included) sees the fresh race
        return wait.cdf(split) * slack_s + wait.expect(g, lower=split, include_atom=False)
    return wait.expect(g, lower=0.0, include_atom=True)


def _kink_edges(start: float, step: float, rho: float, hi: float) -> list[float]:
    """Outer-integrand kinks start + k*step, capped where their size (~rho^k)
    drops below _KINK_EPS; beyond that the integrand is effectively smooth."""
    k_cap = int(math.log(_KINK_EPS) / math.log(rho)) + 1 if rho < 1.0 else 10**6
    edges = []
    x = start
    k = 0
    while x < hi and k <= k_cap:
        edges.append(x)
        x += step
        k += 1
    return edges


def _weight_cutoff(h, peak_x: float, ratio: float = 1e-12) -> float:
    """Point beyond the peak where the outer weight falls to ratio * peak."""
    target = h(peak_x) * ratio
    lo, hi = peak_x, peak_x * 2.0 + 1.0
    while h(hi) >= target:
        lo, hi = hi, hi * 2.0
    return brentq(lambda x: h(x) - target, lo, hi, xtol=1e-9 * hi)


def aoi_remote(mu_t: float, mu_s: float) -> AoiEstimate:
    """Mean age of the remote scheme with deterministic service (M/D/1).

    mu_t * (E[Y * E[W|Y]] + 1/(mu_t mu_s) + 2/mu_t^2), the gap expectation
    taken by adaptive quadrature against the exponential gap density.
    """
    require_stable(Scheme.REMOTE, SchemeParams(1.0, mu_t, mu_s))
    wait = md1_wait_distribution(mu_t, mu_s)
    s = 1.0 / mu_s

    def integrand(y: float) -> float:
        return y * cond_wait_remote(y, mu_t, mu_s, wait) * mu_t * math.exp(-mu_t * y)

    h = lambda y: y * math.exp(-mu_t * y)
    y_max = _weight_cutoff(h, 1.0 / mu_t)
    edges = [0.0] + _kink_edges(s, s, wait.rho, y_max) + [y_max]
    e_wy = _piecewise_quad(integrand, sorted(set(edges)), OUTER_TOL)
    mean = mu_t * (e_wy + 1.0 / (mu_t * mu_s) + 2.0 / mu_t**2)
    return AoiEstimate(mean, Method.QUADRATURE)


def _cond_wait_partial(b: float, mu_l: float, mu_t: float, mu_s: float,
                       wait: WaitDistribution) -> float:
    """E[W_i | previous inter-arrival gap = b] under the partial scheme.

    Same two regimes as the remote case, except each new arrival is a
    constant 1/mu_l behind its generation, so the race slack shrinks by
    1/mu_l; the empty-region case (argument <= 0) contributes exactly zero
    via _expected_slack.
    """
    s = 1.0 / mu_s
    split = b - s
    slack = _expected_slack(s - 1.0 / mu_l, mu_t)
    g = lambda w: _expected_slack(w + 2.0 * s - 1.0 / mu_l - b, mu_t)
    if split >= 0.0:
        return wait.cdf(split) * slack + wait.expect(g, lower=split, include_atom=False)
    return wait.expect(g, lower=0.0, include_atom=True)


def _partial_base_terms(mu_l: float, mu_t: float, mu_s: float) -> float:
    # E[T]E[B]-cross, gap autocovariance and half second moment, assembled:
    # 1/(mu_s mu_l) + 1/(mu_s mu_t) + 3/(2 mu_l^2) + 3/(mu_l mu_t) + 2/mu_t^2
    return (
        1.0 / (mu_s * mu_l)
        + 1.0 / (mu_s * mu_t)
        + 1.5 / mu_l**2
        + 3.0 / (mu_l * mu_t)
        + 2.0 / mu_t**2
    )


def aoi_partial(params: SchemeParams) -> AoiEstimate:
    """Mean age of the partial scheme with deterministic compute stages.

    When mu_s >= mu_l the server finishes each update before the next one
    can arrive (the wait is identically zero) and the age is closed-form.
    Otherwise the wait follows the equivalent M/D/1 law with service rate
    mu_l*mu_s/(mu_l - mu_s) and the gap-wait cross term is integrated
    numerically.
    """
    require_stable(Scheme.PARTIAL, params)
    mu_l, mu_t, mu_s = params.mu_l, params.mu_t, params.mu_s
    prefactor = mu_l * mu_t / (mu_l + mu_t)
    base = _partial_base_terms(mu_l, mu_t, mu_s)
    if mu_s >= mu_l:
        return AoiEstimate(prefactor * base, Method.CLOSED_FORM)

    mu_eq = mu_l * mu_s / (mu_l - mu_s)
    wait = md1_wait_distribution(mu_t, mu_eq)
    lo = 1.0 / mu_l
    s = 1.0 / mu_s

    def integrand(b: float) -> float:
        return (
            b
            * _cond_wait_partial(b, mu_l, mu_t, mu_s, wait)
            * mu_t
            * math.exp(-mu_t * (b - lo))
        )

    h = lambda b: b * math.exp(-mu_t * (b - lo))
    b_max = _weight_cutoff(h, max(lo, 1.0 / mu_t))
    edges = [lo] + _kink_edges(s, 1.0 / mu_eq, wait.rho, b_max) + [b_max]
    e_wb = _piecewise_quad(integrand, sorted(set(edges)), OUTER_TOL)
    return AoiEstimate(prefactor * (e_wb + base), Method.QUADRATURE)
