"""Parameter sweeps, crossover search and analytic-vs-simulation validation.

A sweep is described by a small key=value spec file:

    var = l              # swept quantity: l | c | R | f_s | rho_s | mu_t
    lo = 0.1
    hi = 3.0
    points = 30
    scale = lin          # lin | log
    schemes = local,remote,partial
    time_model = exponential   # exponential | deterministic (compute stages)
    evaluator = analytic       # analytic | simulation | both
    alpha_grid = 512     # partial-split search grid
    messages = 1000000   # simulation evaluator only
    c = 1000             # fixed profile values (profile sweeps): l c R f_l f_s
    R = 0.5
    f_l = 1
    f_s = 9
    # rate sweeps (var = rho_s | mu_t) fix mu_l and mu_s instead

Profile sweeps evaluate the three schemes through the partition model
(partial with its optimal split); rate sweeps use the scaled-rates split
model with mu_t = rho_s * mu_s when rho_s is swept. Unstable points yield
rows with an empty value and stable=false. With evaluator=both each point
gets an analytic row plus a simulation row at the same configuration
(including the same optimized split), which is what validation plots want.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy.optimize import brentq

from .analytic import analytic_aoi
from .core import (
    AoiEstimate,
    Scheme,
    SchemeParams,
    StageKind,
    TaskProfile,
    TimeModel,
    UnstableSchemeError,
    check_stability,
)
from .partition import PartitionPoint, optimize_alpha, optimize_alpha_scaled
from .simulate import SimConfig, simulate

CSV_HEADER = "var,scheme,alpha,aoi_mean,aoi_ci,method,stable"

PROFILE_VARS = ("l", "c", "R", "f_s")
RATE_VARS = ("rho_s", "mu_t")
_PROFILE_FIELD = {
    "l": "message_bits",
    "c": "cycles",
    "R": "channel_rate",
    "f_l": "local_freq",
    "f_s": "remote_freq",
}


class SpecFormatError(ValueError):
    """Malformed sweep spec file."""


class NoCrossingError(ValueError):
    """The AoI difference does not change sign on the swept range."""


@dataclass(frozen=True)
class SweepSpec:
    var: str
    lo: float
    hi: float
    points: int
    scale: str = "lin"
    schemes: tuple[Scheme, ...] = (Scheme.LOCAL, Scheme.REMOTE, Scheme.PARTIAL)
    time_model: TimeModel = TimeModel.exponential()
    evaluator: str = "analytic"
    alpha_grid: int = 512
    messages: int = 1_000_000
    fixed: dict[str, float] | None = None

    def grid(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.lo, self.hi, self.points)
        return np.linspace(self.lo, self.hi, self.points)


_SPEC_KEYS = {
    "var", "lo", "hi", "points", "scale", "schemes", "time_model",
    "evaluator", "alpha_grid", "messages",
    "l", "c", "R", "f_l", "f_s", "mu_l", "mu_s",
}


def parse_spec(text: str) -> SweepSpec:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecFormatError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _SPEC_KEYS:
            raise SpecFormatError(f"line {lineno}: unknown key {key!r}")
        if key in pairs:
            raise SpecFormatError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise SpecFormatError(f"line {lineno}: empty value for {key!r}")
        pairs[key] = value

    for required in ("var", "lo", "hi", "points"):
        if required not in pairs:
            raise SpecFormatError(f"missing required key {required!r}")

    var = pairs.pop("var")
    if var not in PROFILE_VARS + RATE_VARS:
        raise SpecFormatError(f"var must be one of {PROFILE_VARS + RATE_VARS}, got {var!r}")

    def number(key: str, default: float | None = None) -> float | None:
        if key not in pairs:
            return default
        try:
            return float(pairs.pop(key))
        except ValueError:
            raise SpecFormatError(f"{key} must be a number, got {pairs[key]!r}") from None

    def integer(key: str, default: int) -> int:
        if key not in pairs:
            return default
        raw = pairs.pop(key)
        try:
            return int(raw)
        except ValueError:
            raise SpecFormatError(f"{key} must be an integer, got {raw!r}") from None

    lo, hi = number("lo"), number("hi")
    points = integer("points", 0)
    if not (lo > 0 and hi > lo):
        raise SpecFormatError("need 0 < lo < hi")
    if points < 2:
        raise SpecFormatError("points must be at least 2")

    scale = pairs.pop("scale", "lin")
    if scale not in ("lin", "log"):
        raise SpecFormatError(f"scale must be lin or log, got {scale!r}")

    try:
        schemes = tuple(
            Scheme(name.strip())
            for name in pairs.pop("schemes", "local,remote,partial").split(",")
        )
    except ValueError as exc:
        raise SpecFormatError(str(exc)) from None

    model_name = pairs.pop("time_model", "exponential")
    if model_name == "exponential":
        time_model = TimeModel.exponential()
    elif model_name == "deterministic":
        time_model = TimeModel.deterministic()
    else:
        raise SpecFormatError(f"time_model must be exponential or deterministic, got {model_name!r}")

    evaluator = pairs.pop("evaluator", "analytic")
    if evaluator not in ("analytic", "simulation", "both"):
        raise SpecFormatError(f"evaluator must be analytic, simulation or both, got {evaluator!r}")

    alpha_grid = integer("alpha_grid", 512)
    messages = integer("messages", 1_000_000)
    if alpha_grid < 2 or messages < 1000:
        raise SpecFormatError("alpha_grid must be >= 2 and messages >= 1000")

    fixed = {}
    for key in list(pairs):
        fixed[key] = number(key)
        if fixed[key] is not None and fixed[key] <= 0:
            raise SpecFormatError(f"{key} must be positive")

    needed = (
        {"mu_l", "mu_s"}
        if var in RATE_VARS
        else ({"l", "c", "R", "f_l", "f_s"} - {var})
    )
    missing = needed - set(fixed)
    if missing:
        raise SpecFormatError(f"var {var!r} needs fixed values for {sorted(missing)}")
    extra = set(fixed) - needed
    if extra:
        raise SpecFormatError(f"keys {sorted(extra)} do not apply when var is {var!r}")

    return SweepSpec(
        var=var, lo=lo, hi=hi, points=points, scale=scale, schemes=schemes,
        time_model=time_model, evaluator=evaluator, alpha_grid=alpha_grid,
        messages=messages, fixed=fixed,
    )


def load_spec(path) -> SweepSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_spec(fh.read())


def list_presets() -> list[str]:
    root = resources.files("aoi_mec").joinpath("presets")
    return sorted(p.name[: -len(".spec")] for p in root.iterdir() if p.name.endswith(".spec"))


def load_preset(name: str) -> SweepSpec:
    ref = resources.files("aoi_mec").joinpath("presets", f"{name}.spec")
    if not ref.is_file():
        raise SpecFormatError(
            f"unknown preset {name!r}; available: {', '.join(list_presets())}"
        )
    return parse_spec(ref.read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Point evaluation


@dataclass(frozen=True)
class SweepRow:
    var_value: float
    scheme: Scheme
    alpha: float | None
    aoi: float | None
    ci: float | None
    method: str
    stable: bool


def _point_config(spec: SweepSpec, value: float):
    """(scheme rates or profile) at one swept value.

    Returns (profile, params): exactly one of them is set. Rate sweeps give
    params for local/remote directly and the scaled-split base for partial.
    """
    if spec.var in PROFILE_VARS:
        kwargs = {_PROFILE_FIELD[k]: v for k, v in spec.fixed.items()}
        kwargs[_PROFILE_FIELD[spec.var]] = value
        return TaskProfile(**kwargs), None
    mu_l, mu_s = spec.fixed["mu_l"], spec.fixed["mu_s"]
    mu_t = value * mu_s if spec.var == "rho_s" else value
    return None, SchemeParams(mu_l=mu_l, mu_t=mu_t, mu_s=mu_s)


def _scheme_rates(profile: TaskProfile | None, params: SchemeParams | None) -> SchemeParams:
    if params is not None:
        return params
    from .partition import local_rate, remote_rates

    mu_t, mu_s = remote_rates(profile)
    return SchemeParams(mu_l=local_rate(profile), mu_t=mu_t, mu_s=mu_s)


def _derived_seed(seed: int, index: int, scheme: Scheme) -> int:
    ordinal = list(Scheme).index(scheme)
    return int(np.random.SeedSequence([seed, index, ordinal]).generate_state(1)[0])


def _simulate_at(spec: SweepSpec, params: SchemeParams, scheme: Scheme,
                 seed: int, messages: int) -> AoiEstimate:
    return simulate(
        SimConfig(scheme=scheme, params=params, time_model=spec.time_model,
                  n_messages=messages, seed=seed)
    ).aoi


def _optimize_partial(spec: SweepSpec, profile, base, evaluator: str,
                      seed: int, messages: int) -> PartitionPoint:
    kwargs = dict(evaluator=evaluator, grid_points=spec.alpha_grid,
                  messages=messages, seed=seed)
    if profile is not None:
        return optimize_alpha(profile, spec.time_model, **kwargs)
    return optimize_alpha_scaled(base, spec.time_model, **kwargs)


def _rows_for_point(spec: SweepSpec, index: int, value: float,
                    seed: int, messages: int) -> list[SweepRow]:
    profile, base = _point_config(spec, value)
    rows: list[SweepRow] = []
    methods = ("analytic", "simulation") if spec.evaluator == "both" else (spec.evaluator,)

    for scheme in spec.schemes:
        rates = _scheme_rates(profile, base)
        if scheme is not Scheme.PARTIAL:
            if not check_stability(scheme, rates).stable:
                rows.append(SweepRow(value, scheme, None, None, None, "", False))
                continue
            for method in methods:
                try:
                    est = (
                        analytic_aoi(scheme, rates, spec.time_model)
                        if method == "analytic"
                        else _simulate_at(spec, rates, scheme,
                                          _derived_seed(seed, index, scheme), messages)
                    )
                except UnstableSchemeError:
                    rows.append(SweepRow(value, scheme, None, None, None, "", False))
                    break
                rows.append(SweepRow(value, scheme, None, est.mean,
                                     est.ci_halfwidth, est.method.value, True))
            continue

        try:
            point = _optimize_partial(spec, profile, base, methods[0],
                                      _derived_seed(seed, index, scheme), messages)
        except UnstableSchemeError:
            rows.append(SweepRow(value, scheme, None, None, None, "", False))
            continue
        est = point.aoi
        rows.append(SweepRow(value, scheme, point.alpha, est.mean,
                             est.ci_halfwidth, est.method.value, True))
        if spec.evaluator == "both":
            sim_params = point.params if point.params is not None else rates
            sim_scheme = scheme if point.params is not None else (
                Scheme.LOCAL if point.alpha == 0.0 else Scheme.REMOTE
            )
            est2 = _simulate_at(spec, sim_params, sim_scheme,
                                _derived_seed(seed, index, scheme) + 1, messages)
            rows.append(SweepRow(value, scheme, point.alpha, est2.mean,
                                 est2.ci_halfwidth, est2.method.value, True))
    return rows


def run_sweep(spec: SweepSpec, *, seed: int = 0, messages: int | None = None,
              workers: int = 1) -> list[SweepRow]:
    """Evaluate the sweep; rows come back in ascending swept-value order
    (scheme order within a point as listed in the spec)."""
    msgs = messages if messages is not None else spec.messages
    values = spec.grid()
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(
                pool.map(lambda iv: _rows_for_point(spec, iv[0], float(iv[1]), seed, msgs),
                         enumerate(values))
            )
    else:
        chunks = [_rows_for_point(spec, i, float(v), seed, msgs)
                  for i, v in enumerate(values)]
    return [row for chunk in chunks for row in chunk]


def _fmt(x: float | None) -> str:
    return "" if x is None else f"{x:.9g}"


def write_csv(rows: list[SweepRow], out) -> None:
    """CSV with 9 significant digits; `out` is a path or a text file object."""
    own = isinstance(out, (str, bytes)) or hasattr(out, "__fspath__")
    fh = open(out, "w", encoding="utf-8", newline="") if own else out
    try:
        fh.write(CSV_HEADER + "\n")
        for r in rows:
            fh.write(
                f"{_fmt(r.var_value)},{r.scheme.value},{_fmt(r.alpha)},"
                f"{_fmt(r.aoi)},{_fmt(r.ci)},{r.method},"
                f"{'true' if r.stable else 'false'}\n"
            )
    finally:
        if own:
            fh.close()


def rows_to_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Crossover


@dataclass(frozen=True)
class CrossoverResult:
    var: str
    value: float
    bracket: tuple[float, float]
    tol: float
    scheme_a: Scheme
    scheme_b: Scheme


def _analytic_value(spec: SweepSpec, scheme: Scheme, value: float) -> float | None:
    profile, base = _point_config(spec, value)
    rates = _scheme_rates(profile, base)
    if scheme is Scheme.PARTIAL:
        try:
            return _optimize_partial(spec, profile, base, "analytic", 0, 0).aoi.mean
        except UnstableSchemeError:
            return None
    if not check_stability(scheme, rates).stable:
        return None
    try:
        return analytic_aoi(scheme, rates, spec.time_model).mean
    except UnstableSchemeError:
        return None


def find_crossover(scheme_a: Scheme, scheme_b: Scheme, spec: SweepSpec,
                   tol: float = 1e-4) -> CrossoverResult:
    """Swept value where the two schemes' analytic AoI curves cross.

    Scans the spec grid (points where both schemes are stable) for sign
    changes of the difference and refines the rightmost one by bracketed
    root search to relative tolerance `tol`. The rightmost change is the
    one usually quoted for 'until where does offloading help' questions;
    ranges that also contain the near-instability crossing keep both visible
    in the sweep output.
    """
    scheme_a, scheme_b = Scheme(scheme_a), Scheme(scheme_b)
    diffs: list[tuple[float, float]] = []
    for v in spec.grid():
        a = _analytic_value(spec, scheme_a, float(v))
        b = _analytic_value(spec, scheme_b, float(v))
        if a is not None and b is not None:
            diffs.append((float(v), a - b))

    bracket: tuple[float, float] | None = None
    for (v0, d0), (v1, d1) in zip(diffs[:-1], diffs[1:]):
        if d0 == 0.0 or d0 * d1 < 0.0:
            bracket = (v0, v1)
    if bracket is None:
        if diffs and diffs[-1][1] == 0.0:
            v = diffs[-1][0]
            return CrossoverResult(spec.var, v, (v, v), tol, scheme_a, scheme_b)
        raise NoCrossingError(
            f"{scheme_a.value} and {scheme_b.value} AoI curves do not cross "
            f"for {spec.var} in [{spec.lo:g}, {spec.hi:g}]"
        )

    f = lambda v: (_analytic_value(spec, scheme_a, v) or math.nan) - (
        _analytic_value(spec, scheme_b, v) or math.nan
    )
    root = brentq(f, bracket[0], bracket[1], rtol=tol, xtol=tol * bracket[0] * 1e-3)
    return CrossoverResult(spec.var, float(root), bracket, tol, scheme_a, scheme_b)


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class ValidationCase:
    scheme: Scheme
    params: SchemeParams
    time_model: TimeModel


@dataclass(frozen=True)
class ValidationRow:
    case: ValidationCase
    analytic: float
    simulated: float
    ci: float
    passed: bool


@dataclass(frozen=True)
class ValidationReport:
    rows: list[ValidationRow]
    ok: bool

    def lines(self) -> list[str]:
        out = []
        for r in self.rows:
            c = r.case
            model = "exp" if c.time_model.local is StageKind.EXPONENTIAL else "det"
            out.append(
                f"{'PASS' if r.passed else 'FAIL'} {c.scheme.value:<7} {model} "
                f"mu=({c.params.mu_l:g},{c.params.mu_t:g},{c.params.mu_s:g}) "
                f"analytic={r.analytic:.6g} simulated={r.simulated:.6g} "
                f"ci={r.ci:.2g}"
            )
        out.append(f"{'OK' if self.ok else 'FAILED'}: "
                   f"{sum(r.passed for r in self.rows)}/{len(self.rows)} within CI")
        return out


def default_validation_grid(model: str = "exponential") -> list[ValidationCase]:
    """3-value rate grid per stage, restricted to stable combinations,
    plus a handful of deterministic cases covering each analytic branch."""
    cases: list[ValidationCase] = []
    levels = (0.3, 1.0, 3.0)
    exp = TimeModel.exponential()
    det = TimeModel.deterministic()
    if model in ("exponential", "both"):
        for mu_l in levels:
            cases.append(ValidationCase(Scheme.LOCAL, SchemeParams(mu_l, 1.0, 1.0), exp))
        for mu_t in levels:
            for mu_s in levels:
                if check_stability(Scheme.REMOTE, SchemeParams(1.0, mu_t, mu_s)).margin > 0.05:
                    cases.append(
                        ValidationCase(Scheme.REMOTE, SchemeParams(1.0, mu_t, mu_s), exp)
                    )
        for mu_l in levels:
            for mu_t in levels:
                for mu_s in levels:
                    p = SchemeParams(mu_l, mu_t, mu_s)
                    if check_stability(Scheme.PARTIAL, p).margin > 0.05:
                        cases.append(ValidationCase(Scheme.PARTIAL, p, exp))
    if model in ("deterministic", "both"):
        cases.append(ValidationCase(Scheme.LOCAL, SchemeParams(1.0, 1.0, 1.0), det))
        cases.append(ValidationCase(Scheme.REMOTE, SchemeParams(1.0, 0.5, 1.0), det))
        cases.append(ValidationCase(Scheme.PARTIAL, SchemeParams(1.0, 1.0, 2.0), det))
        cases.append(ValidationCase(Scheme.PARTIAL, SchemeParams(2.0, 0.5, 1.0), det))
    return cases


def validate(cases: list[ValidationCase] | None = None, *, messages: int = 1_000_000,
             seed: int = 0, confidence: float = 0.99) -> ValidationReport:
    """Simulate every case and check the analytic value sits inside the
    simulation confidence interval."""
    if cases is None:
        cases = default_validation_grid()
    rows = []
    for i, case in enumerate(cases):
        analytic = analytic_aoi(case.scheme, case.params, case.time_model).mean
        result = simulate(
            SimConfig(scheme=case.scheme, params=case.params, time_model=case.time_model,
                      n_messages=messages, seed=_derived_seed(seed, i, case.scheme),
                      confidence=confidence)
        )
        gap = abs(analytic - result.aoi.mean)
        tol = max(result.aoi.ci_halfwidth, 1e-12 * analytic)
        rows.append(ValidationRow(case, analytic, result.aoi.mean,
                                  result.aoi.ci_halfwidth, gap <= tol))
    return ValidationReport(rows, all(r.passed for r in rows))
