"""Command line interface.

Subcommands:
    analytic        one closed-form / quadrature age value
    simulate        one discrete-event run with a confidence interval
    sweep           evaluate a sweep spec (or preset) to CSV
    optimize-alpha  best partition fraction for a task profile
    crossover       swept value where two schemes' age curves cross
    validate        analytic-vs-simulation agreement over a default grid

Exit codes: 0 success, 1 a validation/search failure, 2 malformed input,
3 unstable configuration requested without --allow-unstable-rows.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .analytic import analytic_aoi
from .core import (
    Scheme,
    SchemeParams,
    TaskProfile,
    TimeModel,
    UnstableSchemeError,
)
from .partition import optimize_alpha
from .simulate import SimConfig, simulate
from .sweep import (
    NoCrossingError,
    SpecFormatError,
    default_validation_grid,
    find_crossover,
    list_presets,
    load_preset,
    load_spec,
    run_sweep,
    validate,
    write_csv,
)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_BAD_INPUT = 2
EXIT_UNSTABLE = 3


def _time_model(name: str) -> TimeModel:
    return TimeModel.exponential() if name == "exponential" else TimeModel.deterministic()


def _add_rates(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mu-l", type=float, default=1.0, help="local compute rate")
    p.add_argument("--mu-t", type=float, default=1.0, help="transmit rate")
    p.add_argument("--mu-s", type=float, default=1.0, help="remote compute rate")
    p.add_argument("--scheme", required=True, choices=[s.value for s in Scheme])
    p.add_argument("--time-model", default="exponential",
                   choices=["exponential", "deterministic"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aoi-mec",
        description="Average age of information under local, remote and partial offloading.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="base RNG seed")
    common.add_argument("--messages", type=int, default=None,
                        help="simulated messages (where simulation is involved)")
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--spec", default=None, help="sweep spec file")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", parents=[common], help="analytic age value")
    _add_rates(p)

    p = sub.add_parser("simulate", parents=[common], help="one simulation run")
    _add_rates(p)
    p.add_argument("--warmup", type=int, default=None)
    p.add_argument("--batches", type=int, default=30)

    p = sub.add_parser("sweep", parents=[common], help="run a sweep spec")
    p.add_argument("--preset", default=None,
                   help="bundled spec name (see --list-presets)")
    p.add_argument("--list-presets", action="store_true")
    p.add_argument("--allow-unstable-rows", action="store_true",
                   help="emit unstable points as empty rows instead of failing")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("optimize-alpha", parents=[common],
                       help="optimal partition fraction for a task profile")
    p.add_argument("--l", type=float, required=True, help="message size [Mbit]")
    p.add_argument("--c", type=float, required=True, help="compute demand [Megacycle]")
    p.add_argument("--R", type=float, required=True, help="channel rate [Mbit/s]")
    p.add_argument("--f-l", type=float, required=True, help="source CPU [GHz]")
    p.add_argument("--f-s", type=float, required=True, help="edge CPU [GHz]")
    p.add_argument("--time-model", default="exponential",
                   choices=["exponential", "deterministic"])
    p.add_argument("--evaluator", default="analytic", choices=["analytic", "simulation"])
    p.add_argument("--alpha-grid", type=int, default=512)

    p = sub.add_parser("crossover", parents=[common],
                       help="where two schemes' age curves cross")
    p.add_argument("--a", required=True, choices=[s.value for s in Scheme])
    p.add_argument("--b", required=True, choices=[s.value for s in Scheme])
    p.add_argument("--preset", default=None)
    p.add_argument("--tol", type=float, default=1e-4)

    p = sub.add_parser("validate", parents=[common],
                       help="check simulation against the analytic values")
    p.add_argument("--time-model", default="exponential",
                   choices=["exponential", "deterministic", "both"])
    p.add_argument("--confidence", type=float, default=0.99)

    return parser


def _emit(text: str, out: str | None) -> None:
    if out is None:
        print(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def _load_sweep_spec(args) -> "SweepSpec":
    if getattr(args, "preset", None):
        return load_preset(args.preset)
    if args.spec:
        return load_spec(args.spec)
    raise SpecFormatError("need --spec FILE or --preset NAME")


def _cmd_analytic(args) -> int:
    params = SchemeParams(args.mu_l, args.mu_t, args.mu_s)
    est = analytic_aoi(Scheme(args.scheme), params, _time_model(args.time_model))
    _emit(f"aoi_mean={est.mean:.9g} method={est.method.value}", args.out)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    config = SimConfig(
        scheme=Scheme(args.scheme),
        params=SchemeParams(args.mu_l, args.mu_t, args.mu_s),
        time_model=_time_model(args.time_model),
        n_messages=args.messages or 1_000_000,
        warmup=args.warmup,
        seed=args.seed,
        batch_count=args.batches,
    )
    result = simulate(config)
    _emit(
        f"aoi_mean={result.aoi.mean:.9g} aoi_ci={result.aoi.ci_halfwidth:.3g} "
        f"mean_wait={result.mean_wait:.9g} messages={result.n_messages}",
        args.out,
    )
    return EXIT_OK


def _cmd_sweep(args) -> int:
    if args.list_presets:
        _emit("\n".join(list_presets()), args.out)
        return EXIT_OK
    spec = _load_sweep_spec(args)
    rows = run_sweep(spec, seed=args.seed, messages=args.messages, workers=args.workers)
    if not args.allow_unstable_rows and any(not r.stable for r in rows):
        bad = sorted({r.var_value for r in rows if not r.stable})
        print(
            f"error: {len(bad)} swept point(s) are unstable "
            f"(first at {spec.var}={bad[0]:.6g}); rerun with --allow-unstable-rows "
            "to emit them as empty rows",
            file=sys.stderr,
        )
        return EXIT_UNSTABLE
    if args.out is None:
        from .sweep import rows_to_csv

        sys.stdout.write(rows_to_csv(rows))
    else:
        write_csv(rows, args.out)
    return EXIT_OK


def _cmd_optimize_alpha(args) -> int:
    profile = TaskProfile(
        message_bits=args.l, cycles=args.c, channel_rate=args.R,
        local_freq=args.f_l, remote_freq=args.f_s,
    )
    point = optimize_alpha(
        profile, _time_model(args.time_model), args.evaluator,
        grid_points=args.alpha_grid, messages=args.messages or 200_000, seed=args.seed,
    )
    rates = (
        f" mu_l={point.params.mu_l:.9g} mu_t={point.params.mu_t:.9g} "
        f"mu_s={point.params.mu_s:.9g}"
        if point.params is not None
        else ""
    )
    _emit(
        f"alpha={point.alpha:.9g} aoi_mean={point.aoi.mean:.9g} "
        f"method={point.aoi.method.value}{rates}",
        args.out,
    )
    return EXIT_OK


def _cmd_crossover(args) -> int:
    spec = _load_sweep_spec(args)
    result = find_crossover(Scheme(args.a), Scheme(args.b), spec, tol=args.tol)
    _emit(
        f"{result.var}={result.value:.9g} bracket=[{result.bracket[0]:.9g},"
        f"{result.bracket[1]:.9g}] tol={result.tol:g}",
        args.out,
    )
    return EXIT_OK


def _cmd_validate(args) -> int:
    report = validate(
        default_validation_grid(args.time_model),
        messages=args.messages or 1_000_000,
        seed=args.seed,
        confidence=args.confidence,
    )
    _emit("\n".join(report.lines()), args.out)
    return EXIT_OK if report.ok else EXIT_FAILURE


_COMMANDS = {
    "analytic": _cmd_analytic,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "optimize-alpha": _cmd_optimize_alpha,
    "crossover": _cmd_crossover,
    "validate": _cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except UnstableSchemeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except (SpecFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except NoCrossingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


def console_main() -> None:  # pragma: no cover - thin wrapper
    sys.exit(main())
