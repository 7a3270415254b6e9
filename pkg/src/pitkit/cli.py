"""Command-line experiment runner.

Subcommands:
  run             execute a parareal experiment, write the error trace as CSV
  factors         tabulate analytic contraction factors as CSV
  solution-field  sequential fine solve sampled on the space-time grid
  presets         list the named experiment and field presets

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Optional

from .core import ConfigError, IterationTrace, NumericalError, propagate_slice
from .factors import DEFAULT_MODES, DEFAULT_SLICES, BACKWARD_EULER, factor_grid
from .parareal import run as run_parareal
from .presets import (
    ExperimentConfig,
    build_model_and_u0,
    build_parareal,
    experiment_preset,
    experiment_preset_names,
    field_preset,
    field_preset_names,
    load_config,
    with_iterations,
    without_coarse,
)

TRACE_HEADER = "# pitkit trace v1"
FACTORS_HEADER = "# pitkit factors v1"
FIELD_HEADER = "# pitkit field v1"


def _fmt(value: float) -> str:
    return repr(float(value))


def _header_lines(pairs: dict[str, str]) -> list[str]:
    return [f"# {key} = {pairs[key]}" for key in sorted(pairs)]


def render_trace(trace: IterationTrace, config: ExperimentConfig) -> str:
    pairs = config.echo()
    pairs["trace.norm"] = str(trace.metadata.get("norm", ""))
    pairs["trace.initial_guess"] = str(trace.metadata.get("initial_guess", ""))
    lines = [TRACE_HEADER]
    lines.extend(_header_lines(pairs))
    lines.append("k,n,error_l2,bound,wall_time_ms")
    for entry in trace.entries:
        bound = "" if entry.bound is None else _fmt(entry.bound)
        wall = _fmt(entry.wall_time_ms) if config.timings else _fmt(0.0)
        lines.append(f"{entry.k},{entry.n},{_fmt(entry.error_l2)},{bound},{wall}")
    return "\n".join(lines) + "\n"


def _write(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)


def _load_experiment(args) -> ExperimentConfig:
    if args.preset is not None:
        config = experiment_preset(args.preset)
    elif args.config is not None:
        config = load_config(args.config)
    else:
        config = ExperimentConfig()
    if args.no_coarse:
        config = without_coarse(config)
    if args.iterations is not None:
        config = with_iterations(config, args.iterations)
    return config


def cmd_run(args) -> int:
    config = _load_experiment(args)
    trace = run_parareal(build_parareal(config), fine_parallel=config.parallel)
    _write(render_trace(trace, config), args.out)
    return 0


def _parse_factor_config(path: Optional[str]):
    modes = DEFAULT_MODES
    dts = DEFAULT_SLICES
    length = math.pi
    if path is not None:
        import configparser

        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(path, encoding="utf-8") as handle:
                parser.read_file(handle)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from exc
        for section in parser.sections():
            if section != "factors":
                raise ConfigError(f"unknown config section [{section}] for factors")
        if parser.has_section("factors"):
            keys = dict(parser.items("factors"))
            unknown = set(keys) - {"m_min", "m_max", "dts", "length"}
            if unknown:
                raise ConfigError(f"unknown config key factors.{sorted(unknown)[0]}")
            try:
                m_min = int(keys.get("m_min", modes[0]))
                m_max = int(keys.get("m_max", modes[-1]))
                length = float(keys.get("length", length))
                if "dts" in keys:
                    dts = tuple(float(tok) for tok in keys["dts"].replace(",", " ").split())
            except ValueError as exc:
                raise ConfigError(f"factors: {exc}") from exc
            modes = tuple(range(m_min, m_max + 1))
    if not modes or modes[0] < 1:
        raise ConfigError("factors.m_min: sine modes start at 1, the zero mode never contracts")
    if not dts or any(dt <= 0.0 for dt in dts):
        raise ConfigError("factors.dts: need a nonempty list of positive slice lengths")
    if length <= 0.0:
        raise ConfigError(f"factors.length: must be positive, got {length}")
    return modes, dts, length


def cmd_factors(args) -> int:
    modes, dts, length = _parse_factor_config(args.config)
    grid = factor_grid(modes, dts, length, BACKWARD_EULER)
    pairs = {
        "factors.m_min": str(modes[0]),
        "factors.m_max": str(modes[-1]),
        "factors.dts": " ".join(_fmt(dt) for dt in dts),
        "factors.length": _fmt(length),
        "factors.stability": BACKWARD_EULER.name,
    }
    lines = [FACTORS_HEADER]
    lines.extend(_header_lines(pairs))
    lines.append("m,dT,rho_nocoarse,rho_coarse")
    for m, dt, nc, wc in grid.iter_rows():
        lines.append(f"{m},{_fmt(dt)},{_fmt(nc)},{_fmt(wc)}")
    _write("\n".join(lines) + "\n", args.out)
    return 0


def cmd_solution_field(args) -> int:
    config = field_preset(args.preset)
    model, state = build_model_and_u0(config)
    parareal = build_parareal(config)
    partition = parareal.partition
    grid_x = model.grid_x

    lines = [FIELD_HEADER]
    lines.extend(_header_lines(config.echo()))
    lines.append("x,t,u")

    def emit(t: float, values) -> None:
        for x, u in zip(grid_x, values):
            lines.append(f"{_fmt(x)},{_fmt(t)},{_fmt(u)}")

    emit(partition.boundary(0), state.values)
    for n in range(partition.n_slices):
        t0, t1 = partition.slice_bounds(n)
        state = propagate_slice(model, parareal.fine, state, t0, t1)
        emit(t1, state.values)
    _write("\n".join(lines) + "\n", args.out)
    return 0


def cmd_presets(args) -> int:
    lines = ["experiment presets (run --preset NAME):"]
    for name in experiment_preset_names():
        c = experiment_preset(name)
        shape = f"N={c.n_slices}, K={c.iterations}, coarse={c.coarse_role}"
        lines.append(f"  {name:24s} {c.model_kind} ({c.bc if c.model_kind != 'spectral' else c.basis}), {shape}")
    lines.append("solution-field presets (solution-field --preset NAME):")
    for name in field_preset_names():
        c = field_preset(name)
        lines.append(f"  {name:24s} {c.model_kind} ({c.bc}), T={_fmt(c.t_end)}, N={c.n_slices}")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def build_argument_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pitkit",
        description="Parallel-in-time experiments: parareal traces, contraction factors, solution fields.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a parareal experiment, write the error trace")
    source = p_run.add_mutually_exclusive_group()
    source.add_argument("--config", help="INI config document")
    source.add_argument("--preset", help="named preset (see 'presets')")
    p_run.add_argument("--out", help="output CSV path (default: stdout)")
    p_run.add_argument("--no-coarse", action="store_true",
                       help="drop the coarse propagator (role becomes none)")
    p_run.add_argument("--iterations", type=int, help="override the iteration count")
    p_run.set_defaults(func=cmd_run)

    p_factors = sub.add_parser("factors", help="tabulate analytic contraction factors")
    p_factors.add_argument("--config", help="INI document with a [factors] section")
    p_factors.add_argument("--out", help="output CSV path (default: stdout)")
    p_factors.set_defaults(func=cmd_factors)

    p_field = sub.add_parser("solution-field", help="sequential solve on the space-time grid")
    p_field.add_argument("--preset", required=True, help="field preset name (see 'presets')")
    p_field.add_argument("--out", help="output CSV path (default: stdout)")
    p_field.set_defaults(func=cmd_solution_field)

    p_list = sub.add_parser("presets", help="list available presets")
    p_list.set_defaults(func=cmd_presets)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_argument_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
