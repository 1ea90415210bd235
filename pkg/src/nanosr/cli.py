"""Command-line entry point: ``nanosr simulate | compare | sweep | geometry | units``.

Exit codes: 0 success, 2 config validation error, 3 numerical invariant
violation, 4 capacity exceeded.
"""
from __future__ import annotations

import argparse
import json
from pathlib import Path
import sys

from . import geometry as geo
from . import units
from .dicke import CapacityError
from .dynamics import InvariantViolation
from .scenario import (
    COMPARISON_PRESETS,
    SCENARIO_PRESETS,
    ConfigError,
    ScenarioConfig,
    compare_preset,
    compare_scenarios,
    preset_config,
    run_scenario,
    sweep,
    sweep_csv,
)
from .trace import PulseError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_CAPACITY = 4


def _load_config(args) -> ScenarioConfig:
    if getattr(args, "preset", None):
        return preset_config(args.preset)
    if not args.config:
        raise ConfigError("config", "give --config <path> or --preset <name>")
    try:
        return ScenarioConfig.load(args.config)
    except OSError as exc:
        raise ConfigError("config", str(exc)) from None


def _parse_value(text: str):
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def cmd_simulate(args) -> int:
    config = _load_config(args)
    if args.oracle:
        config = config.replace(engine="oracle")
    result = run_scenario(config, args.out)
    if args.out is None:
        sys.stdout.write(result.trace.to_csv())
    else:
        print(result.metrics.to_json(), end="", file=sys.stderr if args.quiet else sys.stdout)
    return EXIT_OK


def cmd_compare(args) -> int:
    if args.preset:
        report = compare_preset(args.preset)
    elif args.config_a and args.config_b:
        report = compare_scenarios(ScenarioConfig.load(args.config_a), ScenarioConfig.load(args.config_b))
    else:
        raise ConfigError("preset", "give --preset or both --config-a and --config-b")
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _load_config(args)
    values = [_parse_value(v) for v in args.values.split(",")] if args.values.strip() else []
    rows = sweep(config, args.param, values, workers=args.workers)
    text = sweep_csv(args.param, rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_geometry(args) -> int:
    try:
        g = geo.get_preset(args.preset)
    except KeyError as exc:
        raise ConfigError("preset", str(exc).strip("'\"")) from None
    count = geo.water_count(g, length=args.length_nm, include_bound_layer=args.include_bound_layer)
    out = {
        "geometry": g.to_dict(),
        "free_core_diameter_A": g.free_core_diameter,
        "length_nm": count.length,
        "n_water": count.n_molecules,
        "bound_layer_water": count.bound_layer_molecules,
        "te11_cutoff_rad_per_s": geo.lowest_mode_cutoff(g),
    }
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_units(args) -> int:
    out = {}
    if args.wavenumber is not None:
        sigma = args.wavenumber
        out["wavenumber_cm-1"] = sigma
        out["angular_frequency_rad_per_s"] = units.wavenumber_to_angular_frequency(sigma)
        out["energy_meV"] = units.energy_to_mev(units.wavenumber_to_energy(sigma))
        out["epsilon_over_kT"] = units.thermal_ratio(sigma, args.temperature)
        out["temperature_K"] = args.temperature
    if args.dipole_displacement is not None:
        out["displacement_A"] = args.dipole_displacement
        out["dipole_debye"] = units.to_debye(units.dipole_moment_from_displacement(args.dipole_displacement))
    if not out:
        raise ConfigError("units", "give --wavenumber and/or --dipole-displacement")
    print(json.dumps(out, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nanosr", description="Superradiance of water in nanotube cavities.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario")
    p.add_argument("--config", help="scenario JSON")
    p.add_argument("--preset", choices=sorted(SCENARIO_PRESETS))
    p.add_argument("--out", help="trace CSV path; metrics go to <stem>.metrics.json")
    p.add_argument("--quiet", action="store_true", help="print metrics to stderr")
    p.add_argument("--oracle", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="run two scenarios and report ratios")
    p.add_argument("--preset", choices=sorted(COMPARISON_PRESETS))
    p.add_argument("--config-a")
    p.add_argument("--config-b")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="vary one config field")
    p.add_argument("--config")
    p.add_argument("--preset", choices=sorted(SCENARIO_PRESETS))
    p.add_argument("--param", required=True)
    p.add_argument("--values", required=True, help="comma-separated; each item parsed as JSON if possible")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("geometry", help="water count and cutoff for a geometry preset")
    p.add_argument("--preset", required=True, choices=sorted(geo.PRESETS))
    p.add_argument("--length-nm", type=float)
    p.add_argument("--include-bound-layer", action="store_true")
    p.set_defaults(func=cmd_geometry)

    p = sub.add_parser("units", help="unit conversions")
    p.add_argument("--wavenumber", type=float, help="cm^-1")
    p.add_argument("--dipole-displacement", type=float, help="angstrom")
    p.add_argument("--temperature", type=float, default=310.0, help="K, for epsilon/kT")
    p.set_defaults(func=cmd_units)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CapacityError as exc:  # subclass of ValueError, so check first
        print(f"error: capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except InvariantViolation as exc:
        print(f"error: numerical invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ConfigError, PulseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
