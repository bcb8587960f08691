"""Command-line front end.

Subcommands mirror the library surface: `simulate` runs one scenario to
a trace CSV, the `sweep-*`/`edge-landing` commands run the experiment
batteries and print their calibration fits, `analyze` prints critical
gains for an operating point, and `perfect-curve` tabulates the exact
landing-thrust profile.  Scenario settings come from a TOML file with
one section per module; every key has the library default.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

import numpy as np

try:
    import tomllib  # py >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from . import analysis, harness
from .adaptive import AdaptiveConfig
from .controller import ControllerConfig
from .detector import DetectorThresholds, detect_onset
from .dynamics import EnvParams, VehicleParams
from .estimators import perfect_landing_thrust
from .harness import ScenarioConfig, TwoPhaseConfig

__all__ = ["main", "load_scenario", "load_sweep_options", "ConfigError"]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2


class ConfigError(Exception):
    """Bad configuration file or flags."""


_SECTION_TYPES = {
    "vehicle": VehicleParams,
    "env": EnvParams,
    "controller": ControllerConfig,
    "adaptive": AdaptiveConfig,
    "detector": DetectorThresholds,
    "two_phase": TwoPhaseConfig,
}
_SCENARIO_KEYS = (
    "T", "delay", "z0", "v_z0", "t_max", "z_floor", "noise_sigma", "seed",
    "cov_window", "integrator", "integral_preload",
)
_SWEEP_KEYS = ("gains", "winds", "heights", "pi_mode")


def _load_toml(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc


def _build_section(name: str, data: dict):
    cls = _SECTION_TYPES[name]
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{name}] section: {exc}") from exc


def load_scenario(path: str) -> ScenarioConfig:
    """Scenario from a TOML file; omitted sections/keys keep defaults."""
    doc = _load_toml(path)
    kwargs = {}
    for section, data in doc.items():
        if section in _SECTION_TYPES:
            if not isinstance(data, dict):
                raise ConfigError(f"[{section}] must be a table")
            kwargs[section] = _build_section(section, data)
        elif section == "scenario":
            if not isinstance(data, dict):
                raise ConfigError("[scenario] must be a table")
            for key, value in data.items():
                if key not in _SCENARIO_KEYS:
                    raise ConfigError(f"unknown [scenario] key {key!r}")
                kwargs[key] = value
        elif section == "sweep":
            continue  # consumed by load_sweep_options
        else:
            raise ConfigError(f"unknown config section [{section}]")
    try:
        return ScenarioConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_sweep_options(path: str) -> dict:
    """The [sweep] table (gains/winds/heights/pi_mode), possibly empty."""
    doc = _load_toml(path)
    data = doc.get("sweep", {})
    if not isinstance(data, dict):
        raise ConfigError("[sweep] must be a table")
    for key in data:
        if key not in _SWEEP_KEYS:
            raise ConfigError(f"unknown [sweep] key {key!r}")
    return dict(data)


def _scenario_or_default(args, default_factory) -> ScenarioConfig:
    if args.config is not None:
        return load_scenario(args.config)
    return default_factory()


def _sweep_options(args) -> dict:
    opts = load_sweep_options(args.config) if args.config is not None else {}
    if getattr(args, "pi_mode", False):
        opts["pi_mode"] = True
    return opts


def _emit_sweep(result: harness.SweepResult, args) -> None:
    if args.out is not None:
        harness.write_sweep_csv(args.out, result)
    if getattr(args, "samples_out", None) is not None:
        harness.write_samples_csv(args.samples_out, result)
    print(result.fit.summary())


def _cmd_simulate(args) -> int:
    cfg = _scenario_or_default(args, harness.onset_landing_scenario)
    trace = harness.run_scenario(cfg)
    if args.out is not None:
        harness.write_trace_csv(args.out, trace)
    last = trace[-1]
    print(f"{len(trace)} records; end t={last.t:.2f} s z={last.z:.3f} m "
          f"phase={last.phase}")
    det = detect_onset(trace, cfg.detector)
    if det is not None:
        print(f"oscillation onset: t={det[0]:.2f} s z={det[1]:.3f} m")
    else:
        print("oscillation onset: none")
    return EXIT_OK


def _cmd_sweep_detect(args) -> int:
    base = _scenario_or_default(args, harness.detection_base)
    opts = _sweep_options(args)
    opts.pop("heights", None)
    _emit_sweep(harness.detection_sweep(base=base, **opts), args)
    return EXIT_OK


def _cmd_sweep_gust(args) -> int:
    base = _scenario_or_default(args, harness.gusty_base)
    opts = _sweep_options(args)
    opts.pop("heights", None)
    _emit_sweep(harness.gusty_sweep(base=base, **opts), args)
    return EXIT_OK


def _cmd_sweep_hover(args) -> int:
    base = _scenario_or_default(args, harness.hover_base)
    opts = _sweep_options(args)
    opts.pop("pi_mode", None)
    opts.pop("gains", None)
    _emit_sweep(harness.hover_sweep(base=base, **opts), args)
    return EXIT_OK


def _cmd_edge_landing(args) -> int:
    base = _scenario_or_default(args, harness.edge_base)
    opts = _sweep_options(args)
    heights = {"heights": opts["heights"]} if "heights" in opts else {}
    _emit_sweep(harness.edge_landing_battery(base=base, **heights), args)
    return EXIT_OK


def _cmd_analyze(args) -> int:
    k_unstable = analysis.unstable_gain_vacuum(args.z, args.T)
    print(f"K_unstable = {k_unstable:.2f}")
    if args.p is not None:
        k_drag = analysis.unstable_gain_drag(
            args.z, args.v_z, args.p, args.T, simplified=args.simplified
        )
        print(f"K_unstable_drag = {k_drag:.2f}")
    if args.delay is not None:
        gains = analysis.continuous_critical_gains(
            args.z, args.v_z, args.v_wind, args.beta, args.delay
        )
        osc = "none" if gains.k_oscillation is None else f"{gains.k_oscillation:.2f}"
        unst = "none" if gains.k_unstable is None else f"{gains.k_unstable:.2f}"
        print(f"k_oscillation = {osc}")
        print(f"k_unstable_delayed = {unst}")
    return EXIT_OK


def _cmd_perfect_curve(args) -> int:
    vehicle = VehicleParams(drag_coeff_half=args.beta)
    env = EnvParams(wind_mean=args.wind)
    z_grid = np.linspace(0.0, args.z_max, args.samples)
    curve = perfect_landing_thrust(z_grid, args.c2, env, vehicle)
    if args.out is not None:
        lines = ["z,u_prime"]
        for z, u in zip(curve.z, curve.u_prime):
            lines.append(f"{z:.17g},{u:.17g}")
        with open(args.out, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
    print(f"u'(0) = {curve.u_prime[0]:.4f} N; "
          f"u'({args.z_max:g}) = {curve.u_prime[-1]:.4f} N")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; in this contract flag errors are
    # configuration errors (1), while 2 means a numerical failure
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_io_flags(sub, samples: bool = False) -> None:
    sub.add_argument("--config", help="TOML scenario/sweep configuration")
    sub.add_argument("--out", help="CSV output path")
    if samples:
        sub.add_argument(
            "--samples-out", help="CSV path for the fit's (K, z) samples"
        )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="divstab",
                     description="divergence-control stability toolkit")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("simulate", help="run one scenario to a trace CSV")
    _add_io_flags(p)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("sweep-detect",
                       help="onset detection across gains and winds")
    _add_io_flags(p, samples=True)
    p.add_argument("--pi-mode", action="store_true", dest="pi_mode",
                   help="add an I_z = 1 inner-loop integrator")
    p.set_defaults(fn=_cmd_sweep_detect)

    p = sub.add_parser("sweep-gust", help="detection sweep under gusts")
    _add_io_flags(p, samples=True)
    p.add_argument("--pi-mode", action="store_true", dest="pi_mode")
    p.set_defaults(fn=_cmd_sweep_gust)

    p = sub.add_parser("sweep-hover", help="adaptive hover-ranging grid")
    _add_io_flags(p, samples=True)
    p.set_defaults(fn=_cmd_sweep_hover)

    p = sub.add_parser("edge-landing",
                       help="two-phase edge-of-oscillation landings")
    _add_io_flags(p, samples=True)
    p.set_defaults(fn=_cmd_edge_landing)

    p = sub.add_parser("analyze", help="critical gains at an operating point")
    p.add_argument("--z", type=float, required=True, help="height, m")
    p.add_argument("--T", type=float, default=0.03, help="control period, s")
    p.add_argument("--v-z", type=float, default=0.0, dest="v_z")
    p.add_argument("--v-wind", type=float, default=0.0, dest="v_wind")
    p.add_argument("--beta", type=float, default=0.5,
                   help="quadratic drag coefficient per unit mass")
    p.add_argument("--p", type=float, default=None,
                   help="drag rate for the discrete drag formula")
    p.add_argument("--simplified", action="store_true",
                   help="v_z-free variant of the drag formula")
    p.add_argument("--delay", type=float, default=None,
                   help="loop delay; adds the continuous critical gains")
    p.set_defaults(fn=_cmd_analyze)

    p = sub.add_parser("perfect-curve",
                       help="exact landing-thrust profile vs height")
    p.add_argument("--c2", type=float, default=0.1, help="divergence setpoint magnitude")
    p.add_argument("--z-max", type=float, default=12.0, dest="z_max")
    p.add_argument("--samples", type=int, default=121)
    p.add_argument("--wind", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=0.5,
                   help="aggregate quadratic drag coefficient, kg/m")
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(fn=_cmd_perfect_curve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
