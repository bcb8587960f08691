"""Single constant-divergence landing with oscillation-onset detection.

Runs one fixed-gain descent, prints a coarse time series of height,
divergence, and the sliding thrust-divergence covariance, and reports
where the onset detector fires.  The default scenario oscillates well
above the floor; lower --gain to land clean instead.

Usage:
    python landing_demo.py [--gain 20] [--c2 0.2] [--z0 10] [--out trace.csv]
"""

from __future__ import annotations

import argparse
from dataclasses import replace

from divstab import (
    detect_onset,
    onset_landing_scenario,
    run_scenario,
    unstable_gain_vacuum,
    write_trace_csv,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gain", type=float, default=20.0, help="fixed K_z")
    ap.add_argument("--c2", type=float, default=0.2,
                    help="divergence setpoint magnitude (theta* = -c2)")
    ap.add_argument("--z0", type=float, default=10.0, help="start height, m")
    ap.add_argument("--v0", type=float, default=-2.0, help="start speed, m/s")
    ap.add_argument("--wind", type=float, default=0.0, help="mean wind, m/s")
    ap.add_argument("--every", type=float, default=1.0,
                    help="print interval, s")
    ap.add_argument("--out", help="write the full trace CSV here")
    args = ap.parse_args()

    cfg = onset_landing_scenario()
    cfg = replace(
        cfg,
        controller=replace(cfg.controller, gain_p=args.gain, setpoint=-args.c2),
        env=replace(cfg.env, wind_mean=args.wind),
        z0=args.z0,
        v_z0=args.v0,
    )
    trace = run_scenario(cfg)

    print(f"K_z = {args.gain:g}, theta* = {-args.c2:g}, z0 = {args.z0:g} m")
    print(f"analytic vacuum boundary at this gain: "
          f"z = {args.gain * cfg.T / 2.0:.3f} m")
    print(f"{'t':>7} {'z':>8} {'theta':>9} {'cov':>11}")
    next_t = 0.0
    for rec in trace:
        if rec.t + 1e-9 >= next_t:
            cov = "--" if rec.cov is None else f"{rec.cov:11.4g}"
            print(f"{rec.t:7.2f} {rec.z:8.3f} {rec.theta:9.4f} {cov:>11}")
            next_t += args.every

    last = trace[-1]
    print(f"end: t = {last.t:.2f} s, z = {last.z:.3f} m, phase = {last.phase}")
    onset = detect_onset(trace, cfg.detector)
    if onset is None:
        print("onset: never detected")
    else:
        print(f"onset: t = {onset[0]:.2f} s, z = {onset[1]:.3f} m")

    if args.out:
        write_trace_csv(args.out, trace)
        print(f"trace -> {args.out}")


if __name__ == "__main__":
    main()
