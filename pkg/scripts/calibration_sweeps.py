"""Run the detection and hover calibration batteries and print the fits.

Each battery turns stability onsets into (gain, height) samples and fits
the calibration line z = slope * K + intercept:

    detect   fixed-gain descents across winds; sample at detector onset
    gusty    same, under 4 m/s gusts and inflow-degraded thrust
    hover    adaptive hover ranging across a wind x height grid
    edge     two-phase edge-of-oscillation landings (in-band samples)

Usage:
    python calibration_sweeps.py [battery ...] [--pi-mode] [--csv-dir DIR]
"""

from __future__ import annotations

import argparse
import os
import time

from divstab import (
    detection_sweep,
    edge_landing_battery,
    gusty_sweep,
    hover_sweep,
    write_samples_csv,
    write_sweep_csv,
)

BATTERIES = ("detect", "gusty", "hover", "edge")


def run_battery(name: str, pi_mode: bool):
    if name == "detect":
        return detection_sweep(pi_mode=pi_mode)
    if name == "gusty":
        return gusty_sweep(pi_mode=pi_mode)
    if name == "hover":
        return hover_sweep()
    if name == "edge":
        return edge_landing_battery()
    raise ValueError(f"unknown battery {name!r}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("batteries", nargs="*", default=list(BATTERIES),
                    choices=list(BATTERIES) + [[]],
                    help="which batteries to run (default: all)")
    ap.add_argument("--pi-mode", action="store_true",
                    help="detection sweeps use a PI inner loop (I_z = 1)")
    ap.add_argument("--csv-dir", help="write rows/samples CSVs into this dir")
    args = ap.parse_args()
    names = args.batteries or list(BATTERIES)

    for name in names:
        t0 = time.perf_counter()
        result = run_battery(name, args.pi_mode)
        dt = time.perf_counter() - t0
        outcomes = [r.outcome for r in result.rows]
        print(f"[{name}] {len(result.rows)} cells in {dt:.1f} s "
              f"({outcomes.count('detected')} detected, "
              f"{outcomes.count('touchdown-first')} touchdown-first, "
              f"{outcomes.count('timeout')} timeout)")
        print(f"[{name}] {result.fit.summary()}")
        if args.csv_dir:
            os.makedirs(args.csv_dir, exist_ok=True)
            rows_path = os.path.join(args.csv_dir, f"{name}_rows.csv")
            samp_path = os.path.join(args.csv_dir, f"{name}_samples.csv")
            write_sweep_csv(rows_path, result)
            write_samples_csv(samp_path, result)
            print(f"[{name}] rows -> {rows_path}, samples -> {samp_path}")


if __name__ == "__main__":
    main()
