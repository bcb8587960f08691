"""Tabulate analytic stability boundaries of the divergence loop.

Three maps over height:

    vacuum   destabilizing gain 2z/T of the delay-free sampled loop
    drag     the same boundary with linearized quadratic drag (rate p)
    delayed  oscillation/instability gains of the continuous loop with
             a second-order rational delay approximation

Usage:
    python stability_maps.py [--T 0.03] [--delay 0.15] [--beta 0.5] [--p 0.5]
"""

from __future__ import annotations

import argparse

import numpy as np

from divstab import (
    continuous_critical_gains,
    instability_height,
    unstable_gain_drag,
    unstable_gain_vacuum,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--T", type=float, default=0.03, help="control period, s")
    ap.add_argument("--delay", type=float, default=0.15, help="loop delay, s")
    ap.add_argument("--beta", type=float, default=0.5,
                    help="aggregate quadratic drag coefficient, kg/m")
    ap.add_argument("--p", type=float, default=0.5,
                    help="linearized drag rate for the drag column, 1/s")
    ap.add_argument("--v-z", type=float, default=0.0, dest="v_z")
    ap.add_argument("--heights", type=float, nargs="+",
                    default=[1.0, 2.0, 5.0, 10.0, 20.0, 50.0])
    args = ap.parse_args()

    print(f"T = {args.T:g} s, delay = {args.delay:g} s, p = {args.p:g} 1/s, "
          f"beta = {args.beta:g} kg/m, v_z = {args.v_z:g} m/s")
    print(f"{'z':>6} {'K_vacuum':>10} {'K_drag':>10} {'K_osc':>10} {'K_unst':>10}")
    for z in args.heights:
        k_vac = unstable_gain_vacuum(z, args.T)
        k_drag = unstable_gain_drag(z, args.v_z, args.p, args.T)
        gains = continuous_critical_gains(
            z, args.v_z, v_wind=args.v_z, beta=args.beta, delay=args.delay
        )
        osc = "--" if gains.k_oscillation is None else f"{gains.k_oscillation:10.2f}"
        unst = "--" if gains.k_unstable is None else f"{gains.k_unstable:10.2f}"
        print(f"{z:6.1f} {k_vac:10.2f} {k_drag:10.2f} {osc:>10} {unst:>10}")

    print()
    print("gain -> oscillation height (vacuum), z = K*T/2:")
    for k in np.asarray([10.0, 20.0, 50.0, 100.0, 200.0]):
        print(f"  K = {k:6.1f}: z = {instability_height(k, args.T):7.3f} m")


if __name__ == "__main__":
    main()
