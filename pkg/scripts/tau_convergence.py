#!/usr/bin/env python3
"""Tau function against lattice radius and instanton cutoff.

Prints a table of relative changes, which is the practical way to choose
``radius``/``cutoff`` for a new parameter file:

    python3 scripts/tau_convergence.py scripts/configs/lax_q05.cfg --radii 0 1 2 3 --cutoffs 0 2 4 6
"""
import argparse

from qnek.config import LaxConfig, load_config
from qnek.lax import LatticeWindow, tau


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--radii", type=int, nargs="+", default=[0, 1, 2, 3])
    ap.add_argument("--cutoffs", type=int, nargs="+", default=[0, 2, 4, 6])
    args = ap.parse_args()
    cfg = load_config(args.config)
    if not isinstance(cfg, LaxConfig):
        ap.error("needs a 'kind = lax' file")
    vals = {(r, c): tau(cfg.params, LatticeWindow(r), c) for r in args.radii for c in args.cutoffs}
    ref = vals[(max(args.radii), max(args.cutoffs))]
    print(f"reference tau (radius {max(args.radii)}, cutoff {max(args.cutoffs)}) = {ref:.15g}")
    print("relative difference from the reference")
    print("radius " + "".join(f"{'cutoff ' + str(c):>14}" for c in args.cutoffs))
    for r in args.radii:
        print(f"{r:>6} " + "".join(f"{abs(vals[(r, c)] - ref) / abs(ref):>14.3e}" for c in args.cutoffs))


if __name__ == "__main__":
    main()
