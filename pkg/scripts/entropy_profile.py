#!/usr/bin/env python3
"""Bond-entropy profile of a t-V chain, with and without disentangling.

Optimizes the same chain twice -- plain sweeps and sweeps with the
Clifford gate search -- and writes the von Neumann entropy across every
bond to a CSV.  The augmented run should carry visibly less entanglement
at equal bond dimension while matching (or beating) the plain energy.
"""

import argparse
import csv
import sys

import numpy as np

from cagmps import models
from cagmps.dmrg import SweepConfig, run_dmrg


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--L", type=int, default=50)
    ap.add_argument("--t", type=float, default=1.0)
    ap.add_argument("--V", type=float, default=2.0)
    ap.add_argument("--chi", type=int, default=64)
    ap.add_argument("--sweeps", type=int, default=40)
    ap.add_argument("--out", default="-", help="CSV path, '-' for stdout")
    args = ap.parse_args()

    ham = models.build_tv(args.L, args.t, args.V)
    profiles = {}
    for use_clifford, name in ((False, "gmps"), (True, "cagmps")):
        cfg = SweepConfig(chi_max=args.chi, n_sweeps=args.sweeps,
                          use_clifford=use_clifford)
        res = run_dmrg(ham, cfg)
        profiles[name] = res.state.bond_entropies()
        print(f"# {name}: E = {res.energy:.12f}, "
              f"mean S = {np.mean(profiles[name]):.6f}", file=sys.stderr)

    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    writer = csv.writer(out)
    writer.writerow(["bond", "S_gmps", "S_cagmps"])
    for b, (sg, sc) in enumerate(zip(profiles["gmps"], profiles["cagmps"]), 1):
        writer.writerow([b, f"{sg:.12f}", f"{sc:.12f}"])
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
