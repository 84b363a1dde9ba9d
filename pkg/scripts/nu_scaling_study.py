#!/usr/bin/env python3
"""Tabulate the certified decay exponent c2 against the diffusivity nu.

For a fixed datum the product c2 * nu stays bounded by a data constant; on
the heat branch (x-independent datum) the bounded ratio is c2 / nu instead.
The script prints the table and optionally writes it as CSV.
"""

import argparse
import csv
import sys

from mixlab.certificates import nu_scaling_report
from mixlab.spectral import HarmonicTerm, Lattice, field_from_terms

DATA = {
    "cos_y": [HarmonicTerm(1.0, 0, 1)],
    "cos_x": [HarmonicTerm(1.0, 1, 0)],
    "mixed": [HarmonicTerm(1.0, 1, 0, "sin"), HarmonicTerm(1.0, 0, 2)],
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--datum", choices=sorted(DATA), default="cos_y")
    parser.add_argument("--shear-bound", type=float, default=0.0, help="sup |U| entering the certificate")
    parser.add_argument("--nu-max", type=float, default=0.4)
    parser.add_argument("--halvings", type=int, default=5)
    parser.add_argument("--csv", help="write the table to this CSV path")
    args = parser.parse_args(argv)

    rho0 = field_from_terms(Lattice(4, 8), DATA[args.datum])
    nus = [args.nu_max / 2**i for i in range(args.halvings)]
    rows = nu_scaling_report(rho0, args.shear_bound, nus)

    print(f"datum={args.datum}  M={args.shear_bound}")
    print(f"{'nu':>10} {'c2':>14} {'c2*nu':>14} {'c2/nu':>14}  branch")
    for r in rows:
        print(f"{r.nu:10.5f} {r.c2:14.6g} {r.c2_times_nu:14.6g} {r.c2_over_nu:14.6g}  {r.branch}")

    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["nu", "c2", "c2_times_nu", "c2_over_nu", "branch"])
            writer.writeheader()
            writer.writerows([r.to_json() for r in rows])
        print(f"wrote {args.csv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
