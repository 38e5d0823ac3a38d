#!/usr/bin/env python3
"""Navigator profile: minimal late-time slack versus trial decay rate.

Writes a CSV of (omega, n, delta, navigator) rows; input for the
navigator-profile figure.  Infinite values (linear-system infeasible)
are written as 'inf'.
"""

import argparse
import csv
import math
import sys
from pathlib import Path

from lindblad_bounds.backend import SolverSettings
from lindblad_bounds.search import navigator, qcp_family


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--omega", type=float, default=2.0)
    parser.add_argument("--n", type=int, default=4)
    parser.add_argument("--delta-min", type=float, default=0.0)
    parser.add_argument("--delta-max", type=float, default=2.0)
    parser.add_argument("--points", type=int, default=41)
    parser.add_argument("--tol", type=float, default=1e-9)
    parser.add_argument("--out", type=Path, default=Path("results"))
    args = parser.parse_args(argv)

    settings = SolverSettings(tol=args.tol)
    model = qcp_family(args.omega)
    step = (args.delta_max - args.delta_min) / (args.points - 1)
    args.out.mkdir(parents=True, exist_ok=True)

    rows = []
    for i in range(args.points):
        delta = args.delta_min + i * step
        value = navigator(model, args.n, delta, settings)
        text = ("inf" if value == math.inf
                else "-inf" if value == -math.inf
                else format(value, ".9g"))
        rows.append([format(args.omega, ".9g"), args.n,
                     format(delta, ".9g"), text])

    out = args.out / "navigator_profile.csv"
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("omega", "n", "delta", "navigator"))
        writer.writerows(rows)
    print(f"wrote {out} ({len(rows)} rows)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
