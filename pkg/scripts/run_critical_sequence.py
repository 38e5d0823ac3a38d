#!/usr/bin/env python3
"""Critical-coupling lower bounds versus bootstrap level.

Bisects the bound transition at each level and writes one CSV row per
level, together with the infeasibility onset of the deviation-ratio
problem as an independent check.
"""

import argparse
import csv
import sys
import time
from pathlib import Path

from lindblad_bounds.backend import SolverSettings
from lindblad_bounds.search import (critical_coupling_lower_bound, qcp_family,
                                    ratio_onset)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--levels", type=int, nargs="+", default=[3, 4, 5])
    parser.add_argument("--bisect-tol", type=float, default=5e-3)
    parser.add_argument("--tol", type=float, default=1e-9)
    parser.add_argument("--out", type=Path, default=Path("results"))
    args = parser.parse_args(argv)

    settings = SolverSettings(tol=args.tol)
    args.out.mkdir(parents=True, exist_ok=True)

    rows = []
    for n in args.levels:
        t0 = time.time()
        critical = critical_coupling_lower_bound(qcp_family, n,
                                                 tol=args.bisect_tol,
                                                 settings=settings)
        onset = ratio_onset(qcp_family, n, tol=args.bisect_tol,
                            settings=settings)
        elapsed = time.time() - t0
        print(f"n={n}: critical={critical:.6f} ratio_onset={onset:.6f} "
              f"({elapsed:.0f}s)", flush=True)
        rows.append([n, format(critical, ".9g"), format(onset, ".9g"),
                     format(args.bisect_tol, ".9g")])

    out = args.out / "critical_sequence.csv"
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("n", "omega_lower_bound", "ratio_onset",
                         "bisect_tol"))
        writer.writerows(rows)
    print(f"wrote {out} ({len(rows)} rows)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
