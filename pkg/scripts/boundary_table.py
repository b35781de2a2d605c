"""Recompute the existence boundary K-bar(H), K-hat(H) and compare with the published rows.

    python scripts/boundary_table.py [--workers N] [--csv out.csv]
"""

import argparse
import csv
import sys

from bfbm.existence import boundary_table

PUBLISHED = {
    1.01: (0.988, 0.988), 1.1: (0.887, 0.894), 1.2: (0.794, 0.807), 1.3: (0.718, 0.734),
    1.5: (0.603, 0.619), 1.7: (0.519, 0.533), 2.0: (0.422, 0.440), 2.5: (0.321, 0.338),
    3.0: (0.260, 0.273), 3.5: (0.217, 0.228), 4.0: (0.185, 0.196), 5.0: (0.144, 0.152),
    6.0: (0.117, 0.123), 7.0: (0.099, 0.104), 10.0: (0.067, 0.070), 20.0: (0.032, 0.033),
    60.0: (0.010, 0.010), 100.0: (0.006, 0.006),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--csv", help="also write the rows to this file")
    args = ap.parse_args()

    rows = boundary_table(list(PUBLISHED), workers=args.workers)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["h", "k_bar", "k_bar_published", "k_hat", "k_hat_published"])
    for r in rows:
        kb, kh = PUBLISHED[r.h]
        out.writerow([f"{r.h:g}", f"{r.k_bar:.3f}", f"{kb:.3f}", f"{r.k_hat:.3f}", f"{kh:.3f}"])
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["h", "k_bar", "k_hat"])
            for r in rows:
                w.writerow([r.h, r.k_bar, r.k_hat])


if __name__ == "__main__":
    main()
