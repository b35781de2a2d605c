"""Thinned existence region: K-bar and K-hat for H = 1.1, 1.6, ..., 9.6 (step 0.5).

The output is the data behind a region plot; draw it with any plotting tool.

    python scripts/region_grid.py > region.csv
"""

import csv
import os
import sys

import numpy as np

from bfbm.existence import boundary_table


def main():
    hs = np.round(np.arange(1.1, 10.0 + 1e-9, 0.5), 10).tolist()
    workers = int(os.environ.get("BFBM_THREADS", os.cpu_count() or 1))
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["h", "k_bar", "k_hat", "k_max"])
    for r in boundary_table(hs, workers=workers):
        out.writerow([f"{r.h:g}", f"{r.k_bar:.3f}", f"{r.k_hat:.3f}", f"{1 / r.h:.3f}"])


if __name__ == "__main__":
    main()
