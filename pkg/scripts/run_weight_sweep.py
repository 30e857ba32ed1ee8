#!/usr/bin/env python3
"""Weight-equivalence sweep with the reference configuration: 30x30 grid
over [0,1]^2 around w* = (0.5, 0.25), equivalence threshold tau = 0.01,
bundled housing data.  Roughly 900 fits; expect a few minutes serially.

Extra CLI flags pass through, e.g.:
    python3 scripts/run_weight_sweep.py --threads 8 --out results/sweep
"""

import sys

from oversim.cli import parse_and_run

ARGS = [
    "sweep",
    "--w-star", "0.5,0.25",
    "--tau", "0.01",
    "--grid", "0:1:30x0:1:30",
    "--out", "results/weight_sweep",
    "--plots",
]

if __name__ == "__main__":
    sys.exit(parse_and_run(ARGS + sys.argv[1:]))
