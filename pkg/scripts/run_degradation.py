#!/usr/bin/env python3
"""Correction-degradation curves with the reference configuration: fit at
w* = (0.5, 0.25) on the bundled housing data, sweep correction counts from
0 up to the model's error count ('auto'), 1000 Monte Carlo runs.

Extra CLI flags pass through, e.g.:
    python3 scripts/run_degradation.py --runs 200 --out results/degrade
"""

import sys

from oversim.cli import parse_and_run

ARGS = [
    "degrade",
    "--w-star", "0.5,0.25",
    "--ks", "auto",
    "--runs", "1000",
    "--out", "results/degradation",
    "--plots",
]

if __name__ == "__main__":
    sys.exit(parse_and_run(ARGS + sys.argv[1:]))
