#!/usr/bin/env python3
"""Global vs local override strategies with the reference configuration:
w* = (0.5, 0.25), partition on raw attribute B at threshold 50, 20% of
each test subpopulation corrected, 100 train/test replications.

Extra CLI flags pass through, e.g.:
    python3 scripts/run_local_strategies.py --replications 10
"""

import sys

from oversim.cli import parse_and_run

ARGS = [
    "local",
    "--w-star", "0.5,0.25",
    "--attr", "B",
    "--threshold", "50",
    "--p", "20",
    "--replications", "100",
    "--out", "results/local_strategies",
]

if __name__ == "__main__":
    sys.exit(parse_and_run(ARGS + sys.argv[1:]))
