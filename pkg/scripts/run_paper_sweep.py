#!/usr/bin/env python3
"""Paper-scale sweep: 5 RRHs x 5 antennas, 15 users, 100 channel draws.

Heavy: roughly an hour per trial per core; pass --threads to spread trials
over more workers.
"""

import sys
from pathlib import Path

from cran_maxmin.cli import cli_main

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    sys.exit(cli_main([
        "sweep",
        "--config", str(ROOT / "configs" / "paper.json"),
        "--out", str(ROOT / "results_paper.csv"),
    ] + sys.argv[1:]))
