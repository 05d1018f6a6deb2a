"""Harmonic-balance vs simulated limit cycle over burst widths in [0.01, 0.2]."""

import sys

from neurorhythm.cli import main

if __name__ == "__main__":
    sys.exit(main(["hb-sweep", "--beta-min", "0.01", "--beta-max", "0.2", "--points", "40", "--out", "results/hb_sweep",
                   *sys.argv[1:]]))
