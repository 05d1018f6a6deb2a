"""Full and slow-model ultimate amplitude error on a 16 x 16 log grid over (gamma, c)."""

import os
import sys

from neurorhythm.cli import main

if __name__ == "__main__":
    jobs = str(os.cpu_count() or 1)
    common = ["--gamma-range", "0.01,1", "--c-range", "0.01,1", "--points-per-axis", "16", "--out", "results/heatmap",
              "--jobs", jobs, *sys.argv[1:]]
    code = main(["heatmap", "--mode", "slow", *common])
    sys.exit(code or main(["heatmap", "--mode", "full", *common]))
