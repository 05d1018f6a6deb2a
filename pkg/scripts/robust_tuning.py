"""Optimal adaptation gain for beta* in [0.0732, 0.2288], worst-case surface and simulated errors."""

import os
import sys

from neurorhythm.cli import main

if __name__ == "__main__":
    sys.exit(main(["optimize", "--beta-low", "0.0732", "--beta-high", "0.2288", "--c", "0.2",
                   "--out", "results/robust_tuning", "--jobs", str(os.cpu_count() or 1), *sys.argv[1:]]))
