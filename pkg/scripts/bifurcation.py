"""Burst-width dynamics just below and above the bifurcation gain at c = 0.2."""

import sys

from neurorhythm.cli import main
from neurorhythm.describing_fn import solve_design_point
from neurorhythm.plant import PlantParams
from neurorhythm.slow_model import bifurcation_gamma

if __name__ == "__main__":
    gstar = bifurcation_gamma(0.2, solve_design_point(0.5, PlantParams()))
    gammas = ",".join(repr(f * gstar) for f in (0.5, 0.9, 1.1, 2.0))
    sys.exit(main(["bifurcation", "--gammas", gammas, "--c", "0.2", "--out", "results/bifurcation", *sys.argv[1:]]))
