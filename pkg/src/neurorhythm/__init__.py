"""Analysis, simulation and tuning of an event-based rhythmic pendulum controller."""

from .describing_fn import DesignPoint, HBSolution, amplitude_curve, solve_design_point, solve_hb
from .plant import PlantParams, PlantState, freq_response, vector_field
from .robust_opt import UncertaintyInterval, gamma_opt, tune, worst_case
from .simulator import AdaptiveParams, SimTrace, measure_objectives, run_closed_loop
from .slow_model import SlowGains, bifurcation_gamma, classify, fixed_point, make_gains

__version__ = "0.1.0"
