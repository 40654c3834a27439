"""Two-group SIQS epidemics on activity-driven temporal networks.

Stochastic simulation, mean-field ODEs and closed-form threshold analysis.
"""

from .engine import empirical_rates, init, run, simulate, step, transition_rate_matrix
from .errors import SiqnetError
from .estimator import EstimationConfig, ThresholdEstimate, eradication_probability, estimate_threshold
from .meanfield import MacroState, MicroState, dfe, integrate, macro_rhs, micro_rhs
from .netgen import Backbone, barabasi_albert, complete, erdos_renyi
from .params import ModelParams, PopulationSplit, population_split, validate
from .spectral import ThresholdReport, analytic_threshold, threshold_no_homophily, threshold_report, xi
from .trajectory import Trajectory

__version__ = "0.1.0"

__all__ = [
    "Backbone", "EstimationConfig", "MacroState", "MicroState", "ModelParams", "PopulationSplit",
    "SiqnetError", "ThresholdEstimate", "ThresholdReport", "Trajectory", "analytic_threshold",
    "barabasi_albert", "complete", "dfe", "empirical_rates", "eradication_probability",
    "erdos_renyi", "estimate_threshold", "init", "integrate", "macro_rhs", "micro_rhs",
    "population_split", "run", "simulate", "step", "threshold_no_homophily", "threshold_report",
    "transition_rate_matrix", "validate", "xi",
]
