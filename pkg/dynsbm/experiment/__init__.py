"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.
"""

from .config import ExperimentConfig
from .outputs import emit_outputs
from .regression import RateFit, rate_regression
from .runner import ExperimentResult, run_consistency_experiment
