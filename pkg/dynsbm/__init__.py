"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.
"""

from .model.params import ModelParams, validate_theta
from .model.sampler import GraphSequence, LatentPaths, sample_graphs, sample_latent_paths
from .exact.likelihood import exact_loglik
from .exact.mle import exact_mle
from .report import EstimationReport
from .vem.fit import fit_vem
