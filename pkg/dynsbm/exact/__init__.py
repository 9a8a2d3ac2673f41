"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.
"""

from .likelihood import (
    LogLikValue,
    conditional_loglik,
    exact_loglik,
    exact_loglik_bruteforce,
    exact_loglik_transfer,
    latent_prior_loglik,
    normalized_loglik,
)
from .limit import limit_M, limit_M_sup, limit_M_T
from .mle import MleConfig, exact_mle, mle_gamma_fixed_point_residual
from .posterior import (
    PosteriorTable,
    exact_posterior_marginals,
    exact_posterior_table,
    map_configuration,
    posterior_ratio,
)
