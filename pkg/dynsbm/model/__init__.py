"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.
"""

from .params import (
    LabelPermutation,
    ModelParams,
    StationaryDist,
    align_by_pi,
    align_by_pi_per_time,
    aligned_errors,
    bernoulli_entropy,
    bernoulli_kl,
    doeblin_coefficient,
    permute_params,
    stationary_distribution,
    validate_theta,
)
from .sampler import (
    ConfusionMatrix,
    CountSummary,
    GraphSequence,
    LatentPaths,
    confusion_matrix,
    count_summary,
    omega_eta_member,
    sample_graphs,
    sample_latent_batch,
    sample_latent_paths,
)
