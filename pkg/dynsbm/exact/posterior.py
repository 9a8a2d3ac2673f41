"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.


Exact posterior quantities: node marginals and transition marginals by a
forward-backward pass over joint states, the full configuration table, the
posterior ratio of a configuration and the per-time MAP configuration.
"""

from dataclasses import dataclass
import logging

import numpy as np
from scipy.special import logsumexp

from ..generic.exceptions import NumericalException
from ..model.params import ModelParams
from ..model.sampler import GraphSequence, LatentPaths
from .likelihood import (
    check_bruteforce_size,
    check_data,
    check_transfer_size,
    conditional_loglik,
    configuration_logjoint,
    enumerate_configurations,
    exact_loglik_transfer,
    forward_pass,
    joint_states,
    kron_apply,
    latent_prior_loglik,
    layer_loglik,
    log_connectivity,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PosteriorTable:
    """
    Posterior of the memberships given the graphs.

    Either the full table `log_table` (one log probability per configuration,
    in the order of `enumerate_configurations`), or the marginal tables:
      - singles[t, i, q] = P(Z_i^t = q | X)
      - pairs[t, i, q, l] = P(Z_i^t = q, Z_i^{t+1} = l | X)
      - node_pairs[t, i, j, q, l] = P(Z_i^t = q, Z_j^t = l | X)
    """

    loglik: float
    singles: np.ndarray | None = None
    pairs: np.ndarray | None = None
    node_pairs: np.ndarray | None = None
    log_table: np.ndarray | None = None


def _marginal_over(tensor: np.ndarray, keep: tuple[int, ...]) -> np.ndarray:
    others = tuple(k for k in range(tensor.ndim) if k not in keep)
    return tensor.sum(axis=others)


def exact_posterior_marginals(
    params: ModelParams, x: GraphSequence, with_node_pairs: bool = False
) -> PosteriorTable:
    """
    Forward-backward over the Q^n joint states.

    Args:
        - *params*: model parameters
        - *x*: observed graphs
        - *with_node_pairs*: also return the same-time two-node posteriors

    Returns:
        A PosteriorTable with singles, pairs (and node_pairs) filled
    """
    q, n, T = params.q_classes, x.n, x.T
    if q == 1:
        check_data(params, x)
        loglik = exact_loglik_transfer(params, x).value
        return PosteriorTable(
            loglik=loglik,
            singles=np.ones((T, n, 1)),
            pairs=np.ones((T - 1, n, 1, 1)),
            node_pairs=np.ones((T, n, n, 1, 1)) if with_node_pairs else None,
        )

    filtered, log_norms, emissions, _ = forward_pass(params, x)
    shape = filtered[0].shape
    gamma = params.gamma

    # w[t] = P(X^{t+1} | Z^{t+1}) beta_{t+1} on the scaled forward normalisers
    backward = [None] * T
    weights = [None] * T
    backward[T - 1] = np.ones(shape)
    for t in range(T - 2, -1, -1):
        w = np.exp(emissions[t + 1] - log_norms[t + 1]).reshape(shape) * backward[t + 1]
        weights[t] = w
        backward[t] = kron_apply(w, gamma.T)

    singles = np.empty((T, n, q))
    pairs = np.empty((max(T - 1, 0), n, q, q))
    node_pairs = np.empty((T, n, n, q, q)) if with_node_pairs else None
    for t in range(T):
        joint = filtered[t] * backward[t]
        total = joint.sum()
        if not np.isfinite(total) or total <= 0:
            raise NumericalException(f'posterior normaliser is degenerate at t={t}')
        joint /= total
        for i in range(n):
            singles[t, i] = _marginal_over(joint, (i,))
        if with_node_pairs:
            for i in range(n):
                node_pairs[t, i, i] = np.diag(singles[t, i])
                for j in range(i + 1, n):
                    m = _marginal_over(joint, (i, j))
                    node_pairs[t, i, j] = m
                    node_pairs[t, j, i] = m.T
        if t < T - 1:
            for i in range(n):
                v = kron_apply(weights[t], gamma.T, skip=i)
                f_i = np.moveaxis(filtered[t], i, -1).reshape(-1, q)
                v_i = np.moveaxis(v, i, -1).reshape(-1, q)
                pairs[t, i] = gamma * (f_i.T @ v_i) / total
    return PosteriorTable(
        loglik=float(log_norms.sum()), singles=singles, pairs=pairs, node_pairs=node_pairs
    )


def exact_posterior_table(params: ModelParams, x: GraphSequence) -> PosteriorTable:
    """log P(Z = z | X) for each of the Q^(nT) configurations"""
    check_data(params, x)
    check_bruteforce_size(params.q_classes, x.n, x.T)
    log_joint = np.concatenate(
        [
            configuration_logjoint(params, x, block)
            for block in enumerate_configurations(params.q_classes, x.n, x.T)
        ]
    )
    loglik = float(logsumexp(log_joint))
    return PosteriorTable(loglik=loglik, log_table=log_joint - loglik)


def posterior_ratio(params: ModelParams, x: GraphSequence, z_star: LatentPaths) -> float:
    """
    P(Z != z* | X) / P(Z = z* | X), computed as exp(l(theta) - log P(X, Z = z*)) - 1.
    Returns inf when z* has zero posterior probability.
    """
    check_data(params, x, z_star)
    log_joint = conditional_loglik(params, z_star, x) + latent_prior_loglik(params, z_star)
    if not np.isfinite(log_joint):
        return float('inf')
    loglik = exact_loglik_transfer(params, x).value
    return float(max(np.expm1(loglik - log_joint), 0.0))


def map_configuration(params: ModelParams, x: GraphSequence) -> LatentPaths:
    """
    Per-time maximiser of l_c, which factorises over time steps. Ties go to
    the lexicographically smallest label vector.
    """
    check_data(params, x)
    q, n = params.q_classes, x.n
    check_transfer_size(q, n)
    states = joint_states(q, n)
    lp, l1p = log_connectivity(params, x.T)
    labels = np.empty((n, x.T), dtype=np.int64)
    for t in range(x.T):
        scores = layer_loglik(lp[t], l1p[t], x.adjacency[t], states)
        labels[:, t] = states[int(np.argmax(scores))]
    return LatentPaths(labels)
