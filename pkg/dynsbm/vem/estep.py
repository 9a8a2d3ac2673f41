"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.


E-step of the variational EM.

Holding every other node fixed, the best chain distribution of node i is the
posterior of a hidden Markov chain with prior (alpha, Gamma) and emissions

    log w_i^t(q) = sum_{j != i} sum_l tau_jl^t [X_ij^t log pi_ql + (1 - X_ij^t) log(1 - pi_ql)]

so every node update is one forward-backward pass and J never decreases.
"""

import logging

import numpy as np
from scipy.special import logsumexp

from ..generic.exceptions import ElboDecreasedException, NumericalException
from ..generic.parameters import ASCENT_SLACK, E_STEP_MAX_SWEEPS, E_STEP_TOL
from ..model.params import ModelParams
from ..model.sampler import GraphSequence
from .state import VariationalState, elbo

logger = logging.getLogger(__name__)


def forward_backward(log_init: np.ndarray, log_gamma: np.ndarray, log_emission: np.ndarray):
    """
    Log-space forward-backward for one chain.

    Args:
        - *log_init*: Q initial log probabilities
        - *log_gamma*: Q x Q log transition matrix
        - *log_emission*: T x Q log emission weights

    Returns:
        (tau, eta, log_norm): T x Q posterior marginals, (T-1) x Q x Q
        transition marginals and the log normaliser
    """
    T, q = log_emission.shape
    log_a = np.empty((T, q))
    log_b = np.zeros((T, q))
    log_a[0] = log_init + log_emission[0]
    for t in range(1, T):
        log_a[t] = logsumexp(log_a[t - 1][:, None] + log_gamma, axis=0) + log_emission[t]
    for t in range(T - 2, -1, -1):
        log_b[t] = logsumexp(log_gamma + (log_emission[t + 1] + log_b[t + 1])[None, :], axis=1)
    log_norm = logsumexp(log_a[-1])
    if not np.isfinite(log_norm):
        raise NumericalException('forward-backward normaliser is not finite')

    tau = np.exp(log_a + log_b - log_norm)
    tau /= tau.sum(axis=1, keepdims=True)
    eta = np.exp(
        log_a[:-1, :, None]
        + log_gamma[None]
        + (log_emission[1:] + log_b[1:])[:, None, :]
        - log_norm
    )
    if T > 1:
        # pin the row and column sums on the singleton marginals
        rows = eta.sum(axis=2)
        eta *= np.divide(tau[:-1], rows, out=np.zeros_like(rows), where=rows > 0)[:, :, None]
    return tau, eta, float(log_norm)


def node_emissions(
    log_pi: np.ndarray, log_1m_pi: np.ndarray, x: GraphSequence, tau: np.ndarray, node: int
) -> np.ndarray:
    """T x Q log emission weights of one node given the marginals of the others"""
    adj = x.adjacency
    out = np.empty((x.T, tau.shape[2]))
    for t in range(x.T):
        row = adj[t, node].astype(np.float64)
        linked = row @ tau[t]
        unlinked = tau[t].sum(axis=0) - tau[t, node] - linked
        out[t] = log_pi[t] @ linked + log_1m_pi[t] @ unlinked
    if not np.all(np.isfinite(out)):
        raise NumericalException(f'emission weights of node {node} are not finite')
    return out


def e_step(
    params: ModelParams,
    x: GraphSequence,
    chi_init: VariationalState,
    tol: float = E_STEP_TOL,
    max_sweeps: int = E_STEP_MAX_SWEEPS,
    jacobi: bool = False,
    check_ascent: bool = True,
) -> VariationalState:
    """
    Block coordinate ascent of J over the nodes 0..n-1.

    Args:
        - *params*: current theta
        - *x*: observed graphs
        - *chi_init*: starting state
        - *tol*: stop when max |delta tau| of a sweep falls below this
        - *max_sweeps*: sweep cap
        - *jacobi*: update all nodes from the previous sweep instead of
          in place (ascent is then not guaranteed and not checked)
        - *check_ascent*: raise ElboDecreasedException when J drops by more
          than the slack between two sweeps

    Returns:
        The new VariationalState
    """
    pis = params.pi_stack(x.T)
    log_pi, log_1m_pi = np.log(pis), np.log1p(-pis)
    log_alpha, log_gamma = np.log(params.alpha), np.log(params.gamma)
    tau = np.array(chi_init.tau)
    eta = np.array(chi_init.eta)
    check = check_ascent and not jacobi
    previous = elbo(params, x, chi_init) if check else None

    for sweep in range(max_sweeps):
        source = tau.copy()
        for i in range(x.n):
            emissions = node_emissions(log_pi, log_1m_pi, x, source if jacobi else tau, i)
            tau_i, eta_i, _ = forward_backward(log_alpha, log_gamma, emissions)
            tau[:, i] = tau_i
            eta[:, i] = eta_i
        change = float(np.max(np.abs(tau - source)))
        if check:
            current = elbo(params, x, VariationalState(tau, eta))
            if current < previous - ASCENT_SLACK * max(1.0, abs(previous)):
                raise ElboDecreasedException(
                    f'J went from {previous:.12g} to {current:.12g} in sweep {sweep}'
                )
            previous = current
        logger.debug('e-step sweep %d: max |delta tau| = %.3e', sweep, change)
        if change < tol:
            break
    return VariationalState(tau, eta)
