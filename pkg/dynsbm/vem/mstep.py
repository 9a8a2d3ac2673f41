"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.


Closed-form M-steps of the variational EM and the variational fixed-point
residual of the transition matrix.
"""

import logging

import numpy as np

from ..generic.exceptions import DegenerateClassException, UndefinedResidualException
from ..model.params import ModelParams, clamp_connectivity, project_transition_rows
from ..model.sampler import GraphSequence
from .state import VariationalState, pair_statistics

logger = logging.getLogger(__name__)


def _check_occupancy(occupancy: np.ndarray):
    empty = np.flatnonzero(occupancy <= 0)
    if len(empty):
        raise DegenerateClassException(int(empty[0]), float(occupancy[empty[0]]))


def m_step_gamma(chi: VariationalState, delta: float | None = None) -> tuple[np.ndarray, bool]:
    """
    gamma_ql = sum_{i,t} eta_iql^t / sum_{i,t} tau_iq^t (t < T).

    Args:
        - *chi*: variational state, T >= 2
        - *delta*: when given, the rows are the maximisers of the transition
          term over [delta, 1 - delta] instead of the plain ratio

    Returns:
        (gamma, projected): projected is True when the margin was active
    """
    if chi.T < 2:
        raise UndefinedResidualException('the transition update needs T >= 2')
    counts = chi.eta.sum(axis=(0, 1))
    occupancy = chi.tau[:-1].sum(axis=(0, 1))
    _check_occupancy(occupancy)
    if delta is None:
        return counts / occupancy[:, None], False
    gamma, projected = project_transition_rows(counts, delta)
    if projected:
        logger.debug('gamma update projected onto the delta margin')
    return gamma, projected


def m_step_pi(
    chi: VariationalState,
    x: GraphSequence,
    zeta: float | None = None,
    time_varying: bool = False,
    tie_diagonal: bool = False,
) -> tuple[np.ndarray, bool]:
    """
    pi_ql = sum_t sum_{i<j} (tau_iq tau_jl + tau_il tau_jq) X_ij
            / sum_t sum_{i<j} (tau_iq tau_jl + tau_il tau_jq)

    pooled over t, or per t with time_varying. With tie_diagonal (time
    varying only) the diagonal entries are pooled over t so that they stay
    constant in time.

    Returns:
        (pi, clamped): Q x Q or T x Q x Q, and whether the [zeta, 1 - zeta]
        clamp was active
    """
    stats = [pair_statistics(x.adjacency[t], chi.tau[t]) for t in range(x.T)]
    num = np.stack([edges for edges, _ in stats])
    den = np.stack([edges + non_edges for edges, non_edges in stats])
    if time_varying:
        if np.any(den <= 0):
            t, q, _ = np.argwhere(den <= 0)[0]
            raise DegenerateClassException(int(q), float(chi.tau[t, :, q].sum()))
        pi = num / den
        if tie_diagonal:
            d = np.arange(chi.q_classes)
            pi[:, d, d] = num[:, d, d].sum(axis=0) / den[:, d, d].sum(axis=0)
    else:
        num, den = num.sum(axis=0), den.sum(axis=0)
        if np.any(den <= 0):
            q = int(np.argwhere(den <= 0)[0][0])
            raise DegenerateClassException(q, float(chi.tau[:, :, q].sum()))
        pi = num / den
    if zeta is None:
        return pi, False
    pi, clamped = clamp_connectivity(pi, zeta)
    if clamped:
        logger.debug('pi update clamped onto the zeta margin')
    return pi, clamped


def vem_gamma_fixed_point_residual(params: ModelParams, chi: VariationalState) -> np.ndarray:
    """gamma_ql - sum_{i,t} eta_iql^t / sum_{i,t} tau_iq^t"""
    ratio, _ = m_step_gamma(chi)
    return params.gamma - ratio
