"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.


Exact conditional, prior and marginal log-likelihoods at desk scale.

The marginal log-likelihood sums exp(l_c + log prior) over all Q^(nT) latent
configurations. Two evaluations are offered:
  - brute force enumeration, in vectorized chunks reduced by log-sum-exp;
  - a forward recursion over the Q^n joint states of all nodes, using that
    the graphs are independent given the memberships and that the joint
    transition kernel is the n-th Kronecker power of Gamma.
"""

from dataclasses import dataclass
import logging

import numpy as np
from scipy.special import logsumexp

from ..generic.exceptions import (
    NumericalException,
    ShapeMismatchException,
    UnsupportedSizeException,
)
from ..generic.parameters import ENUMERATION_CHUNK, MAX_CONFIGURATIONS, MAX_JOINT_STATES
from ..model.params import ModelParams
from ..model.sampler import GraphSequence, LatentPaths

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LogLikValue:
    value: float
    n_terms: int  # enumerated configurations or transfer states


def log_connectivity(params: ModelParams, T: int) -> tuple[np.ndarray, np.ndarray]:
    """log(pi^t) and log(1 - pi^t) as T x Q x Q arrays"""
    pis = params.pi_stack(T)
    return np.log(pis), np.log1p(-pis)


def check_data(params: ModelParams, x: GraphSequence, z: LatentPaths | None = None):
    params.pi_stack(x.T)
    if z is not None:
        if (z.n, z.T) != (x.n, x.T):
            raise ShapeMismatchException(
                f'paths are {z.n} x {z.T} but graphs are {x.n} nodes x {x.T} steps'
            )
        z.check_classes(params.q_classes)


def conditional_loglik(params: ModelParams, z: LatentPaths, x: GraphSequence) -> float:
    """
    l_c(theta; z) = sum_t sum_{i<j} X log pi_{z_i z_j} + (1 - X) log(1 - pi_{z_i z_j})
    """
    check_data(params, x, z)
    lp, l1p = log_connectivity(params, x.T)
    iu, ju = np.triu_indices(x.n, k=1)
    total = 0.0
    for t in range(x.T):
        zi, zj = z.labels[iu, t], z.labels[ju, t]
        edge = x.adjacency[t, iu, ju]
        total += np.sum(np.where(edge == 1, lp[t][zi, zj], l1p[t][zi, zj]))
    return float(total)


def latent_prior_loglik(params: ModelParams, z: LatentPaths) -> float:
    """
    log P_theta(Z = z) = sum_i log alpha_{z_i^1} + sum_{i,t} log gamma_{z_i^t z_i^{t+1}}
    """
    z.check_classes(params.q_classes)
    log_alpha = np.log(params.alpha)
    log_gamma = np.log(params.gamma)
    value = log_alpha[z.labels[:, 0]].sum()
    value += log_gamma[z.labels[:, :-1], z.labels[:, 1:]].sum()
    return float(value)


def joint_states(q: int, n: int) -> np.ndarray:
    """
    All Q^n label vectors of n nodes as an S x n array, in lexicographic
    (C) order so that row s matches the flat index of a (Q,)*n tensor.
    """
    if q == 1:
        return np.zeros((1, n), dtype=np.int64)
    return np.indices((q,) * n).reshape(n, -1).T


def tensor_shape(q: int, n: int) -> tuple:
    """Shape of a joint-state tensor; a single class collapses to one axis"""
    return (q,) * n if q > 1 else (1,)


def layer_loglik(lp_t: np.ndarray, l1p_t: np.ndarray, x_t: np.ndarray, states: np.ndarray) -> np.ndarray:
    """
    log P(X^t | Z^t = s) for every joint state s (rows of `states`)
    """
    n = states.shape[1]
    out = np.zeros(states.shape[0])
    for i in range(n):
        for j in range(i + 1, n):
            table = lp_t if x_t[i, j] else l1p_t
            out += table[states[:, i], states[:, j]]
    return out


def kron_apply(tensor: np.ndarray, matrix: np.ndarray, skip: int | None = None) -> np.ndarray:
    """
    Contract every axis k of a (Q,)*n tensor with `matrix` on its first axis,
    i.e. apply the n-th Kronecker power of `matrix`. Axis `skip` is carried
    through untouched. Axis order is preserved.
    """
    if matrix.shape[0] == 1:
        return tensor
    for k in range(tensor.ndim):
        if k == skip:
            tensor = np.moveaxis(tensor, 0, -1)
        else:
            tensor = np.tensordot(tensor, matrix, axes=([0], [0]))
    return tensor


def check_transfer_size(q: int, n: int):
    if q > 1 and n * np.log(q) > np.log(MAX_JOINT_STATES) + 1e-9:
        raise UnsupportedSizeException(
            f'Q^n = {q}^{n} joint states exceed the cap of {MAX_JOINT_STATES}'
        )


def check_bruteforce_size(q: int, n: int, T: int):
    if q > 1 and n * T * np.log(q) > np.log(MAX_CONFIGURATIONS) + 1e-9:
        raise UnsupportedSizeException(
            f'Q^(nT) = {q}^{n * T} configurations exceed the cap of {MAX_CONFIGURATIONS}'
        )


def enumerate_configurations(q: int, n: int, T: int, chunk: int = ENUMERATION_CHUNK):
    """
    Yield blocks of latent configurations as c x n x T label arrays, in
    lexicographic order of the row-major flattened n x T array.
    """
    total = q ** (n * T)
    powers = q ** np.arange(n * T - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        digits = (codes[:, None] // powers[None, :]) % q
        yield digits.reshape(-1, n, T)


def configuration_logjoint(params: ModelParams, x: GraphSequence, labels: np.ndarray) -> np.ndarray:
    """
    l_c(theta; z) + log P_theta(Z = z) for a block of configurations (c x n x T)
    """
    lp, l1p = log_connectivity(params, x.T)
    log_alpha = np.log(params.alpha)
    log_gamma = np.log(params.gamma)
    iu, ju = np.triu_indices(x.n, k=1)
    out = log_alpha[labels[:, :, 0]].sum(axis=1)
    out += log_gamma[labels[:, :, :-1], labels[:, :, 1:]].sum(axis=(1, 2))
    for t in range(x.T):
        zi, zj = labels[:, iu, t], labels[:, ju, t]
        edge = x.adjacency[t, iu, ju][None, :] == 1
        out += np.where(edge, lp[t][zi, zj], l1p[t][zi, zj]).sum(axis=1)
    return out


def exact_loglik_bruteforce(params: ModelParams, x: GraphSequence) -> LogLikValue:
    """
    log sum_z exp(l_c(theta; z) + log P_theta(Z = z)) by explicit enumeration
    """
    check_data(params, x)
    q = params.q_classes
    check_bruteforce_size(q, x.n, x.T)
    partial = [
        logsumexp(configuration_logjoint(params, x, block))
        for block in enumerate_configurations(q, x.n, x.T)
    ]
    value = float(logsumexp(partial))
    if not np.isfinite(value):
        raise NumericalException('brute force log-likelihood is not finite')
    return LogLikValue(value=value, n_terms=q ** (x.n * x.T))


def transfer_emissions(params: ModelParams, x: GraphSequence, states: np.ndarray) -> np.ndarray:
    """T x S array of log P(X^t | Z^t = s)"""
    lp, l1p = log_connectivity(params, x.T)
    return np.stack([layer_loglik(lp[t], l1p[t], x.adjacency[t], states) for t in range(x.T)])


def forward_pass(params: ModelParams, x: GraphSequence):
    """
    Scaled forward recursion over joint states.

    Returns:
        (filtered, log_norms, emissions, states) where filtered[t] is
        P(Z^t = s | X^{1:t}) as a (Q,)*n tensor and sum(log_norms) is l(theta).
    """
    check_data(params, x)
    q, n = params.q_classes, x.n
    check_transfer_size(q, n)
    states = joint_states(q, n)
    shape = tensor_shape(q, n)
    emissions = transfer_emissions(params, x, states)
    log_prior = np.log(params.alpha)[states].sum(axis=1)
    filtered, log_norms = [], []
    log_f = log_prior + emissions[0]
    for t in range(x.T):
        if t > 0:
            pred = kron_apply(filtered[-1], params.gamma).ravel()
            log_f = np.log(pred) + emissions[t]
        c = logsumexp(log_f)
        if not np.isfinite(c):
            raise NumericalException(f'forward recursion is not finite at t={t}')
        filtered.append(np.exp(log_f - c).reshape(shape))
        log_norms.append(float(c))
    return filtered, np.asarray(log_norms), emissions, states


def exact_loglik_transfer(params: ModelParams, x: GraphSequence) -> LogLikValue:
    """Same value as the brute force sum at a cost of order T n Q^(n+1)"""
    _, log_norms, _, states = forward_pass(params, x)
    return LogLikValue(value=float(log_norms.sum()), n_terms=states.shape[0])


def exact_loglik(params: ModelParams, x: GraphSequence, method: str = 'transfer') -> LogLikValue:
    if method == 'transfer':
        return exact_loglik_transfer(params, x)
    elif method == 'brute':
        return exact_loglik_bruteforce(params, x)
    raise ValueError(f'unknown method {method!r}')


def normalization(n: int, T: int) -> float:
    """2 / (n(n-1)T), the scale of M_{n,T}"""
    if n < 2:
        raise ShapeMismatchException('the normalized likelihood needs n >= 2')
    return 2.0 / (n * (n - 1) * T)


def normalized_loglik(params: ModelParams, x: GraphSequence, method: str = 'transfer') -> float:
    """M_{n,T}(theta) = 2 / (n(n-1)T) l(theta)"""
    return normalization(x.n, x.T) * exact_loglik(params, x, method).value
