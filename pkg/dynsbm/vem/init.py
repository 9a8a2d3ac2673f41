"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.


Starting points of the variational EM.
"""

import logging

import numpy as np
from scipy.cluster.vq import kmeans2

from ..generic.exceptions import ShapeMismatchException, UnknownStrategyException
from ..generic.parameters import LLOYD_ITERATIONS, SMOOTH_ONE_HOT
from ..model.params import ModelParams
from ..model.sampler import GraphSequence
from .state import VariationalState

logger = logging.getLogger(__name__)

STRATEGIES = ('random-dirichlet', 'spectral-mean-graph', 'warm-start')


def smoothed_one_hot(labels: np.ndarray, q_classes: int) -> np.ndarray:
    """SMOOTH_ONE_HOT on the label, the rest spread evenly on the other classes"""
    if q_classes == 1:
        return np.ones((len(labels), 1))
    out = np.full((len(labels), q_classes), (1.0 - SMOOTH_ONE_HOT) / (q_classes - 1))
    out[np.arange(len(labels)), labels] = SMOOTH_ONE_HOT
    return out


def _spread_centroids(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Farthest-point seeds for Lloyd's iterations, the first one drawn at random"""
    chosen = [int(rng.integers(len(points)))]
    dist = np.sum((points - points[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        nxt = int(np.argmax(dist))
        chosen.append(nxt)
        dist = np.minimum(dist, np.sum((points - points[nxt]) ** 2, axis=1))
    return points[chosen]


def spectral_labels(x: GraphSequence, q_classes: int, rng: np.random.Generator) -> np.ndarray:
    """
    Cluster the rows of the top-Q eigenvectors (largest |eigenvalue|) of the
    time-averaged adjacency matrix.
    """
    if q_classes == 1:
        return np.zeros(x.n, dtype=np.int64)
    mean_graph = x.as_float().mean(axis=0)
    values, vectors = np.linalg.eigh(mean_graph)
    top = np.argsort(-np.abs(values), kind='stable')[:q_classes]
    embedding = vectors[:, top]
    seeds = _spread_centroids(embedding, q_classes, rng)
    _, labels = kmeans2(embedding, seeds, iter=LLOYD_ITERATIONS, minit='matrix', missing='warn')
    return labels.astype(np.int64)


def init_tau(
    x: GraphSequence,
    q_classes: int,
    strategy: str,
    seed: int,
    warm_start: VariationalState | ModelParams | None = None,
) -> VariationalState:
    """
    Initial variational state.

    Args:
        - *x*: observed graphs
        - *q_classes*: number of classes
        - *strategy*: 'random-dirichlet', 'spectral-mean-graph' or 'warm-start'
        - *seed*: seed of the strategy's random stream
        - *warm_start*: a VariationalState to copy, or parameters whose
          prior marginals are used ('warm-start' only)

    Returns:
        VariationalState whose eta is the product tau^t tau^{t+1}, or the warm
        start itself
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    if strategy == 'random-dirichlet':
        tau = rng.dirichlet(np.ones(q_classes), size=(x.T, x.n))
    elif strategy == 'spectral-mean-graph':
        labels = spectral_labels(x, q_classes, rng)
        tau = np.broadcast_to(smoothed_one_hot(labels, q_classes), (x.T, x.n, q_classes))
    elif strategy == 'warm-start':
        if isinstance(warm_start, VariationalState):
            if (warm_start.T, warm_start.n, warm_start.q_classes) != (x.T, x.n, q_classes):
                raise ShapeMismatchException('warm start state does not match the data')
            return warm_start
        if isinstance(warm_start, ModelParams):
            return VariationalState.prior_marginals(warm_start, x.n, x.T)
        raise UnknownStrategyException('warm-start needs a state or parameters')
    else:
        raise UnknownStrategyException(
            f'unknown strategy {strategy!r}, expected one of {", ".join(STRATEGIES)}'
        )
    logger.debug('initialised tau with %s (seed %d)', strategy, seed)
    return VariationalState.from_tau(tau)
