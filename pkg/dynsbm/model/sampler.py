"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.


Latent Markov membership paths, conditional Bernoulli graph sequences and the
occupancy / transition counts computed from them.

Random streams are derived with numpy.random.SeedSequence:
  - latent paths: seed -> spawn(n), one substream per node, T uniforms each;
  - graphs: seed -> spawn(T), one substream per time step, one uniform per
    pair i<j drawn in row-major upper-triangle order.
Serial and parallel generation therefore give bit-identical outputs.
"""

from dataclasses import dataclass
import logging

import numpy as np

from ..generic.exceptions import InvalidMarginException, ShapeMismatchException
from .params import ModelParams, StationaryDist

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LatentPaths:
    """
    n x T array of class labels in {0, ..., Q-1}; row i is the trajectory
    of node i.
    """

    labels: np.ndarray

    def __post_init__(self):
        labels = np.array(self.labels, dtype=np.int64)
        if labels.ndim != 2 or labels.shape[0] < 1 or labels.shape[1] < 1:
            raise ShapeMismatchException(f'labels must be n x T, got {labels.shape}')
        if np.any(labels < 0):
            raise ShapeMismatchException('labels must be non-negative')
        labels.setflags(write=False)
        object.__setattr__(self, 'labels', labels)

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    @property
    def T(self) -> int:
        return self.labels.shape[1]

    def at(self, t: int) -> np.ndarray:
        return self.labels[:, t]

    def check_classes(self, q_classes: int):
        if self.labels.max() >= q_classes:
            raise ShapeMismatchException(
                f'label {self.labels.max()} out of range for Q={q_classes}'
            )

    def to_dict(self) -> dict:
        return {'labels': self.labels.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> 'LatentPaths':
        return cls(d['labels'])


@dataclass(frozen=True, eq=False)
class GraphSequence:
    """
    T symmetric binary n x n adjacency matrices with an empty diagonal,
    stored as a T x n x n uint8 array.
    """

    adjacency: np.ndarray

    def __post_init__(self):
        adj = np.array(self.adjacency, dtype=np.uint8)
        if adj.ndim != 3 or adj.shape[1] != adj.shape[2] or adj.shape[0] < 1:
            raise ShapeMismatchException(f'adjacency must be T x n x n, got {adj.shape}')
        if np.any(adj > 1):
            raise ShapeMismatchException('adjacency entries must be 0 or 1')
        if np.any(adj != np.swapaxes(adj, 1, 2)):
            raise ShapeMismatchException('adjacency matrices must be symmetric')
        if np.any(np.diagonal(adj, axis1=1, axis2=2)):
            raise ShapeMismatchException('adjacency matrices must have a zero diagonal')
        adj.setflags(write=False)
        object.__setattr__(self, 'adjacency', adj)

    @property
    def T(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n(self) -> int:
        return self.adjacency.shape[1]

    @property
    def n_pairs(self) -> int:
        return self.n * (self.n - 1) // 2

    def as_float(self) -> np.ndarray:
        return self.adjacency.astype(np.float64)

    def edges(self) -> np.ndarray:
        """E x 3 array of (t, i, j) with i < j for every present edge"""
        t, i, j = np.nonzero(np.triu(self.adjacency, k=1))
        return np.stack([t, i, j], axis=1)

    def density(self) -> float:
        if self.n < 2:
            return 0.0
        return len(self.edges()) / (self.T * self.n_pairs)

    def to_dict(self) -> dict:
        return {'n': self.n, 'T': self.T, 'edges': self.edges().tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> 'GraphSequence':
        n, T = int(d['n']), int(d['T'])
        adj = np.zeros((T, n, n), dtype=np.uint8)
        edges = np.asarray(d['edges'], dtype=np.int64).reshape(-1, 3)
        if len(edges):
            if np.any(edges[:, 1] == edges[:, 2]):
                raise ShapeMismatchException('self-loops are not allowed')
            adj[edges[:, 0], edges[:, 1], edges[:, 2]] = 1
            adj[edges[:, 0], edges[:, 2], edges[:, 1]] = 1
        return cls(adj)


@dataclass(frozen=True, eq=False)
class CountSummary:
    n_q: np.ndarray  # T x Q occupancy counts
    n_ql: np.ndarray  # Q x Q transition counts


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    c: np.ndarray

    @property
    def rates(self) -> np.ndarray:
        """a_qq' = C_qq' / N_q, with empty rows left at zero"""
        sizes = self.c.sum(axis=1, keepdims=True)
        return np.divide(self.c, sizes, out=np.zeros(self.c.shape), where=sizes > 0)


def _draw_chains(alpha: np.ndarray, gamma: np.ndarray, u: np.ndarray) -> np.ndarray:
    """
    Turn uniforms u (..., T) into Markov chains started from alpha, by
    inverting the cumulative laws.
    """
    q = len(alpha)
    cum_alpha = np.cumsum(alpha)
    cum_gamma = np.cumsum(gamma, axis=1)
    z = np.empty(u.shape, dtype=np.int64)
    z[..., 0] = np.minimum(np.searchsorted(cum_alpha, u[..., 0], side='right'), q - 1)
    for t in range(1, u.shape[-1]):
        rows = cum_gamma[z[..., t - 1]]
        z[..., t] = np.minimum((u[..., t, None] >= rows).sum(axis=-1), q - 1)
    return z


def sample_latent_paths(params: ModelParams, n: int, T: int, seed: int) -> LatentPaths:
    """
    Draw n independent stationary chains of length T: Z_i^1 ~ alpha, then
    transitions by Gamma.
    """
    if n < 1 or T < 1:
        raise ShapeMismatchException('n and T must be positive')
    alpha = params.alpha
    children = np.random.SeedSequence(seed).spawn(n)
    u = np.stack([np.random.default_rng(c).random(T) for c in children])
    return LatentPaths(_draw_chains(alpha, params.gamma, u))


def sample_latent_batch(
    params: ModelParams, n: int, T: int, replicates: int, seed: int
) -> np.ndarray:
    """
    replicates x n x T labels for Monte Carlo studies, with one substream per
    replicate instead of one per node.
    """
    alpha = params.alpha
    children = np.random.SeedSequence(seed).spawn(replicates)
    u = np.stack([np.random.default_rng(c).random((n, T)) for c in children])
    return _draw_chains(alpha, params.gamma, u)


def sample_graphs(params: ModelParams, z: LatentPaths, seed: int) -> GraphSequence:
    """
    X_ij^t | Z_i^t=q, Z_j^t=l ~ Bernoulli(pi_ql) (pi^t_ql with a time-varying
    pi), independently over pairs i<j and time steps.
    """
    z.check_classes(params.q_classes)
    n, T = z.n, z.T
    pis = params.pi_stack(T)
    iu, ju = np.triu_indices(n, k=1)
    adj = np.zeros((T, n, n), dtype=np.uint8)
    children = np.random.SeedSequence(seed).spawn(T)
    for t in range(T):
        zt = z.at(t)
        u = np.random.default_rng(children[t]).random(len(iu))
        present = (u < pis[t][zt[iu], zt[ju]]).astype(np.uint8)
        adj[t, iu, ju] = present
        adj[t, ju, iu] = present
    logger.debug('sampled %d graphs on %d nodes', T, n)
    return GraphSequence(adj)


def count_summary(z: LatentPaths, q_classes: int | None = None) -> CountSummary:
    """Occupancies N_q(z^t) per time and transition counts N_ql(z^{1:T})"""
    q = int(z.labels.max()) + 1 if q_classes is None else q_classes
    z.check_classes(q)
    n_q = np.stack([np.bincount(z.at(t), minlength=q) for t in range(z.T)])
    n_ql = np.zeros((q, q), dtype=np.int64)
    np.add.at(n_ql, (z.labels[:, :-1].ravel(), z.labels[:, 1:].ravel()), 1)
    return CountSummary(n_q=n_q, n_ql=n_ql)


def confusion_matrix(z_a: np.ndarray, z_b: np.ndarray, q_classes: int | None = None) -> ConfusionMatrix:
    """c[q, q'] = #{i : z_a[i] = q, z_b[i] = q'}"""
    z_a = np.asarray(z_a, dtype=np.int64)
    z_b = np.asarray(z_b, dtype=np.int64)
    if z_a.shape != z_b.shape:
        raise ShapeMismatchException('labelings have different lengths')
    if q_classes is None:
        q_classes = int(max(z_a.max(), z_b.max())) + 1
    c = np.zeros((q_classes, q_classes), dtype=np.int64)
    np.add.at(c, (z_a, z_b), 1)
    return ConfusionMatrix(c)


def omega_eta_member(
    z: LatentPaths, alpha: StationaryDist | np.ndarray, eta: float, delta: float | None = None
) -> bool:
    """
    True iff N_q(z^t)/n >= alpha_q - eta for every time step and class.
    """
    alpha = alpha.alpha if isinstance(alpha, StationaryDist) else np.asarray(alpha)
    upper = 1.0 if delta is None else delta
    if not 0.0 < eta < upper:
        raise InvalidMarginException(f'eta={eta} is not in (0, {upper})')
    counts = count_summary(z, len(alpha))
    return bool(np.all(counts.n_q / z.n >= alpha - eta))
