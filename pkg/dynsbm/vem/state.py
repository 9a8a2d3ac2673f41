"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.


Variational family: independent nodes, each with a Markov chain distribution
over its class path given by singleton marginals tau and transition marginals
eta, and the lower bound J(chi, theta) of the log-likelihood.
"""

from dataclasses import dataclass, field
import logging

import numpy as np
from scipy.special import xlogy

from ..generic.exceptions import NumericalException, ShapeMismatchException
from ..generic.parameters import ASCENT_SLACK, CHAIN_TOL
from ..model.params import ModelParams
from ..model.sampler import GraphSequence, LatentPaths

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class VariationalState:
    """
    chi = (tau, eta).

    Args:
        - *tau*: T x n x Q marginals tau[t, i, q] of Z_i^t = q
        - *eta*: (T-1) x n x Q x Q marginals eta[t, i, q, l] of
          (Z_i^t, Z_i^{t+1}) = (q, l)
    """

    tau: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        tau = np.array(self.tau, dtype=np.float64)
        eta = np.array(self.eta, dtype=np.float64)
        if tau.ndim != 3:
            raise ShapeMismatchException(f'tau must be T x n x Q, got {tau.shape}')
        T, n, q = tau.shape
        if eta.shape != (T - 1, n, q, q):
            raise ShapeMismatchException(f'eta must be {(T - 1, n, q, q)}, got {eta.shape}')
        tau.setflags(write=False)
        eta.setflags(write=False)
        object.__setattr__(self, 'tau', tau)
        object.__setattr__(self, 'eta', eta)

    @property
    def T(self) -> int:
        return self.tau.shape[0]

    @property
    def n(self) -> int:
        return self.tau.shape[1]

    @property
    def q_classes(self) -> int:
        return self.tau.shape[2]

    def violation(self) -> float:
        """Largest breach of normalisation, chain consistency or positivity"""
        worst = float(np.max(np.abs(self.tau.sum(axis=-1) - 1.0)))
        worst = max(worst, float(max(0.0, -self.tau.min())))
        if self.T > 1:
            worst = max(worst, float(np.max(np.abs(self.eta.sum(axis=(-2, -1)) - 1.0))))
            worst = max(worst, float(np.max(np.abs(self.eta.sum(axis=-1) - self.tau[:-1]))))
            worst = max(worst, float(np.max(np.abs(self.eta.sum(axis=-2) - self.tau[1:]))))
            worst = max(worst, float(max(0.0, -self.eta.min())))
        return worst

    def check_consistency(self, tol: float = CHAIN_TOL):
        worst = self.violation()
        if worst > tol:
            raise NumericalException(f'variational state is inconsistent by {worst:.3e}')

    def class_mass(self) -> np.ndarray:
        """sum_{i,t} tau[t, i, q] per class"""
        return self.tau.sum(axis=(0, 1))

    def hard_labels(self) -> LatentPaths:
        return LatentPaths(np.argmax(self.tau, axis=-1).T)

    @classmethod
    def dirac(cls, z: LatentPaths, q_classes: int) -> 'VariationalState':
        """Point mass at the configuration z"""
        z.check_classes(q_classes)
        eye = np.eye(q_classes)
        tau = eye[z.labels.T]
        eta = tau[:-1, :, :, None] * tau[1:, :, None, :]
        return cls(tau, eta)

    @classmethod
    def prior_marginals(cls, params: ModelParams, n: int, T: int) -> 'VariationalState':
        """The prior Markov law of theta: tau = alpha, eta = alpha_q gamma_ql"""
        alpha = params.alpha
        tau = np.broadcast_to(alpha, (T, n, len(alpha)))
        joint = alpha[:, None] * params.gamma
        eta = np.broadcast_to(joint, (T - 1, n) + joint.shape)
        return cls(tau, eta)

    @classmethod
    def from_tau(cls, tau: np.ndarray) -> 'VariationalState':
        """
        Independent-in-time state eta = tau^t tau^{t+1}, which satisfies the
        chain constraints for any normalised tau.
        """
        tau = np.asarray(tau, dtype=np.float64)
        eta = tau[:-1, :, :, None] * tau[1:, :, None, :]
        return cls(tau, eta)

    def to_dict(self) -> dict:
        return {'tau': self.tau.tolist(), 'eta': self.eta.tolist()}


@dataclass
class ElboTrace:
    """
    J after every E-step of a run.

    coupling[k] is the change of sum_q tau^1_q log alpha_q caused by
    recomputing alpha from the new Gamma between values[k] and values[k+1];
    every other part of an iteration is an exact ascent step, so
    values[k+1] - values[k] >= coupling[k] up to rounding. The driver halves
    any Gamma step whose coupling would lower J (backtracks[k] halvings), so
    the values themselves are non-decreasing as well.
    """

    values: list[float] = field(default_factory=list)
    coupling: list[float] = field(default_factory=list)
    backtracks: list[int] = field(default_factory=list)
    converged: bool = False
    iterations: int = 0

    def is_non_decreasing(self, slack: float = ASCENT_SLACK) -> bool:
        steps = np.diff(self.values)
        scale = np.maximum(1.0, np.abs(self.values[:-1]))
        return bool(np.all(steps >= -slack * scale))

    def is_monotone(self, slack: float = ASCENT_SLACK) -> bool:
        for k in range(len(self.values) - 1):
            scale = max(1.0, abs(self.values[k]))
            if self.values[k + 1] - self.values[k] - self.coupling[k] < -slack * scale:
                return False
        return True

    def adjusted(self) -> np.ndarray:
        """Values with the accumulated coupling removed: non-decreasing"""
        shift = np.concatenate([[0.0], np.cumsum(self.coupling[: len(self.values) - 1])])
        return np.asarray(self.values) - shift


def edge_term(params: ModelParams, x: GraphSequence, tau: np.ndarray) -> float:
    """
    sum_t sum_{i<j} sum_{q,l} tau_iq tau_jl [X log pi_ql + (1 - X) log(1 - pi_ql)]
    """
    pis = params.pi_stack(x.T)
    total = 0.0
    for t in range(x.T):
        edges, non_edges = pair_statistics(x.adjacency[t], tau[t])
        total += 0.5 * np.sum(np.log(pis[t]) * edges + np.log1p(-pis[t]) * non_edges)
    return float(total)


def pair_statistics(adjacency_t: np.ndarray, tau_t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Expected (edge, non-edge) counts over ordered pairs i != j between
    classes at one time step: tau^T X tau and (sum tau)(sum tau)^T - tau^T tau - tau^T X tau.
    """
    x = adjacency_t.astype(np.float64)
    edges = tau_t.T @ x @ tau_t
    mass = tau_t.sum(axis=0)
    pairs = np.outer(mass, mass) - tau_t.T @ tau_t
    return edges, pairs - edges


def elbo(params: ModelParams, x: GraphSequence, chi: VariationalState) -> float:
    """
    J(chi, theta) = edge terms + initial terms + transition terms + entropy,
    with 0 log 0 = 0.
    """
    chi.check_consistency()
    if (chi.T, chi.n, chi.q_classes) != (x.T, x.n, params.q_classes):
        raise ShapeMismatchException('state, graphs and parameters disagree on T, n or Q')
    tau, eta = chi.tau, chi.eta
    value = edge_term(params, x, tau)
    value += float(np.sum(xlogy(tau[0], params.alpha)))
    value += float(np.sum(xlogy(eta, params.gamma)))
    value -= float(np.sum(xlogy(tau[0], tau[0])))
    value -= float(np.sum(xlogy(eta, eta) - xlogy(eta, tau[:-1, :, :, None])))
    return value
