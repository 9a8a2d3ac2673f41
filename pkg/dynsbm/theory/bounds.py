"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.


Numerical checks of the combinatorial and concentration bounds used by the
consistency results: size of the discrepancy set between two configurations,
occupancy concentration, transition-frequency concentration and the pair
occupancy moment bound.
"""

from dataclasses import dataclass, field
import logging

import numpy as np
import pandas as pd

from ..generic.exceptions import InvalidMarginException, ShapeMismatchException
from ..generic.parameters import IDENTIFIABILITY_TOL, MC_SIGMAS
from ..model.params import LabelPermutation, ModelParams, doeblin_coefficient
from ..model.sampler import LatentPaths, omega_eta_member, sample_latent_batch

logger = logging.getLogger(__name__)

BATCH_REPLICATES = 1000  # Replicates sampled per batch of the concentration report
TRANSITION_QUANTILES = (0.5, 0.9, 0.99)


def hamming(z_a: LatentPaths, z_b: LatentPaths) -> int:
    """Number of (i, t) with different labels"""
    if z_a.labels.shape != z_b.labels.shape:
        raise ShapeMismatchException(
            f'configurations are {z_a.labels.shape} and {z_b.labels.shape}'
        )
    return int(np.count_nonzero(z_a.labels != z_b.labels))


def hamming_up_to_permutation(z: LatentPaths, z_star: LatentPaths, q_classes: int) -> int:
    """sum_t min_sigma #{i : sigma(z_i^t) != z*_i^t}"""
    if z.labels.shape != z_star.labels.shape:
        raise ShapeMismatchException('configurations have different shapes')
    total = 0
    for t in range(z.T):
        total += min(
            int(np.count_nonzero(sigma.relabel(z.at(t)) != z_star.at(t)))
            for sigma in LabelPermutation.all(q_classes)
        )
    return total


@dataclass(frozen=True)
class DiscrepancyReport:
    """
    Size of D(z, pi) = {(i<j, t) : pi_{z_i z_j} != pi_{z*_i z*_j}} and its
    bounds.

    The upper bound 2 n r uses the plain Hamming distance r. The lower bound
    (delta - eta)^2 n r_equiv / 4 uses the distance up to a relabelling at each
    time step, since relabelling z by a permutation that leaves pi invariant
    does not change D. It is only guaranteed when z* is in Omega_eta.
    """

    r: int
    d_size: int
    lower_bound: float
    upper_bound: float
    r_equiv: int
    in_omega: bool | None = None

    @property
    def lower_ok(self) -> bool:
        return self.lower_bound <= self.d_size

    @property
    def upper_ok(self) -> bool:
        return self.d_size <= self.upper_bound


def discrepancy_set_size(
    z: LatentPaths,
    z_star: LatentPaths,
    pi: np.ndarray,
    delta: float,
    eta: float,
    alpha: np.ndarray | None = None,
) -> DiscrepancyReport:
    """
    Count the discrepancy set of z against z* for the connectivity pi.

    Args:
        - *z*, *z_star*: configurations of identical shape
        - *pi*: Q x Q connectivity, or T x Q x Q per time step
        - *delta*, *eta*: margins entering the lower bound, eta in (0, delta)
        - *alpha*: stationary law; when given, Omega_eta membership of z* is
          tested and stored in the report
    """
    if not 0.0 < eta < delta:
        raise InvalidMarginException(f'eta={eta} is not in (0, delta={delta})')
    if z.labels.shape != z_star.labels.shape:
        raise ShapeMismatchException('configurations have different shapes')
    pi = np.asarray(pi, dtype=np.float64)
    q = pi.shape[-1]
    z.check_classes(q)
    z_star.check_classes(q)
    pis = pi if pi.ndim == 3 else np.broadcast_to(pi, (z.T,) + pi.shape)
    iu, ju = np.triu_indices(z.n, k=1)
    d_size = 0
    for t in range(z.T):
        a = pis[t][z.at(t)[iu], z.at(t)[ju]]
        b = pis[t][z_star.at(t)[iu], z_star.at(t)[ju]]
        d_size += int(np.count_nonzero(np.abs(a - b) > IDENTIFIABILITY_TOL))
    r = hamming(z, z_star)
    r_equiv = hamming_up_to_permutation(z, z_star, q)
    in_omega = None if alpha is None else omega_eta_member(z_star, alpha, eta, delta)
    return DiscrepancyReport(
        r=r,
        d_size=d_size,
        lower_bound=(delta - eta) ** 2 * z.n * r_equiv / 4.0,
        upper_bound=2.0 * z.n * r,
        r_equiv=r_equiv,
        in_omega=in_omega,
    )


@dataclass(frozen=True)
class ConcentrationCheck:
    name: str
    estimate: float
    standard_error: float
    bound: float
    passed: bool
    q50: float | None = None
    q90: float | None = None
    q99: float | None = None


@dataclass
class ConcentrationReport:
    n: int
    T: int
    replicates: int
    eta: float
    checks: list[ConcentrationCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> ConcentrationCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([vars(c) for c in self.checks])

    def to_dict(self) -> dict:
        return {
            'n': self.n,
            'T': self.T,
            'replicates': self.replicates,
            'eta': self.eta,
            'passed': self.passed,
            'checks': [vars(c) for c in self.checks],
        }

    def __str__(self):
        output = f'n={self.n} T={self.T} replicates={self.replicates} eta={self.eta}\n'
        output += self.to_frame().to_string(index=False)
        return output


def _check(name, samples, bound, sigmas=MC_SIGMAS, quantiles=False) -> ConcentrationCheck:
    samples = np.asarray(samples, dtype=np.float64)
    estimate = float(samples.mean())
    se = float(samples.std(ddof=1) / np.sqrt(len(samples))) if len(samples) > 1 else 0.0
    levels = {}
    if quantiles:
        q50, q90, q99 = np.quantile(samples, TRANSITION_QUANTILES)
        levels = {'q50': float(q50), 'q90': float(q90), 'q99': float(q99)}
    return ConcentrationCheck(
        name, estimate, se, float(bound), estimate <= bound + sigmas * se, **levels
    )


def concentration_report(
    params: ModelParams, n: int, T: int, replicates: int, seed: int, eta: float | None = None
) -> ConcentrationReport:
    """
    Monte Carlo estimates, each against its bound (pass: estimate <= bound +
    3 standard errors):
      - 'omega_failure': P(Omega_eta fails) against Q T exp(-2 eta^2 n)
      - 'transition_q_l': E|N_ql / (n(T-1)) - alpha_q gamma_ql|, with its
        50, 90 and 99% quantiles, against
        sqrt([p(1-p) + 2p/(1-r)] / (n(T-1))), p = alpha_q gamma_ql and r the
        Doeblin coefficient of Gamma (T >= 2 only)
      - 'pairs_q_l': E|N_q(N_l - 1[q=l]) / (n(n-1)) - alpha_q alpha_l| at
        t = 0 against 2 sqrt(n) / (n-1) (n >= 2 only)

    Args:
        - *params*: parameters with a stationary pi
        - *n*, *T*: sizes of the sampled paths
        - *replicates*: Monte Carlo sample size
        - *seed*: master seed
        - *eta*: occupancy slack in (0, delta), delta/2 by default
    """
    eta = params.delta / 2.0 if eta is None else eta
    if not 0.0 < eta < params.delta:
        raise InvalidMarginException(f'eta={eta} is not in (0, delta={params.delta})')
    q = params.q_classes
    alpha, gamma = params.alpha, params.gamma
    classes = np.arange(q)

    fails, trans_dev, pair_dev = [], [], []
    sizes = [min(BATCH_REPLICATES, replicates - s) for s in range(0, replicates, BATCH_REPLICATES)]
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    for size, child in zip(sizes, children):
        labels = sample_latent_batch(params, n, T, size, int(child.generate_state(1)[0]))
        one_hot = labels[..., None] == classes  # R x n x T x Q
        counts = one_hot.sum(axis=1)  # R x T x Q
        fails.append(np.any(counts / n < alpha - eta, axis=(1, 2)))
        if T > 1:
            trans = np.einsum('rntq,rntl->rql', one_hot[:, :, :-1], one_hot[:, :, 1:], dtype=np.float64)
            trans_dev.append(np.abs(trans / (n * (T - 1)) - alpha[:, None] * gamma))
        if n > 1:
            c0 = counts[:, 0].astype(np.float64)
            pairs = c0[:, :, None] * c0[:, None, :] - np.eye(q) * c0[:, :, None]
            pair_dev.append(np.abs(pairs / (n * (n - 1)) - np.outer(alpha, alpha)))

    report = ConcentrationReport(n=n, T=T, replicates=replicates, eta=eta)
    report.checks.append(
        _check('omega_failure', np.concatenate(fails), q * T * np.exp(-2.0 * eta**2 * n))
    )
    if trans_dev:
        dev = np.concatenate(trans_dev)
        r = doeblin_coefficient(gamma)
        p = alpha[:, None] * gamma
        bound = np.sqrt((p * (1 - p) + 2 * p / (1 - r)) / (n * (T - 1)))
        for a in range(q):
            for b in range(q):
                report.checks.append(
                    _check(f'transition_{a}_{b}', dev[:, a, b], bound[a, b], quantiles=True)
                )
    if pair_dev:
        dev = np.concatenate(pair_dev)
        bound = 2.0 * np.sqrt(n) / (n - 1)
        for a in range(q):
            for b in range(a, q):
                report.checks.append(_check(f'pairs_{a}_{b}', dev[:, a, b], bound))
    for c in report.checks:
        if not c.passed:
            logger.warning('concentration check %s: %.4g above bound %.4g', c.name, c.estimate, c.bound)
    return report
