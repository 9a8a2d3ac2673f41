"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.


Parameter containers of the dynamic SBM, validity checks of the parameter sets
(stationary connectivity and time-varying connectivity), stationary laws,
label permutations and a couple of information quantities.
"""

from dataclasses import dataclass, field
from itertools import permutations
import logging

import numpy as np
from scipy.special import rel_entr, xlogy

from ..generic.exceptions import (
    DomainException,
    InvalidMarginException,
    NumericalException,
    ShapeMismatchException,
    UnsupportedSizeException,
)
from ..generic.parameters import (
    CONDITION_MAX,
    DELTA,
    IDENTIFIABILITY_TOL,
    MAX_ALIGN_CLASSES,
    STATIONARY_TOL,
    STOCHASTIC_TOL,
    SYMMETRY_TOL,
    ZETA,
)

logger = logging.getLogger(__name__)


def _frozen(a, dtype=np.float64) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ModelParams:
    """
    The estimand theta = (Gamma, pi) of the dynamic SBM.

    Args:
        - *gamma*: Q x Q row-stochastic transition matrix
        - *pi*: Q x Q symmetric connectivity matrix, or a T x Q x Q stack of
          them for the finite-T model
        - *delta*: margin of the transition matrix, in (0, 1/Q)
        - *zeta*: margin of the connectivity, in (0, 1/2)
    """

    gamma: np.ndarray
    pi: np.ndarray
    delta: float = DELTA
    zeta: float = ZETA

    def __post_init__(self):
        object.__setattr__(self, 'gamma', _frozen(self.gamma))
        object.__setattr__(self, 'pi', _frozen(self.pi))
        gamma, pi = self.gamma, self.pi
        if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1] or gamma.shape[0] < 1:
            raise ShapeMismatchException(f'gamma must be Q x Q, got {gamma.shape}')
        q = gamma.shape[0]
        if pi.ndim not in (2, 3) or pi.shape[-2:] != (q, q) or (pi.ndim == 3 and pi.shape[0] < 1):
            raise ShapeMismatchException(
                f'pi must be {q} x {q} or T x {q} x {q}, got {pi.shape}'
            )

    @property
    def q_classes(self) -> int:
        return self.gamma.shape[0]

    @property
    def time_varying(self) -> bool:
        """True for the finite-T model with one connectivity matrix per time step"""
        return self.pi.ndim == 3

    @property
    def n_times(self) -> int | None:
        """Number of time steps fixed by a time-varying pi, None otherwise"""
        return self.pi.shape[0] if self.time_varying else None

    def pi_at(self, t: int) -> np.ndarray:
        return self.pi[t] if self.time_varying else self.pi

    def pi_stack(self, T: int) -> np.ndarray:
        """
        Return the connectivity as a T x Q x Q array, broadcasting the
        stationary matrix over time.
        """
        if self.time_varying:
            if self.pi.shape[0] != T:
                raise ShapeMismatchException(
                    f'pi has {self.pi.shape[0]} time slices, data has {T}'
                )
            return self.pi
        return np.broadcast_to(self.pi, (T,) + self.pi.shape)

    @property
    def alpha(self) -> np.ndarray:
        return stationary_distribution(self.gamma).alpha

    def replace(self, **changes) -> 'ModelParams':
        fields = dict(gamma=self.gamma, pi=self.pi, delta=self.delta, zeta=self.zeta)
        fields.update(changes)
        return ModelParams(**fields)

    def to_dict(self) -> dict:
        return {
            'Q': self.q_classes,
            'gamma': self.gamma.tolist(),
            'pi': self.pi.tolist(),
            'delta': float(self.delta),
            'zeta': float(self.zeta),
        }

    @classmethod
    def from_dict(cls, d: dict) -> 'ModelParams':
        params = cls(
            gamma=d['gamma'],
            pi=d['pi'],
            delta=d.get('delta', DELTA),
            zeta=d.get('zeta', ZETA),
        )
        if 'Q' in d and int(d['Q']) != params.q_classes:
            raise ShapeMismatchException(
                f'declared Q={d["Q"]} but gamma is {params.q_classes} x {params.q_classes}'
            )
        return params

    def __str__(self):
        output = 'Classes:       ' + str(self.q_classes) + '\n'
        output += 'Time varying:  ' + str(self.time_varying) + '\n'
        output += 'delta / zeta:  ' + f'{self.delta} / {self.zeta}' + '\n'
        output += 'gamma:\n' + np.array2string(self.gamma, precision=4) + '\n'
        output += 'pi:\n' + np.array2string(self.pi, precision=4)
        return output


@dataclass(frozen=True, eq=False)
class StationaryDist:
    alpha: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'alpha', _frozen(self.alpha))


@dataclass(frozen=True)
class LabelPermutation:
    """
    A bijection sigma of {0, ..., Q-1}, stored as the tuple
    (sigma(0), ..., sigma(Q-1)).
    """

    mapping: tuple[int, ...]

    def __post_init__(self):
        mapping = tuple(int(s) for s in self.mapping)
        if sorted(mapping) != list(range(len(mapping))):
            raise ShapeMismatchException(f'{mapping} is not a permutation')
        object.__setattr__(self, 'mapping', mapping)

    @classmethod
    def identity(cls, q: int) -> 'LabelPermutation':
        return cls(tuple(range(q)))

    @classmethod
    def all(cls, q: int):
        for p in permutations(range(q)):
            yield cls(p)

    @property
    def size(self) -> int:
        return len(self.mapping)

    def inverse(self) -> 'LabelPermutation':
        inv = np.empty(self.size, dtype=int)
        inv[list(self.mapping)] = np.arange(self.size)
        return LabelPermutation(tuple(inv))

    def compose(self, other: 'LabelPermutation') -> 'LabelPermutation':
        """Return self o other, i.e. q -> self(other(q))"""
        return LabelPermutation(tuple(self.mapping[o] for o in other.mapping))

    def permute_matrix(self, m: np.ndarray) -> np.ndarray:
        """(m[sigma(q), sigma(l)])_{q,l} on the last two axes"""
        s = np.asarray(self.mapping)
        return np.asarray(m)[..., s, :][..., :, s]

    def relabel(self, labels: np.ndarray) -> np.ndarray:
        """Apply sigma to every label of an integer array"""
        return np.asarray(self.mapping)[np.asarray(labels)]


@dataclass
class AssumptionCheck:
    name: str
    passed: bool
    index: tuple | None = None  # first violating index (0-based)
    detail: str = ''


@dataclass
class ValidityReport:
    """Pass/fail of each assumption defining the parameter set"""

    checks: list[AssumptionCheck] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> AssumptionCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> list[AssumptionCheck]:
        return [c for c in self.checks if not c.passed]

    def __str__(self):
        lines = []
        for c in self.checks:
            status = 'pass' if c.passed else f'FAIL at {c.index} {c.detail}'
            lines.append(f'{c.name:<14}{status}')
        return '\n'.join(lines)


def _first_index(mask: np.ndarray) -> tuple | None:
    hits = np.argwhere(mask)
    return tuple(int(i) for i in hits[0]) if len(hits) else None


def _identifiability(pi: np.ndarray) -> tuple | None:
    """First pair (q, q') whose rows of pi coincide, None if every pair differs"""
    q = pi.shape[0]
    for a in range(q):
        for b in range(a + 1, q):
            if np.all(np.abs(pi[a] - pi[b]) <= IDENTIFIABILITY_TOL):
                return (a, b)
    return None


def check_margins(params: ModelParams):
    q = params.q_classes
    if not 0.0 < params.delta < 1.0 / q:
        raise InvalidMarginException(f'delta={params.delta} is not in (0, 1/{q})')
    if not 0.0 < params.zeta < 0.5:
        raise InvalidMarginException(f'zeta={params.zeta} is not in (0, 1/2)')


def validate_theta(params: ModelParams) -> ValidityReport:
    """
    Check the conditions defining the parameter set. With a stationary pi
    these are identifiability (distinct rows of pi), the transition margin
    and the connectivity margin; with a time-varying pi identifiability and
    the connectivity margin are checked per time step, and a constant,
    distinct diagonal is added.
    Row-stochasticity and symmetry are reported as checks of their own.

    Returns:
        A ValidityReport; indices are 0-based, time first for per-time checks.
        Lower-margin violations are scanned before upper-margin ones.
    """
    check_margins(params)
    gamma, pi = params.gamma, params.pi
    delta, zeta = params.delta, params.zeta
    report = ValidityReport()

    row_err = np.abs(gamma.sum(axis=1) - 1.0)
    bad = _first_index(row_err > STOCHASTIC_TOL)
    report.checks.append(AssumptionCheck('stochastic', bad is None, bad, 'row sum != 1'))

    pis = pi if params.time_varying else pi[None]
    sym = np.abs(pis - np.swapaxes(pis, -1, -2)) > SYMMETRY_TOL
    bad = _first_index(sym if params.time_varying else sym[0])
    report.checks.append(AssumptionCheck('symmetric', bad is None, bad, 'pi not symmetric'))

    per_time = '_per_time' if params.time_varying else ''

    bad = None
    for t, p in enumerate(pis):
        pair = _identifiability(p)
        if pair is not None:
            bad = (t,) + pair if params.time_varying else pair
            break
    report.checks.append(
        AssumptionCheck('identifiable' + per_time, bad is None, bad, 'identical rows of pi')
    )

    bad = _first_index(gamma < delta)
    if bad is None:
        bad = _first_index(gamma > 1.0 - delta)
    report.checks.append(
        AssumptionCheck(
            'transition_margin', bad is None, bad, f'gamma outside [{delta}, {1 - delta}]'
        )
    )

    bad = _first_index(pi < zeta)
    if bad is None:
        bad = _first_index(pi > 1.0 - zeta)
    report.checks.append(
        AssumptionCheck(
            'connectivity_margin' + per_time, bad is None, bad, f'pi outside [{zeta}, {1 - zeta}]'
        )
    )

    if params.time_varying:
        diag = np.diagonal(pi, axis1=1, axis2=2)  # T x Q
        bad = _first_index(np.abs(diag - diag[0]) > SYMMETRY_TOL)
        detail = 'diagonal varies over time'
        if bad is None:
            d0 = diag[0]
            close = np.abs(d0[:, None] - d0[None, :]) <= IDENTIFIABILITY_TOL
            np.fill_diagonal(close, False)
            bad = _first_index(np.triu(close))
            detail = 'diagonal values not distinct'
        report.checks.append(AssumptionCheck('distinct_diagonal', bad is None, bad, detail))

    for c in report.failures():
        logger.debug('assumption %s fails at %s', c.name, c.index)
    return report


def stationary_distribution(gamma: np.ndarray) -> StationaryDist:
    """
    Solve alpha Gamma = alpha, sum(alpha) = 1 by replacing the last equation
    of (Gamma^T - I) alpha = 0 with the normalisation.
    """
    gamma = np.asarray(gamma, dtype=np.float64)
    q = gamma.shape[0]
    system = gamma.T - np.eye(q)
    system[-1, :] = 1.0
    rhs = np.zeros(q)
    rhs[-1] = 1.0
    if np.linalg.cond(system) > CONDITION_MAX:
        raise NumericalException('stationary system is singular or ill-conditioned')
    alpha = np.linalg.solve(system, rhs)
    if np.max(np.abs(alpha @ gamma - alpha)) > STATIONARY_TOL:
        raise NumericalException('stationary solve did not reach tolerance')
    return StationaryDist(alpha)


def permute_params(params: ModelParams, sigma: LabelPermutation) -> ModelParams:
    """theta_sigma = ((gamma_{sigma(q) sigma(l)}), (pi_{sigma(q) sigma(l)}))"""
    if sigma.size != params.q_classes:
        raise ShapeMismatchException(
            f'permutation of {sigma.size} labels for {params.q_classes} classes'
        )
    return params.replace(
        gamma=sigma.permute_matrix(params.gamma), pi=sigma.permute_matrix(params.pi)
    )


def _check_alignable(estimate: ModelParams, truth: ModelParams):
    if estimate.q_classes != truth.q_classes:
        raise ShapeMismatchException('estimate and truth have different Q')
    if estimate.pi.shape != truth.pi.shape:
        raise ShapeMismatchException('estimate and truth have different pi shapes')
    if truth.q_classes > MAX_ALIGN_CLASSES:
        raise UnsupportedSizeException(
            f'exhaustive alignment supports Q <= {MAX_ALIGN_CLASSES}'
        )


def align_by_pi(estimate: ModelParams, truth: ModelParams) -> tuple[LabelPermutation, float]:
    """
    Return the permutation minimising ||pi* - pi_hat_sigma||_inf over all Q!
    permutations, and the distance it achieves. For a time-varying pi the
    distance is the max over time steps, with one shared permutation.
    Ties keep the first permutation in lexicographic order.
    """
    _check_alignable(estimate, truth)
    best, best_err = None, np.inf
    for sigma in LabelPermutation.all(truth.q_classes):
        err = float(np.max(np.abs(truth.pi - sigma.permute_matrix(estimate.pi))))
        if err < best_err:
            best, best_err = sigma, err
    return best, best_err


def align_by_pi_per_time(
    estimate: ModelParams, truth: ModelParams
) -> tuple[list[LabelPermutation], float]:
    """
    Time-varying variant where every time step picks its own permutation.
    The error is the max over t of the per-slice minima.
    """
    _check_alignable(estimate, truth)
    if not truth.time_varying:
        sigma, err = align_by_pi(estimate, truth)
        return [sigma], err
    sigmas, errs = [], []
    for t in range(truth.pi.shape[0]):
        sub_est = estimate.replace(pi=estimate.pi[t])
        sub_true = truth.replace(pi=truth.pi[t])
        sigma, err = align_by_pi(sub_est, sub_true)
        sigmas.append(sigma)
        errs.append(err)
    return sigmas, float(max(errs))


def aligned_errors(estimate: ModelParams, truth: ModelParams) -> dict:
    """
    Align by pi, then report both sup-norm errors under the same permutation.
    """
    sigma, pi_err = align_by_pi(estimate, truth)
    gamma_err = float(np.max(np.abs(truth.gamma - sigma.permute_matrix(estimate.gamma))))
    return {'sigma': sigma, 'pi_err': pi_err, 'gamma_err': gamma_err}


def bernoulli_kl(p1, p2):
    """
    KL divergence between Bernoulli(p1) and Bernoulli(p2), with 0 log 0 = 0.

    Args:
        - *p1*: probability (or array) in [0, 1]
        - *p2*: probability (or array) in (0, 1)
    """
    p1 = np.asarray(p1, dtype=np.float64)
    p2 = np.asarray(p2, dtype=np.float64)
    if np.any((p1 < 0) | (p1 > 1)):
        raise DomainException('p1 must lie in [0, 1]')
    if np.any((p2 <= 0) | (p2 >= 1)):
        raise DomainException('p2 must lie in (0, 1)')
    kl = rel_entr(p1, p2) + rel_entr(1.0 - p1, 1.0 - p2)
    return float(kl) if kl.ndim == 0 else kl


def bernoulli_entropy(p):
    p = np.asarray(p, dtype=np.float64)
    h = -(xlogy(p, p) + xlogy(1.0 - p, 1.0 - p))
    return float(h) if h.ndim == 0 else h


def doeblin_coefficient(gamma: np.ndarray) -> float:
    """
    Contraction rate r = 1 - Q min(gamma): every row dominates Q min(gamma)
    times the uniform law, so ||delta_q Gamma^t - alpha||_TV <= r^t.
    """
    gamma = np.asarray(gamma)
    return float(max(0.0, 1.0 - gamma.shape[0] * gamma.min()))


def project_transition_rows(weights: np.ndarray, delta: float) -> tuple[np.ndarray, bool]:
    """
    Row-wise maximiser of sum_l w_ql log gamma_ql over the rows with
    sum_l gamma_ql = 1 and gamma_ql >= delta.

    The solution is gamma_ql = max(delta, w_ql / lambda_q); classes pinned at
    delta are found by repeatedly fixing the entries that fall below it.

    Args:
        - *weights*: Q x Q non-negative expected transition counts
        - *delta*: lower margin, in (0, 1/Q)

    Returns:
        (gamma, bound) where bound tells whether any entry was pinned at delta
    """
    weights = np.asarray(weights, dtype=np.float64)
    q = weights.shape[0]
    gamma = np.empty_like(weights)
    bound = False
    for row in range(q):
        w = weights[row]
        pinned = np.zeros(q, dtype=bool)
        while True:
            free = ~pinned
            mass = 1.0 - delta * pinned.sum()
            total = w[free].sum()
            values = np.full(q, delta)
            if total > 0:
                values[free] = mass * w[free] / total
            else:
                values[free] = mass / free.sum()
            below = free & (values < delta)
            if not below.any():
                break
            pinned |= below
        bound |= bool(pinned.any())
        gamma[row] = values
    return gamma, bound


def clamp_connectivity(pi: np.ndarray, zeta: float) -> tuple[np.ndarray, bool]:
    """Clip pi into [zeta, 1 - zeta]; the flag tells whether the clip was active"""
    clipped = np.clip(pi, zeta, 1.0 - zeta)
    return clipped, bool(np.any(clipped != pi))
