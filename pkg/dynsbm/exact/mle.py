"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.


Exact maximum likelihood at desk scale and the fixed-point diagnostic of the
transition matrix.

The search runs in two stages:
  1. multi-start L-BFGS-B on the exact log-likelihood, in logit coordinates
     that keep every iterate inside the margins;
  2. an exact EM polish, whose fixed point is the transition equation
    gamma_ql = sum_{t,i} P(Z_i^t=q, Z_i^{t+1}=l | X) / sum_{t,i} P(Z_i^t=q | X).
The polish does not follow alpha as a function of gamma, so it can lose
likelihood; the reported point is whichever stage ends higher.
"""

from dataclasses import dataclass
import logging
import time

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, logit, softmax

from ..generic.exceptions import NumericalException, UndefinedResidualException
from ..generic.parameters import (
    DELTA,
    MLE_MAX_ITER,
    MLE_POLISH_MAX_ITER,
    MLE_POLISH_TOL,
    MLE_RESTARTS,
    ZETA,
)
from ..model.params import ModelParams, clamp_connectivity, project_transition_rows
from ..model.sampler import GraphSequence
from ..report import EstimationReport
from .likelihood import check_transfer_size, exact_loglik_transfer
from .posterior import PosteriorTable, exact_posterior_marginals

logger = logging.getLogger(__name__)

LOGIT_BOUND = 30.0  # Box on every logit coordinate
BOUNDARY_TOL = 1e-9  # Distance to a margin reported as "at the boundary"


@dataclass(frozen=True)
class MleConfig:
    restarts: int = MLE_RESTARTS
    seed: int = 0
    delta: float = DELTA
    zeta: float = ZETA
    time_varying_pi: bool = False
    max_iter: int = MLE_MAX_ITER
    polish_tol: float = MLE_POLISH_TOL
    polish_max_iter: int = MLE_POLISH_MAX_ITER
    record_timing: bool = False

    @classmethod
    def from_dict(cls, d: dict) -> 'MleConfig':
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        return cls(**known)


class _LogitCodec:
    """
    Unconstrained coordinates of (Gamma, pi):
      gamma_q. = delta + (1 - Q delta) softmax(phi_q.)
      pi_ql = zeta + (1 - 2 zeta) sigmoid(psi_ql) on the upper triangle
    """

    def __init__(self, q: int, n_times: int | None, delta: float, zeta: float):
        self.q = q
        self.n_times = n_times
        self.delta = delta
        self.zeta = zeta
        self.iu = np.triu_indices(q)
        self.n_slices = 1 if n_times is None else n_times
        self.size = q * q + self.n_slices * len(self.iu[0])

    def decode(self, coords: np.ndarray) -> ModelParams:
        q = self.q
        phi = coords[: q * q].reshape(q, q)
        gamma = self.delta + (1.0 - q * self.delta) * softmax(phi, axis=1)
        psi = coords[q * q:].reshape(self.n_slices, -1)
        pis = np.empty((self.n_slices, q, q))
        for s in range(self.n_slices):
            upper = self.zeta + (1.0 - 2.0 * self.zeta) * expit(psi[s])
            pis[s][self.iu] = upper
            pis[s].T[self.iu] = upper
        pi = pis if self.n_times is not None else pis[0]
        return ModelParams(gamma=gamma, pi=pi, delta=self.delta, zeta=self.zeta)

    def encode(self, params: ModelParams) -> np.ndarray:
        q = self.q
        share = (params.gamma - self.delta) / (1.0 - q * self.delta) if q > 1 else np.ones((1, 1))
        phi = np.log(np.clip(share, 1e-12, None))
        pis = params.pi if params.time_varying else params.pi[None]
        unit = (pis - self.zeta) / (1.0 - 2.0 * self.zeta)
        psi = logit(np.clip(unit, 1e-12, 1.0 - 1e-12))
        psi = np.stack([p[self.iu] for p in psi])
        coords = np.concatenate([phi.ravel(), psi.ravel()])
        return np.clip(coords, -LOGIT_BOUND, LOGIT_BOUND)


def _transition_ratio(post: PosteriorTable) -> tuple[np.ndarray, np.ndarray]:
    """(expected transition counts, their ratio to the expected occupancies)"""
    counts = post.pairs.sum(axis=(0, 1))
    occupancy = post.singles[:-1].sum(axis=(0, 1))
    with np.errstate(invalid='ignore', divide='ignore'):
        ratio = counts / occupancy[:, None]
    return counts, ratio


def mle_gamma_fixed_point_residual(params: ModelParams, x: GraphSequence) -> np.ndarray:
    """
    gamma_ql - sum_{t,i} P(Z_i^t=q, Z_i^{t+1}=l | X) / sum_{t,i} P(Z_i^t=q | X)
    """
    if x.T < 2:
        raise UndefinedResidualException('the transition residual needs T >= 2')
    post = exact_posterior_marginals(params, x)
    _, ratio = _transition_ratio(post)
    if not np.all(np.isfinite(ratio)):
        raise NumericalException('a class has zero posterior occupancy')
    return params.gamma - ratio


def _pi_update(post: PosteriorTable, x: GraphSequence, current: np.ndarray, time_varying: bool):
    """Maximiser of the expected complete log-likelihood in pi"""
    iu, ju = np.triu_indices(x.n, k=1)
    pairs = post.node_pairs[:, iu, ju]
    both = pairs + np.swapaxes(pairs, -1, -2)
    edges = x.adjacency[:, iu, ju].astype(np.float64)
    num = np.einsum('tp,tpql->tql', edges, both)
    den = both.sum(axis=1)
    if not time_varying:
        num, den = num.sum(axis=0), den.sum(axis=0)
    return np.where(den > 0, num / np.where(den > 0, den, 1.0), current)


def _em_polish(params: ModelParams, x: GraphSequence, config: MleConfig):
    """
    Iterate the exact EM map until the parameters move by less than
    polish_tol. Returns the final params, the log-likelihood trace, the
    convergence flag and the projection events.
    """
    trace, events = [], []
    converged = False
    for it in range(config.polish_max_iter):
        post = exact_posterior_marginals(params, x, with_node_pairs=True)
        trace.append(post.loglik)
        gamma = params.gamma
        if x.T > 1:
            counts, _ = _transition_ratio(post)
            gamma, bound = project_transition_rows(counts, params.delta)
            if bound:
                events.append(f'polish {it}: gamma projected onto delta margin')
        pi = _pi_update(post, x, params.pi, params.time_varying)
        pi, clipped = clamp_connectivity(pi, params.zeta)
        if clipped:
            events.append(f'polish {it}: pi clamped onto zeta margin')
        change = max(np.max(np.abs(gamma - params.gamma)), np.max(np.abs(pi - params.pi)))
        params = params.replace(gamma=gamma, pi=pi)
        if change < config.polish_tol:
            converged = True
            break
    # keep only the distinct projection messages of the last iteration
    last = [e for e in events if e.startswith(f'polish {it}:')]
    return params, trace, converged, it + 1, last


def _at_boundary(params: ModelParams) -> bool:
    g, p = params.gamma, params.pi
    near_gamma = params.q_classes > 1 and np.any(g - params.delta < BOUNDARY_TOL)
    near_pi = np.any(p - params.zeta < BOUNDARY_TOL) or np.any(1.0 - params.zeta - p < BOUNDARY_TOL)
    return bool(near_gamma or near_pi)


def exact_mle(
    x: GraphSequence,
    q_classes: int,
    config: MleConfig | None = None,
    warm_start: ModelParams | None = None,
) -> EstimationReport:
    """
    Maximise the exact log-likelihood over the parameter set.

    Args:
        - *x*: observed graphs
        - *q_classes*: number of classes Q
        - *config*: MleConfig (defaults when None)
        - *warm_start*: extra starting point, typically the VEM estimate

    Returns:
        EstimationReport with method 'exact-mle'
    """
    config = config or MleConfig()
    check_transfer_size(q_classes, x.n)
    start_clock = time.perf_counter()
    n_times = x.T if config.time_varying_pi else None
    codec = _LogitCodec(q_classes, n_times, config.delta, config.zeta)

    def objective(coords):
        value = exact_loglik_transfer(codec.decode(coords), x).value
        if not np.isfinite(value):
            raise NumericalException('exact log-likelihood is not finite')
        return -value

    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    starts = [('random', rng.normal(size=codec.size)) for _ in range(config.restarts)]
    if warm_start is not None:
        if warm_start.time_varying != config.time_varying_pi:
            warm_start = None
            logger.warning('warm start ignored: connectivity mode differs')
        else:
            starts.append(('warm', codec.encode(warm_start)))

    bounds = [(-LOGIT_BOUND, LOGIT_BOUND)] * codec.size
    best, restarts = None, []
    for k, (kind, x0) in enumerate(starts):
        res = minimize(
            objective, x0, method='L-BFGS-B', bounds=bounds, options={'maxiter': config.max_iter}
        )
        restarts.append(
            {
                'restart': k,
                'start': kind,
                'objective': float(-res.fun),
                'iterations': int(res.nit),
                'converged': bool(res.success),
            }
        )
        logger.debug('restart %d (%s): loglik %.10g after %d iterations', k, kind, -res.fun, res.nit)
        if best is None or res.fun < best.fun:
            best = res

    search_params = codec.decode(best.x)
    search_objective = float(-best.fun)
    params, trace, converged, iterations, events = _em_polish(search_params, x, config)
    objective_value = exact_loglik_transfer(params, x).value
    if objective_value < search_objective:
        logger.info(
            'exact MLE polish lowered the log-likelihood by %.3g, keeping the search point',
            search_objective - objective_value,
        )
        params, objective_value = search_params, search_objective
        converged, events = bool(best.success), []
    residual = mle_gamma_fixed_point_residual(params, x) if x.T > 1 else None
    for e in events:
        logger.warning('exact MLE %s', e)
    if not converged:
        logger.warning('exact MLE polish stopped after %d iterations', iterations)
    wall_ms = (time.perf_counter() - start_clock) * 1e3 if config.record_timing else 0.0
    report = EstimationReport(
        method='exact-mle',
        params=params,
        objective=objective_value,
        trace=trace,
        converged=converged,
        iterations=iterations,
        residual=residual,
        projection_events=events,
        restarts=restarts,
        wall_ms=wall_ms,
        search_objective=search_objective,
        at_boundary=_at_boundary(params),
    )
    logger.info(
        'exact MLE: loglik %.10g (search %.10g), residual %s',
        objective_value,
        search_objective,
        report.residual_max,
    )
    return report
