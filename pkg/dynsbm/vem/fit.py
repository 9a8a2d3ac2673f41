"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.


Variational EM driver: restarts, alternation of M-steps and E-steps, and
selection of the best run.
"""

from dataclasses import dataclass, field
import logging
import time

from joblib import Parallel, delayed
import numpy as np

from ..generic.exceptions import DegenerateClassException, EstimationFailedException
from ..generic.parameters import (
    ASCENT_SLACK,
    DEGENERATE_MASS,
    DELTA,
    E_STEP_MAX_SWEEPS,
    E_STEP_TOL,
    MAX_BACKTRACKS,
    MAX_REDRAWS,
    VEM_MAX_ITERS,
    VEM_RESTARTS,
    VEM_TOL,
    ZETA,
)
from ..model.params import ModelParams, stationary_distribution
from ..model.sampler import GraphSequence
from ..report import EstimationReport
from .estep import e_step
from .init import init_tau
from .mstep import m_step_gamma, m_step_pi, vem_gamma_fixed_point_residual
from .state import ElboTrace, VariationalState, elbo

logger = logging.getLogger(__name__)

DETERMINISTIC_STRATEGIES = ('spectral-mean-graph', 'warm-start')


@dataclass(frozen=True)
class VemConfig:
    restarts: int = VEM_RESTARTS
    init: str = 'spectral-mean-graph'
    tol: float = VEM_TOL
    max_iters: int = VEM_MAX_ITERS
    seed: int = 0
    delta: float = DELTA
    zeta: float = ZETA
    time_varying_pi: bool = False
    tie_diagonal: bool = False
    e_tol: float = E_STEP_TOL
    e_max_sweeps: int = E_STEP_MAX_SWEEPS
    jacobi: bool = False
    n_jobs: int = 1
    record_timing: bool = False

    @classmethod
    def from_dict(cls, d: dict) -> 'VemConfig':
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        return cls(**known)


@dataclass
class _Run:
    params: ModelParams
    chi: VariationalState
    objective: float
    trace: ElboTrace
    residual: np.ndarray | None
    events: list[str] = field(default_factory=list)


def _m_step(chi: VariationalState, x: GraphSequence, current: ModelParams, config: VemConfig):
    """pi then Gamma; alpha follows Gamma. Returns (params, projection events)"""
    mass = chi.class_mass()
    floor = DEGENERATE_MASS * chi.n * chi.T
    if np.any(mass < floor):
        q = int(np.argmin(mass))
        raise DegenerateClassException(q, float(mass[q]))
    events = []
    pi, clamped = m_step_pi(
        chi, x, config.zeta, time_varying=config.time_varying_pi, tie_diagonal=config.tie_diagonal
    )
    if clamped:
        events.append('pi clamped onto the zeta margin')
    gamma = current.gamma
    if chi.T > 1:
        gamma, projected = m_step_gamma(chi, config.delta)
        if projected:
            events.append('gamma projected onto the delta margin')
    stationary_distribution(gamma)
    return current.replace(gamma=gamma, pi=pi), events


def _backtrack_gamma(
    candidate: ModelParams,
    previous: ModelParams,
    x: GraphSequence,
    chi: VariationalState,
    floor: float,
) -> tuple[ModelParams, int]:
    """
    Halve the Gamma step until J(candidate, chi) is back above floor. The pi
    update alone never lowers J, so the previous Gamma always qualifies.

    Returns:
        (accepted params, number of halvings)
    """
    slack = ASCENT_SLACK * max(1.0, abs(floor))
    step = candidate.gamma - previous.gamma
    for halvings in range(MAX_BACKTRACKS + 1):
        if elbo(candidate, x, chi) >= floor - slack:
            return candidate, halvings
        step = step / 2.0
        candidate = candidate.replace(gamma=previous.gamma + step)
    return candidate.replace(gamma=previous.gamma), MAX_BACKTRACKS + 1


def _run_once(x: GraphSequence, chi: VariationalState, config: VemConfig) -> _Run:
    q = chi.q_classes
    norm = x.n * (x.n - 1) * x.T / 2.0
    start = ModelParams(
        gamma=np.full((q, q), 1.0 / q),
        pi=np.full((x.T, q, q) if config.time_varying_pi else (q, q), 0.5),
        delta=config.delta,
        zeta=config.zeta,
    )
    estep_args = dict(tol=config.e_tol, max_sweeps=config.e_max_sweeps, jacobi=config.jacobi)

    params, _ = _m_step(chi, x, start, config)
    chi = e_step(params, x, chi, **estep_args)
    trace = ElboTrace(values=[elbo(params, x, chi)])
    for it in range(config.max_iters):
        new_params, _ = _m_step(chi, x, params, config)
        new_params, halvings = _backtrack_gamma(new_params, params, x, chi, trace.values[-1])
        if halvings:
            logger.debug('iteration %d: Gamma step halved %d times', it, halvings)
        trace.backtracks.append(halvings)
        coupling = float(np.sum(chi.tau[0] * (np.log(new_params.alpha) - np.log(params.alpha))))
        chi = e_step(new_params, x, chi, **estep_args)
        params = new_params
        trace.values.append(elbo(params, x, chi))
        trace.coupling.append(coupling)
        trace.iterations = it + 1
        if abs(trace.values[-1] - trace.values[-2]) / max(norm, 1.0) < config.tol:
            trace.converged = True
            break
    if not (trace.is_non_decreasing() and trace.is_monotone()):
        logger.warning('J decreased between iterations')

    # closing M-step: (params, chi) is then a fixed point of the M-maps
    params, events = _m_step(chi, x, params, config)
    residual = vem_gamma_fixed_point_residual(params, chi) if x.T > 1 else None
    return _Run(params, chi, elbo(params, x, chi), trace, residual, events)


def _restart(x, q_classes, config, k, seed_seq, warm_start):
    strategy = config.init
    if k > 0 and strategy in DETERMINISTIC_STRATEGIES:
        strategy = 'random-dirichlet'
    seeds = [int(s.generate_state(1)[0]) for s in seed_seq.spawn(MAX_REDRAWS + 1)]
    diagnostics = []
    for redraw, seed in enumerate(seeds):
        kind = strategy if redraw == 0 else 'random-dirichlet'
        try:
            chi = init_tau(x, q_classes, kind, seed, warm_start=warm_start)
            run = _run_once(x, chi, config)
        except DegenerateClassException as err:
            diagnostics.append(f'restart {k} draw {redraw} ({kind}): {err}')
            logger.debug(diagnostics[-1])
            continue
        summary = {
            'restart': k,
            'strategy': kind,
            'seed': seed,
            'redraws': redraw,
            'objective': run.objective,
            'iterations': run.trace.iterations,
            'converged': run.trace.converged,
            'backtracks': int(sum(run.trace.backtracks)),
        }
        return run, summary, diagnostics
    return None, {'restart': k, 'strategy': strategy, 'failed': True}, diagnostics


def fit_vem(
    x: GraphSequence,
    q_classes: int,
    config: VemConfig | None = None,
    warm_start: VariationalState | ModelParams | None = None,
) -> EstimationReport:
    """
    Fit the dynamic SBM by variational EM and keep the restart with the
    largest J.

    Args:
        - *x*: observed graphs
        - *q_classes*: number of classes Q
        - *config*: VemConfig (defaults when None)
        - *warm_start*: state or parameters for the 'warm-start' strategy

    Returns:
        EstimationReport with method 'vem'
    """
    config = config or VemConfig()
    start_clock = time.perf_counter()
    children = np.random.SeedSequence(config.seed).spawn(config.restarts)
    outcomes = Parallel(n_jobs=config.n_jobs)(
        delayed(_restart)(x, q_classes, config, k, child, warm_start)
        for k, child in enumerate(children)
    )

    best, summaries, diagnostics = None, [], []
    for run, summary, diag in outcomes:
        summaries.append(summary)
        diagnostics.extend(diag)
        if run is not None and (best is None or run.objective > best.objective):
            best = run
    if best is None:
        raise EstimationFailedException('every VEM restart was degenerate', diagnostics)

    for e in best.events:
        logger.warning('VEM %s', e)
    wall_ms = (time.perf_counter() - start_clock) * 1e3 if config.record_timing else 0.0
    logger.info(
        'VEM: J = %.10g after %d iterations (converged %s)',
        best.objective,
        best.trace.iterations,
        best.trace.converged,
    )
    return EstimationReport(
        method='vem',
        params=best.params,
        objective=best.objective,
        trace=list(best.trace.values),
        converged=best.trace.converged,
        iterations=best.trace.iterations,
        residual=best.residual,
        projection_events=list(best.events),
        restarts=summaries,
        wall_ms=wall_ms,
        at_boundary=bool(best.events),
        coupling=list(best.trace.coupling),
        state=best.chi,
    )
