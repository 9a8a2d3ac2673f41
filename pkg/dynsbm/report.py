"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.


Outcome of an estimation run, shared by the exact MLE and variational EM.
"""

from dataclasses import dataclass, field, replace
import logging

import numpy as np

from .model.params import ModelParams, aligned_errors

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EstimationReport:
    """
    Fitted parameters and diagnostics.

    Args:
        - *method*: 'exact-mle' or 'vem'
        - *params*: fitted theta
        - *objective*: l(theta_hat) for the MLE, J(chi, theta) for VEM
        - *trace*: objective after every iteration of the retained run
        - *converged*: whether the retained run met its tolerance
        - *iterations*: iterations of the retained run
        - *residual*: Q x Q fixed-point residual of Gamma (None when T = 1)
        - *projection_events*: descriptions of every active projection on
          the boundary of the parameter set
        - *restarts*: one summary dict per restart
        - *wall_ms*: wall time, 0 unless timing was requested
        - *search_objective*: l at the end of the gradient search (MLE only)
        - *at_boundary*: True when the retained solution touches a margin
        - *coupling*: change of the initial-law term caused by recomputing
          alpha from Gamma, per iteration (VEM only)
        - *state*: final variational state (VEM only)
        - *alignment*: sigma and sup-norm errors against a known truth
    """

    method: str
    params: ModelParams
    objective: float
    trace: list[float] = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    residual: np.ndarray | None = None
    projection_events: list[str] = field(default_factory=list)
    restarts: list[dict] = field(default_factory=list)
    wall_ms: float = 0.0
    search_objective: float | None = None
    at_boundary: bool = False
    coupling: list[float] = field(default_factory=list)
    state: object | None = None
    alignment: dict | None = None

    @property
    def residual_max(self) -> float | None:
        if self.residual is None:
            return None
        return float(np.max(np.abs(self.residual)))

    def with_truth(self, truth: ModelParams) -> 'EstimationReport':
        """Copy of the report aligned on `truth` by the connectivity"""
        errors = aligned_errors(self.params, truth)
        return replace(self, alignment=errors)

    def to_dict(self) -> dict:
        out = {
            'method': self.method,
            'params': self.params.to_dict(),
            'objective': float(self.objective),
            'trace': [float(v) for v in self.trace],
            'converged': bool(self.converged),
            'iterations': int(self.iterations),
            'residual': None if self.residual is None else np.asarray(self.residual).tolist(),
            'residual_max': self.residual_max,
            'projection_events': list(self.projection_events),
            'restarts': list(self.restarts),
            'wall_ms': float(self.wall_ms),
            'at_boundary': bool(self.at_boundary),
        }
        if self.search_objective is not None:
            out['search_objective'] = float(self.search_objective)
        if self.coupling:
            out['elbo_coupling'] = [float(v) for v in self.coupling]
        if self.alignment is not None:
            out['alignment'] = {
                'sigma': list(self.alignment['sigma'].mapping),
                'pi_err': float(self.alignment['pi_err']),
                'gamma_err': float(self.alignment['gamma_err']),
            }
        return out

    def __str__(self):
        output = 'Method:      ' + self.method + '\n'
        output += 'Objective:   ' + f'{self.objective:.10g}' + '\n'
        output += 'Iterations:  ' + str(self.iterations) + '\n'
        output += 'Converged:   ' + str(self.converged) + '\n'
        if self.residual_max is not None:
            output += 'Residual:    ' + f'{self.residual_max:.3e}' + '\n'
        if self.alignment is not None:
            output += 'pi error:    ' + f'{self.alignment["pi_err"]:.6g}' + '\n'
            output += 'gamma error: ' + f'{self.alignment["gamma_err"]:.6g}' + '\n'
        output += str(self.params)
        return output
