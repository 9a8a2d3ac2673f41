"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.
"""

from .estep import e_step, forward_backward
from .fit import VemConfig, fit_vem
from .init import init_tau
from .mstep import m_step_gamma, m_step_pi, vem_gamma_fixed_point_residual
from .state import ElboTrace, VariationalState, elbo
