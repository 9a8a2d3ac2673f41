"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.
"""

from .bounds import (
    ConcentrationReport,
    DiscrepancyReport,
    concentration_report,
    discrepancy_set_size,
    hamming,
)
