"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.


Log-log regression of the median aligned errors on the sample size.
"""

from dataclasses import asdict, dataclass
import logging

import numpy as np
import pandas as pd
from scipy import stats

from ..generic.exceptions import DegenerateGridException
from .config import DEFAULT_RATES

logger = logging.getLogger(__name__)

CONFIDENCE = 0.95


@dataclass(frozen=True)
class RateFit:
    target: str
    abscissa: str
    slope: float
    intercept: float
    slope_low: float
    slope_high: float
    stderr: float
    threshold: float
    consistent: bool  # slope <= threshold; informative only
    n_cells: int

    def to_dict(self) -> dict:
        return asdict(self)


def rate_abscissa(target: str, n: np.ndarray, T: np.ndarray) -> tuple[str, np.ndarray]:
    """
    log n for the connectivity; log(nT / log n) for the transition matrix.
    """
    n = np.asarray(n, dtype=np.float64)
    T = np.asarray(T, dtype=np.float64)
    if target == 'pi':
        return 'log(n)', np.log(n)
    if target == 'gamma':
        if np.any(n < 3):
            raise DegenerateGridException('log(nT / log n) needs n >= 3')
        return 'log(nT/log n)', np.log(n * T / np.log(n))
    raise ValueError(f'unknown target {target!r}')


def rate_regression(result, target: str, threshold: float | None = None) -> RateFit:
    """
    OLS fit of log(median error) per cell on the target's abscissa, with a
    t-based confidence band on the slope.

    Args:
        - *result*: ExperimentResult, or its per-cell summary DataFrame
        - *target*: 'pi' or 'gamma'
        - *threshold*: slope flagged as consistent with the upper bound
          (-0.25 for pi, -0.5 for gamma by default)
    """
    summary = result if isinstance(result, pd.DataFrame) else result.summary
    threshold = DEFAULT_RATES[target] if threshold is None else threshold
    column = f'{target}_err_median'
    if column not in summary:
        raise DegenerateGridException(f'no {target} errors to regress')
    cells = summary[['n', 'T', column]].dropna()
    cells = cells[cells[column] > 0]
    name, x = rate_abscissa(target, cells['n'].to_numpy(), cells['T'].to_numpy())
    if len(np.unique(x)) < 3:
        raise DegenerateGridException(
            f'{target} regression needs 3 distinct values of {name}, got {len(np.unique(x))}'
        )
    y = np.log(cells[column].to_numpy(dtype=np.float64))
    fit = stats.linregress(x, y)
    half = stats.t.ppf(0.5 + CONFIDENCE / 2, len(x) - 2) * fit.stderr
    rate = RateFit(
        target=target,
        abscissa=name,
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        slope_low=float(fit.slope - half),
        slope_high=float(fit.slope + half),
        stderr=float(fit.stderr),
        threshold=float(threshold),
        consistent=bool(fit.slope <= threshold),
        n_cells=int(len(x)),
    )
    logger.info('%s error slope %.3f on %s (threshold %.2f)', target, rate.slope, name, threshold)
    return rate
