"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.


Files written by an experiment:
  - results.csv: one row per replicate (RESULT_COLUMNS)
  - summary.json: per-cell quantiles, regressions and failed cells
  - plotdata.csv: per-cell medians with both regression abscissae
  - replicates.h5: optional archive of the sampled data and estimates
"""

import logging
import os

import numpy as np
import pandas as pd

from ..generic.exceptions import DegenerateGridException
from ..generic.parameters import CSV_FLOAT_FORMAT, RESULT_COLUMNS
from ..generic.read import write_archive, write_json
from .regression import rate_abscissa, rate_regression
from .runner import ExperimentResult

logger = logging.getLogger(__name__)

RESULTS_CSV = 'results.csv'
SUMMARY_JSON = 'summary.json'
PLOTDATA_CSV = 'plotdata.csv'
ARCHIVE_H5 = 'replicates.h5'


def regressions(result: ExperimentResult, rates: dict | None = None) -> dict:
    """Both rate fits, or the reason why one could not be computed"""
    out = {}
    for target in ('pi', 'gamma'):
        threshold = None if rates is None else rates.get(target)
        try:
            out[target] = rate_regression(result, target, threshold).to_dict()
        except DegenerateGridException as err:
            out[target] = {'error': str(err)}
    return out


def plot_data(result: ExperimentResult) -> pd.DataFrame:
    summary = result.summary
    if summary.empty:
        return pd.DataFrame(columns=['n', 'T', 'nT', 'log_n', 'log_nT_over_log_n'])
    data = summary.copy()
    data.insert(2, 'nT', data['n'] * data['T'])
    data.insert(3, 'log_n', np.log(data['n'].astype(np.float64)))
    valid = data['n'] >= 3
    x = np.full(len(data), np.nan)
    if valid.any():
        _, x[valid.to_numpy()] = rate_abscissa('gamma', data.loc[valid, 'n'], data.loc[valid, 'T'])
    data.insert(4, 'log_nT_over_log_n', x)
    return data


def emit_outputs(
    result: ExperimentResult, directory: os.PathLike, config: dict | None = None, rates: dict | None = None
) -> list[str]:
    """
    Write the experiment files into `directory` (created if missing).

    Returns:
        The written paths
    """
    os.makedirs(directory, exist_ok=True)
    written = []

    fn = os.path.join(directory, RESULTS_CSV)
    table = result.rows[RESULT_COLUMNS] if len(result.rows) else pd.DataFrame(columns=RESULT_COLUMNS)
    table.to_csv(fn, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator='\n')
    written.append(fn)

    fn = os.path.join(directory, SUMMARY_JSON)
    summary = {
        'cells': result.summary.to_dict(orient='records'),
        'failed_cells': [list(c) for c in result.failed_cells],
        'regressions': regressions(result, rates),
    }
    if config is not None:
        summary['config'] = config
    write_json(fn, summary)
    written.append(fn)

    fn = os.path.join(directory, PLOTDATA_CSV)
    plot_data(result).to_csv(fn, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator='\n')
    written.append(fn)

    if result.archive:
        fn = os.path.join(directory, ARCHIVE_H5)
        write_archive(fn, result.archive)
        written.append(fn)
    logger.info('wrote %s', ', '.join(written))
    return written
