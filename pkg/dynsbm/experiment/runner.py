"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.


Monte Carlo consistency experiment: for every grid cell and replicate, sample
data from the true parameters, fit, align by pi and record the errors.
"""

from dataclasses import dataclass, field, replace
import logging

from joblib import Parallel, delayed
import numpy as np
import pandas as pd

from ..exact.mle import exact_mle
from ..generic.exceptions import DynSBMException
from ..generic.parameters import FAILURE_RATE_MAX, RESULT_COLUMNS
from ..model.params import align_by_pi, align_by_pi_per_time, aligned_errors
from ..model.sampler import sample_graphs, sample_latent_paths
from ..vem.fit import fit_vem
from .config import ExperimentConfig

logger = logging.getLogger(__name__)

QUANTILES = (0.1, 0.25, 0.5, 0.75, 0.9)


def replicate_seed(seed: int, n: int, T: int, replicate: int) -> int:
    """Seed of one replicate, independent of the order in which cells run"""
    return int(np.random.SeedSequence([seed, n, T, replicate]).generate_state(1)[0])


@dataclass
class ExperimentResult:
    """
    Args:
        - *rows*: one row per replicate, columns RESULT_COLUMNS plus 'failed'
          and 'shared_alignment'
        - *summary*: one row per (n, T) cell with error quantiles and the
          failure rate
        - *archive*: per-replicate arrays for the optional HDF5 archive
    """

    rows: pd.DataFrame
    summary: pd.DataFrame = None
    archive: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rows = self.rows.sort_values(['n', 'T', 'replicate'], kind='stable').reset_index(drop=True)
        if self.summary is None:
            self.summary = summarize(self.rows)

    @property
    def failed_cells(self) -> list[tuple[int, int]]:
        bad = self.summary[self.summary['failure_rate'] > FAILURE_RATE_MAX]
        return [(int(n), int(T)) for n, T in zip(bad['n'], bad['T'])]

    def table(self) -> pd.DataFrame:
        """The replicate rows restricted to the published columns"""
        return self.rows[RESULT_COLUMNS]


def summarize(rows: pd.DataFrame) -> pd.DataFrame:
    """Per-cell medians and quantiles of the aligned errors"""
    records = []
    for (n, T), cell in rows.groupby(['n', 'T'], sort=True):
        ok = cell[~cell['failed']] if 'failed' in cell else cell
        record = {'n': int(n), 'T': int(T), 'replicates': len(cell)}
        record['failure_rate'] = 1.0 - len(ok) / len(cell) if len(cell) else 0.0
        for target in ('pi_err', 'gamma_err'):
            values = ok[target].to_numpy(dtype=np.float64)
            for q in QUANTILES:
                key = f'{target}_median' if q == 0.5 else f'{target}_q{int(q * 100):02d}'
                record[key] = float(np.quantile(values, q)) if len(values) else np.nan
        if 'shared_alignment' in ok:
            shared = ok['shared_alignment'].dropna()
            record['shared_alignment_rate'] = float(shared.mean()) if len(shared) else np.nan
        records.append(record)
    columns = ['n', 'T', 'replicates', 'failure_rate']
    return pd.DataFrame.from_records(records) if records else pd.DataFrame(columns=columns)


def run_replicate(config: ExperimentConfig, n: int, T: int, replicate: int) -> tuple[dict, dict]:
    """
    Returns:
        (row, arrays): the result row and the arrays kept for the archive
    """
    seed = replicate_seed(config.seed, n, T, replicate)
    z_seed, x_seed, fit_seed = (
        int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(3)
    )
    truth = config.params
    z = sample_latent_paths(truth, n, T, z_seed)
    x = sample_graphs(truth, z, x_seed)
    row = {
        'n': n,
        'T': T,
        'Q': truth.q_classes,
        'replicate': replicate,
        'seed': seed,
        'estimator': config.estimator,
        'pi_err': np.nan,
        'gamma_err': np.nan,
        'elbo_or_loglik': np.nan,
        'iters': 0,
        'wall_ms': 0.0,
        'failed': True,
        'shared_alignment': np.nan,
    }
    arrays = {'labels': z.labels, 'adjacency': x.adjacency}
    try:
        if config.estimator == 'vem':
            report = fit_vem(x, truth.q_classes, replace(config.vem, seed=fit_seed))
        else:
            report = exact_mle(x, truth.q_classes, replace(config.mle, seed=fit_seed))
    except DynSBMException as err:
        logger.warning('cell (%d, %d) replicate %d failed: %s', n, T, replicate, err)
        return row, arrays

    errors = aligned_errors(report.params, truth)
    row.update(
        pi_err=errors['pi_err'],
        gamma_err=errors['gamma_err'],
        elbo_or_loglik=report.objective,
        iters=report.iterations,
        wall_ms=report.wall_ms,
        failed=False,
    )
    if truth.time_varying:
        shared, _ = align_by_pi(report.params, truth)
        per_time, _ = align_by_pi_per_time(report.params, truth)
        row['shared_alignment'] = float(all(s == shared for s in per_time))
    arrays.update(gamma=report.params.gamma, pi=report.params.pi)
    return row, arrays


def run_consistency_experiment(config: ExperimentConfig) -> ExperimentResult:
    """
    Run every (n, T, replicate) of the grid in a joblib pool. The outcome does
    not depend on the number of jobs.
    """
    tasks = [(n, T, r) for n, T in config.grid for r in range(config.replicates)]
    logger.info('running %d replicates over %d cells', len(tasks), len(config.grid))
    outcomes = Parallel(n_jobs=config.n_jobs)(
        delayed(run_replicate)(config, n, T, r) for n, T, r in tasks
    )
    rows = pd.DataFrame.from_records(
        [row for row, _ in outcomes], columns=RESULT_COLUMNS + ['failed', 'shared_alignment']
    )
    archive = {}
    if config.archive:
        archive = {f'n{n}_T{T}_r{r}': arrays for (n, T, r), (_, arrays) in zip(tasks, outcomes)}
    result = ExperimentResult(rows=rows, archive=archive)
    for cell in result.failed_cells:
        logger.warning('cell %s: estimator failure rate above %.0f%%', cell, 100 * FAILURE_RATE_MAX)
    return result
