"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.


Configuration of a Monte Carlo consistency experiment.

JSON form (paths relative to the configuration file):

    {
      "grid": [[20, 5], [40, 5], [80, 10]]     or {"n": [20, 40], "T": [5, 10]},
      "replicates": 20,
      "params_file": "truth.json"              or "params": {...},
      "estimator": "vem",                      or "exact-mle"
      "seed": 1,
      "output_dir": "out",
      "rates": {"pi": -0.25, "gamma": -0.5},
      "vem": {...VemConfig fields...},
      "mle": {...MleConfig fields...},
      "n_jobs": 1,
      "record_timing": false,
      "archive": false
    }
"""

from dataclasses import dataclass, field
from itertools import product
import os

from ..exact.likelihood import check_transfer_size
from ..exact.mle import MleConfig
from ..generic.exceptions import ShapeMismatchException, UnknownStrategyException
from ..generic.read import read_json, read_params
from ..model.params import ModelParams
from ..vem.fit import VemConfig

ESTIMATORS = ('vem', 'exact-mle')
DEFAULT_RATES = {'pi': -0.25, 'gamma': -0.5}


@dataclass(frozen=True)
class ExperimentConfig:
    grid: tuple[tuple[int, int], ...]
    replicates: int
    params: ModelParams
    estimator: str = 'vem'
    seed: int = 0
    output_dir: str = '.'
    rates: dict = field(default_factory=lambda: dict(DEFAULT_RATES))
    vem: VemConfig = field(default_factory=VemConfig)
    mle: MleConfig = field(default_factory=MleConfig)
    n_jobs: int = 1
    record_timing: bool = False
    archive: bool = False

    def __post_init__(self):
        grid = tuple((int(n), int(T)) for n, T in self.grid)
        object.__setattr__(self, 'grid', grid)
        if not grid:
            raise ShapeMismatchException('the experiment grid is empty')
        if any(n < 1 or T < 1 for n, T in grid):
            raise ShapeMismatchException('grid sizes must be positive')
        if self.replicates < 1:
            raise ShapeMismatchException('replicates must be positive')
        if self.estimator not in ESTIMATORS:
            raise UnknownStrategyException(f'unknown estimator {self.estimator!r}')
        if self.estimator == 'exact-mle':
            for n, _ in grid:
                check_transfer_size(self.params.q_classes, n)
        if self.params.time_varying and any(T != self.params.n_times for _, T in grid):
            raise ShapeMismatchException(
                f'a time-varying pi fixes T={self.params.n_times} for every cell'
            )

    @property
    def q_classes(self) -> int:
        return self.params.q_classes

    @classmethod
    def from_dict(cls, d: dict, base_dir: os.PathLike | None = None) -> 'ExperimentConfig':
        base_dir = base_dir or '.'
        grid = d['grid']
        if isinstance(grid, dict):
            grid = list(product(grid['n'], grid['T']))
        if 'params' in d:
            params = ModelParams.from_dict(d['params'])
        else:
            params = read_params(os.path.join(base_dir, d['params_file']))
        time_varying = params.time_varying
        vem = dict(d.get('vem', {}))
        vem.setdefault('time_varying_pi', time_varying)
        vem.setdefault('delta', params.delta)
        vem.setdefault('zeta', params.zeta)
        mle = dict(d.get('mle', {}))
        mle.setdefault('time_varying_pi', time_varying)
        mle.setdefault('delta', params.delta)
        mle.setdefault('zeta', params.zeta)
        return cls(
            grid=tuple(tuple(cell) for cell in grid),
            replicates=int(d['replicates']),
            params=params,
            estimator=d.get('estimator', 'vem'),
            seed=int(d.get('seed', 0)),
            output_dir=os.path.join(base_dir, d.get('output_dir', '.')),
            rates={**DEFAULT_RATES, **d.get('rates', {})},
            vem=VemConfig.from_dict(vem),
            mle=MleConfig.from_dict(mle),
            n_jobs=int(d.get('n_jobs', 1)),
            record_timing=bool(d.get('record_timing', False)),
            archive=bool(d.get('archive', False)),
        )

    @classmethod
    def read(cls, fn: os.PathLike) -> 'ExperimentConfig':
        return cls.from_dict(read_json(fn), base_dir=os.path.dirname(os.path.abspath(fn)))

    def to_dict(self) -> dict:
        return {
            'grid': [list(cell) for cell in self.grid],
            'replicates': self.replicates,
            'params': self.params.to_dict(),
            'estimator': self.estimator,
            'seed': self.seed,
            'rates': dict(self.rates),
            'n_jobs': self.n_jobs,
        }
