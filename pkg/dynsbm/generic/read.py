"""
dynsbm: simulation and estimation for dynamic stochastic block models
Copyright (C) 2026  the dynsbm developers
Licensed under the GNU Lesser General Public License v3.0 or later.


Reading and writing of parameters, latent paths, graph sequences and reports.

- JSON for everything (`.json`), written with sorted keys so that identical
  content gives identical bytes;
- HDF5 for datasets and experiment archives (`.h5` / `.hdf5`).
"""

import json
import logging
import os

from h5py import File
import numpy as np

from ..model.params import ModelParams
from ..model.sampler import GraphSequence, LatentPaths

logger = logging.getLogger(__name__)

HDF5_SUFFIXES = ('.h5', '.hdf5')


def is_hdf5(fn: os.PathLike) -> bool:
    return os.fspath(fn).lower().endswith(HDF5_SUFFIXES)


def _clean(value):
    """JSON-safe copy: numpy scalars and arrays to Python, NaN / inf to None"""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def write_json(fn: os.PathLike, content: dict):
    with open(fn, 'w') as f:
        json.dump(_clean(content), f, indent=2, sort_keys=True)
        f.write('\n')


def read_json(fn: os.PathLike) -> dict:
    with open(fn) as f:
        return json.load(f)


def read_params(fn: os.PathLike) -> ModelParams:
    return ModelParams.from_dict(read_json(fn))


def write_params(fn: os.PathLike, params: ModelParams):
    write_json(fn, params.to_dict())


def read_dataset(fn: os.PathLike) -> tuple[GraphSequence, LatentPaths | None]:
    """
    Read a graph sequence and, when present, the latent paths that produced it.

    Args:
        - *fn*: JSON file {"graphs": {...}, "paths": {...}} (or a bare graph
          object), or an HDF5 file with datasets `adjacency` and `labels`

    Returns:
        (graphs, paths or None)
    """
    if is_hdf5(fn):
        with File(fn, 'r') as f:
            graphs = GraphSequence(f['adjacency'][:])
            paths = LatentPaths(f['labels'][:]) if 'labels' in f else None
        return graphs, paths
    content = read_json(fn)
    if 'graphs' in content:
        graphs = GraphSequence.from_dict(content['graphs'])
        paths = LatentPaths.from_dict(content['paths']) if content.get('paths') else None
        return graphs, paths
    return GraphSequence.from_dict(content), None


def write_dataset(fn: os.PathLike, graphs: GraphSequence, paths: LatentPaths | None = None):
    if is_hdf5(fn):
        with File(fn, 'w') as f:
            f.create_dataset('adjacency', data=graphs.adjacency, compression='gzip')
            if paths is not None:
                f.create_dataset('labels', data=paths.labels)
            f.attrs['n'] = graphs.n
            f.attrs['T'] = graphs.T
        return
    content = {'graphs': graphs.to_dict()}
    if paths is not None:
        content['paths'] = paths.to_dict()
    write_json(fn, content)


def write_archive(fn: os.PathLike, groups: dict[str, dict[str, np.ndarray]], attrs: dict | None = None):
    """
    One HDF5 group per entry of `groups`, one dataset per array.
    """
    with File(fn, 'w') as f:
        for key, value in (attrs or {}).items():
            f.attrs[key] = value
        for name, arrays in groups.items():
            g = f.create_group(name)
            for key, value in arrays.items():
                g.create_dataset(key, data=np.asarray(value))
    logger.info('wrote %d groups to %s', len(groups), fn)


def read_archive(fn: os.PathLike) -> dict[str, dict[str, np.ndarray]]:
    with File(fn, 'r') as f:
        return {name: {k: g[k][()] for k in g} for name, g in f.items()}
