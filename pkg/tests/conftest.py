import numpy as np
import pytest

from dynsbm.model.params import ModelParams
from dynsbm.model.sampler import GraphSequence, LatentPaths, sample_graphs, sample_latent_paths


def random_stochastic(rng, q, delta):
    """Row-stochastic matrix with entries in [delta, 1 - delta]"""
    raw = rng.dirichlet(np.ones(q), size=q)
    return delta + (1.0 - q * delta) * raw


def random_connectivity(rng, q, zeta, T=None):
    shape = (q, q) if T is None else (T, q, q)
    upper = rng.uniform(zeta, 1.0 - zeta, size=shape)
    return np.triu(upper) + np.swapaxes(np.triu(upper, 1), -1, -2)


def random_params(rng, q, delta=0.05, zeta=0.05, T=None) -> ModelParams:
    return ModelParams(
        gamma=random_stochastic(rng, q, delta),
        pi=random_connectivity(rng, q, zeta, T),
        delta=delta,
        zeta=zeta,
    )


def random_graphs(rng, n, T) -> GraphSequence:
    upper = np.triu(rng.integers(0, 2, size=(T, n, n)), 1)
    return GraphSequence(upper + np.swapaxes(upper, 1, 2))


def random_paths(rng, n, T, q) -> LatentPaths:
    return LatentPaths(rng.integers(0, q, size=(n, T)))


@pytest.fixture
def rng():
    return np.random.default_rng(20260101)


@pytest.fixture
def theta2() -> ModelParams:
    """Well separated two-class parameters"""
    return ModelParams(
        gamma=[[0.8, 0.2], [0.2, 0.8]],
        pi=[[0.8, 0.1], [0.1, 0.6]],
        delta=0.1,
        zeta=0.05,
    )


@pytest.fixture
def small_data(theta2):
    z = sample_latent_paths(theta2, 4, 3, seed=11)
    x = sample_graphs(theta2, z, seed=12)
    return z, x
