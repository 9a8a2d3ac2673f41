"""Exact maximum likelihood and the transition fixed-point residual."""

import numpy as np
import pytest

from dynsbm.exact.likelihood import exact_loglik
from dynsbm.exact.mle import MleConfig, exact_mle, mle_gamma_fixed_point_residual
from dynsbm.generic.exceptions import UndefinedResidualException, UnsupportedSizeException
from dynsbm.model.params import ModelParams
from dynsbm.model.sampler import GraphSequence, sample_graphs, sample_latent_paths

from .conftest import random_graphs, random_params


def simulate(params, n, T, seed):
    z = sample_latent_paths(params, n, T, seed=seed)
    return sample_graphs(params, z, seed=seed + 1)


def alternating_blocks(T):
    """Blocks {0,1},{2,3} at even steps and {0,2},{1,3} at odd steps, complete inside"""
    blocks = ([(0, 1), (2, 3)], [(0, 2), (1, 3)])
    adjacency = np.zeros((T, 4, 4), dtype=np.uint8)
    for t in range(T):
        for i, j in blocks[t % 2]:
            adjacency[t, i, j] = adjacency[t, j, i] = 1
    return GraphSequence(adjacency)


class TestExactMle:
    def test_single_class_is_edge_frequency(self, rng):
        x = random_graphs(rng, 5, 3)
        report = exact_mle(x, 1, MleConfig(restarts=2, zeta=0.01))
        expected = np.clip(x.density(), 0.01, 0.99)
        assert report.params.pi[0, 0] == pytest.approx(expected, abs=1e-8)
        assert report.params.gamma[0, 0] == 1.0
        assert report.residual_max == pytest.approx(0.0, abs=1e-12)

    def test_beats_the_truth(self, theta2):
        config = MleConfig(restarts=6, delta=0.05, zeta=0.05)
        for seed in (1, 2, 3):
            x = simulate(theta2, 4, 3, seed)
            report = exact_mle(x, 2, config)
            truth = exact_loglik(theta2, x).value
            assert report.search_objective >= truth - 1e-6
            assert report.objective >= report.search_objective - 1e-8

    def test_random_points_do_not_improve(self, theta2, rng):
        x = simulate(theta2, 4, 3, seed=10)
        report = exact_mle(x, 2, MleConfig(restarts=8, delta=0.05, zeta=0.05))
        for _ in range(100):
            point = random_params(rng, 2, delta=0.05, zeta=0.05)
            assert exact_loglik(point, x).value <= report.objective + 1e-6

    def test_stays_in_the_parameter_set(self, theta2):
        x = simulate(theta2, 4, 3, seed=4)
        report = exact_mle(x, 2, MleConfig(restarts=3, delta=0.1, zeta=0.05))
        assert np.all(report.params.gamma >= 0.1 - 1e-12)
        assert np.all(report.params.pi >= 0.05 - 1e-12)
        assert np.all(report.params.pi <= 0.95 + 1e-12)
        np.testing.assert_allclose(report.params.gamma.sum(axis=1), 1.0, atol=1e-12)

    def test_polish_never_loses_likelihood(self, theta2):
        config = MleConfig(restarts=4, delta=0.1, zeta=0.05)
        for seed in range(1, 7):
            x = simulate(theta2, 4, 3, seed)
            report = exact_mle(x, 2, config)
            assert report.objective >= report.search_objective - 1e-8
            assert report.objective == pytest.approx(exact_loglik(report.params, x).value, abs=1e-10)

    def test_fixed_point_at_interior_solution(self):
        """Half the nodes switch blocks at every step, so the maximiser has gamma near 1/2"""
        x = alternating_blocks(6)
        report = exact_mle(x, 2, MleConfig(restarts=6, delta=0.1, zeta=0.05))
        np.testing.assert_allclose(report.params.gamma, 0.5, atol=0.05)
        assert not any('gamma' in e for e in report.projection_events)
        assert report.residual_max < 1e-6

    def test_time_varying(self, theta2):
        x = simulate(theta2, 3, 2, seed=5)
        report = exact_mle(x, 2, MleConfig(restarts=2, time_varying_pi=True))
        assert report.params.pi.shape == (2, 2, 2)
        assert report.method == 'exact-mle'

    def test_deterministic(self, theta2):
        x = simulate(theta2, 4, 2, seed=6)
        a = exact_mle(x, 2, MleConfig(restarts=2, seed=3)).to_dict()
        b = exact_mle(x, 2, MleConfig(restarts=2, seed=3)).to_dict()
        assert a == b
        assert a['wall_ms'] == 0.0

    def test_warm_start_is_a_restart(self, theta2):
        x = simulate(theta2, 4, 3, seed=7)
        report = exact_mle(x, 2, MleConfig(restarts=1), warm_start=theta2)
        assert [r['start'] for r in report.restarts] == ['random', 'warm']

    def test_size_cap(self, rng):
        with pytest.raises(UnsupportedSizeException):
            exact_mle(random_graphs(rng, 20, 2), 2)


class TestMleResidual:
    def test_prior_is_self_consistent(self, rng):
        """Flat connectivity leaves the posterior at the prior, a fixed point"""
        params = ModelParams(gamma=[[0.9, 0.1], [0.3, 0.7]], pi=np.full((2, 2), 0.3))
        residual = mle_gamma_fixed_point_residual(params, random_graphs(rng, 4, 3))
        np.testing.assert_allclose(residual, 0.0, atol=1e-12)

    def test_shape(self, rng):
        residual = mle_gamma_fixed_point_residual(random_params(rng, 3), random_graphs(rng, 3, 3))
        assert residual.shape == (3, 3)
        assert np.all(np.isfinite(residual))
        np.testing.assert_allclose(residual.sum(axis=1), 0.0, atol=1e-10)

    def test_single_time_step(self, rng):
        with pytest.raises(UndefinedResidualException):
            mle_gamma_fixed_point_residual(random_params(rng, 2), random_graphs(rng, 3, 1))
