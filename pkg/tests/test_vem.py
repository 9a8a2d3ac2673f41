"""Variational family, E-step, M-steps, initialisations and the VEM driver."""

import numpy as np
import pytest

from dynsbm.exact.likelihood import conditional_loglik, exact_loglik, latent_prior_loglik
from dynsbm.exact.posterior import exact_posterior_marginals, map_configuration
from dynsbm.generic.exceptions import (
    DegenerateClassException,
    EstimationFailedException,
    NumericalException,
    ShapeMismatchException,
    UndefinedResidualException,
    UnknownStrategyException,
)
from dynsbm.model.params import ModelParams, align_by_pi
from dynsbm.model.sampler import GraphSequence, LatentPaths, sample_graphs, sample_latent_paths
from dynsbm.vem import fit as vem_fit
from dynsbm.vem.estep import e_step, forward_backward
from dynsbm.vem.fit import VemConfig, fit_vem
from dynsbm.vem.init import init_tau, smoothed_one_hot, spectral_labels
from dynsbm.vem.mstep import m_step_gamma, m_step_pi, vem_gamma_fixed_point_residual
from dynsbm.vem.state import ElboTrace, VariationalState, elbo

from .conftest import random_graphs, random_params, random_paths


def random_chain_state(rng, n, T, q):
    """Independent Markov chains per node with random initial laws and kernels"""
    tau = np.empty((T, n, q))
    eta = np.empty((T - 1, n, q, q))
    tau[0] = rng.dirichlet(np.ones(q), size=n)
    for t in range(T - 1):
        kernel = rng.dirichlet(np.ones(q), size=(n, q))
        eta[t] = tau[t][:, :, None] * kernel
        tau[t + 1] = eta[t].sum(axis=1)
    return VariationalState(tau, eta)


def two_cliques(n, T):
    block = np.zeros((n, n), dtype=np.uint8)
    half = n // 2
    block[:half, :half] = 1
    block[half:, half:] = 1
    np.fill_diagonal(block, 0)
    return GraphSequence(np.stack([block] * T))


class TestVariationalState:
    def test_dirac_is_consistent(self, rng):
        z = random_paths(rng, 5, 4, 3)
        chi = VariationalState.dirac(z, 3)
        assert chi.violation() == 0.0
        np.testing.assert_array_equal(chi.hard_labels().labels, z.labels)

    def test_from_tau_is_consistent(self, rng):
        chi = VariationalState.from_tau(rng.dirichlet(np.ones(3), size=(4, 6)))
        chi.check_consistency()

    def test_inconsistent_state(self, rng):
        chi = random_chain_state(rng, 3, 3, 2)
        eta = np.array(chi.eta)
        eta[0, 0] *= 0.5
        with pytest.raises(NumericalException):
            VariationalState(chi.tau, eta).check_consistency()

    def test_shapes(self):
        with pytest.raises(ShapeMismatchException):
            VariationalState(np.ones((2, 3, 2)) / 2, np.ones((2, 3, 2, 2)) / 4)


class TestElbo:
    def test_dirac_is_joint_log_probability(self, rng):
        for _ in range(20):
            params = random_params(rng, 2)
            x = random_graphs(rng, 4, 3)
            z = random_paths(rng, 4, 3, 2)
            expected = conditional_loglik(params, z, x) + latent_prior_loglik(params, z)
            assert elbo(params, x, VariationalState.dirac(z, 2)) == pytest.approx(expected, rel=1e-12)

    def test_single_class(self, rng):
        params = ModelParams(gamma=[[1.0]], pi=[[0.3]])
        x = random_graphs(rng, 5, 3)
        chi = VariationalState.dirac(LatentPaths(np.zeros((5, 3), dtype=int)), 1)
        assert elbo(params, x, chi) == pytest.approx(
            conditional_loglik(params, LatentPaths(np.zeros((5, 3), dtype=int)), x)
        )

    def test_lower_bound(self, rng):
        for _ in range(200):
            q, n, T = rng.integers(2, 4), rng.integers(2, 5), rng.integers(2, 4)
            params = random_params(rng, int(q))
            x = random_graphs(rng, int(n), int(T))
            chi = random_chain_state(rng, int(n), int(T), int(q))
            assert elbo(params, x, chi) <= exact_loglik(params, x).value + 1e-10

    def test_shape_mismatch(self, rng):
        chi = random_chain_state(rng, 3, 2, 2)
        with pytest.raises(ShapeMismatchException):
            elbo(random_params(rng, 3), random_graphs(rng, 3, 2), chi)


class TestForwardBackward:
    def test_flat_emissions_give_the_prior(self):
        gamma = np.array([[0.9, 0.1], [0.3, 0.7]])
        alpha = np.array([0.75, 0.25])
        tau, eta, log_norm = forward_backward(np.log(alpha), np.log(gamma), np.zeros((4, 2)))
        np.testing.assert_allclose(tau, np.tile(alpha, (4, 1)), atol=1e-12)
        np.testing.assert_allclose(eta[2], alpha[:, None] * gamma, atol=1e-12)
        assert log_norm == pytest.approx(0.0, abs=1e-12)

    def test_single_step(self):
        tau, eta, _ = forward_backward(np.log([0.5, 0.5]), np.log(np.full((2, 2), 0.5)), np.log([[0.2, 0.6]]))
        np.testing.assert_allclose(tau, [[0.25, 0.75]])
        assert eta.shape == (0, 2, 2)


class TestEStep:
    def test_flat_connectivity_returns_the_prior(self, rng):
        params = ModelParams(gamma=[[0.9, 0.1], [0.3, 0.7]], pi=np.full((2, 2), 0.3))
        x = random_graphs(rng, 6, 4)
        chi = e_step(params, x, random_chain_state(rng, 6, 4, 2))
        np.testing.assert_allclose(chi.tau, np.broadcast_to(params.alpha, chi.tau.shape), atol=1e-10)
        np.testing.assert_allclose(
            chi.eta, np.broadcast_to(params.alpha[:, None] * params.gamma, chi.eta.shape), atol=1e-10
        )

    def test_ascent(self, rng):
        for _ in range(20):
            params = random_params(rng, 3)
            x = random_graphs(rng, 6, 3)
            start = random_chain_state(rng, 6, 3, 3)
            chi = e_step(params, x, start, max_sweeps=5)
            assert elbo(params, x, chi) >= elbo(params, x, start) - 1e-9
            chi.check_consistency()

    def test_jacobi_keeps_consistency(self, rng):
        params = random_params(rng, 2)
        x = random_graphs(rng, 5, 3)
        chi = e_step(params, x, random_chain_state(rng, 5, 3, 2), jacobi=True, max_sweeps=3)
        chi.check_consistency()

    def test_close_to_exact_posterior_when_concentrated(self):
        params = ModelParams(
            gamma=[[0.7, 0.3], [0.3, 0.7]], pi=[[0.99, 0.01], [0.01, 0.01]], zeta=0.01
        )
        adjacency = np.zeros((2, 3, 3), dtype=np.uint8)
        adjacency[:, 0, 1] = adjacency[:, 1, 0] = 1
        x = GraphSequence(adjacency)
        start = VariationalState.dirac(map_configuration(params, x), 2)
        chi = e_step(params, x, start, tol=1e-10, max_sweeps=200)
        exact = exact_posterior_marginals(params, x)
        assert np.max(np.abs(chi.tau - exact.singles)) < 0.05


class TestMStep:
    def test_gamma_from_dirac_counts(self):
        chi = VariationalState.dirac(LatentPaths([[0, 1, 0, 1]] * 3), 2)
        gamma, projected = m_step_gamma(chi)
        np.testing.assert_allclose(gamma, [[0.0, 1.0], [1.0, 0.0]])
        assert not projected
        gamma, projected = m_step_gamma(chi, delta=0.1)
        np.testing.assert_allclose(gamma, [[0.1, 0.9], [0.9, 0.1]])
        assert projected

    def test_gamma_from_prior_marginals(self, rng):
        params = random_params(rng, 3)
        chi = VariationalState.prior_marginals(params, 4, 5)
        gamma, _ = m_step_gamma(chi)
        np.testing.assert_allclose(gamma, params.gamma, atol=1e-12)

    def test_gamma_against_loops(self, rng):
        chi = random_chain_state(rng, 4, 5, 3)
        gamma, _ = m_step_gamma(chi)
        expected = np.zeros((3, 3))
        for q in range(3):
            den = sum(chi.tau[t, i, q] for t in range(4) for i in range(4))
            for l in range(3):
                num = sum(chi.eta[t, i, q, l] for t in range(4) for i in range(4))
                expected[q, l] = num / den
        np.testing.assert_allclose(gamma, expected, rtol=1e-12)

    def test_gamma_needs_two_steps(self, rng):
        chi = VariationalState.from_tau(rng.dirichlet(np.ones(2), size=(1, 3)))
        with pytest.raises(UndefinedResidualException):
            m_step_gamma(chi)

    def test_empty_class(self):
        chi = VariationalState.dirac(LatentPaths([[0, 0], [0, 0]]), 2)
        with pytest.raises(DegenerateClassException) as err:
            m_step_gamma(chi)
        assert err.value.q == 1

    def test_pi_from_dirac_is_block_density(self, rng):
        z = random_paths(rng, 8, 3, 2)
        x = random_graphs(rng, 8, 3)
        pi, _ = m_step_pi(VariationalState.dirac(z, 2), x)
        num, den = np.zeros((2, 2)), np.zeros((2, 2))
        for t in range(3):
            for i in range(8):
                for j in range(i + 1, 8):
                    a, b = z.labels[i, t], z.labels[j, t]
                    for q, l in {(a, b), (b, a)}:
                        num[q, l] += x.adjacency[t, i, j]
                        den[q, l] += 1
        np.testing.assert_allclose(pi, num / den, rtol=1e-12)

    def test_pi_single_class(self, rng):
        x = random_graphs(rng, 6, 3)
        chi = VariationalState.dirac(LatentPaths(np.zeros((6, 3), dtype=int)), 1)
        pi, _ = m_step_pi(chi, x)
        assert pi[0, 0] == pytest.approx(x.density())

    def test_pi_is_a_stationary_point(self, rng):
        """Central differences of J along each symmetric coordinate of pi vanish"""
        x = random_graphs(rng, 6, 3)
        chi = random_chain_state(rng, 6, 3, 2)
        pi, _ = m_step_pi(chi, x)
        params = ModelParams(gamma=[[0.6, 0.4], [0.3, 0.7]], pi=pi)
        h = 1e-6
        for q, l in [(0, 0), (0, 1), (1, 1)]:
            bump = np.zeros((2, 2))
            bump[q, l] = bump[l, q] = h
            up = elbo(params.replace(pi=pi + bump), x, chi)
            down = elbo(params.replace(pi=pi - bump), x, chi)
            assert abs(up - down) / (2 * h) < 1e-4

    def test_pi_time_varying_and_tied_diagonal(self, rng):
        x = random_graphs(rng, 6, 3)
        chi = random_chain_state(rng, 6, 3, 2)
        pi, _ = m_step_pi(chi, x, time_varying=True)
        assert pi.shape == (3, 2, 2)
        tied, _ = m_step_pi(chi, x, time_varying=True, tie_diagonal=True)
        np.testing.assert_allclose(tied[:, 0, 0], tied[0, 0, 0])
        np.testing.assert_allclose(tied[:, 0, 1], pi[:, 0, 1])

    def test_pi_clamp(self):
        x = GraphSequence(np.zeros((2, 4, 4), dtype=np.uint8))
        chi = VariationalState.dirac(LatentPaths([[0, 0], [0, 0], [1, 1], [1, 1]]), 2)
        pi, clamped = m_step_pi(chi, x, zeta=0.05)
        np.testing.assert_allclose(pi, 0.05)
        assert clamped

    def test_residual_vanishes_after_gamma_update(self, rng):
        chi = random_chain_state(rng, 5, 4, 3)
        gamma, _ = m_step_gamma(chi)
        params = ModelParams(gamma=gamma, pi=np.full((3, 3), 0.5))
        np.testing.assert_allclose(vem_gamma_fixed_point_residual(params, chi), 0.0, atol=1e-14)


class TestInit:
    def test_smoothed_one_hot(self):
        tau = smoothed_one_hot(np.array([0, 2, 1]), 3)
        np.testing.assert_allclose(tau[0], [0.9, 0.05, 0.05])
        np.testing.assert_allclose(tau.sum(axis=1), 1.0)
        np.testing.assert_array_equal(smoothed_one_hot(np.array([0, 0]), 1), 1.0)

    def test_random_dirichlet(self, rng):
        x = random_graphs(rng, 7, 3)
        chi = init_tau(x, 3, 'random-dirichlet', seed=4)
        chi.check_consistency()
        again = init_tau(x, 3, 'random-dirichlet', seed=4)
        np.testing.assert_array_equal(chi.tau, again.tau)

    def test_spectral_splits_two_cliques(self):
        x = two_cliques(40, 3)
        labels = spectral_labels(x, 2, np.random.default_rng(0))
        assert len(set(labels[:20])) == 1
        assert len(set(labels[20:])) == 1
        assert labels[0] != labels[20]

    def test_spectral_state(self):
        chi = init_tau(two_cliques(10, 2), 2, 'spectral-mean-graph', seed=0)
        np.testing.assert_allclose(np.sort(chi.tau[0, 0]), [0.1, 0.9])
        chi.check_consistency()

    def test_warm_start(self, rng, theta2):
        x = random_graphs(rng, 4, 3)
        chi = init_tau(x, 2, 'warm-start', seed=0, warm_start=theta2)
        np.testing.assert_allclose(chi.tau[1, 2], theta2.alpha)
        assert init_tau(x, 2, 'warm-start', seed=0, warm_start=chi) is chi
        with pytest.raises(UnknownStrategyException):
            init_tau(x, 2, 'warm-start', seed=0)

    def test_unknown_strategy(self, rng):
        with pytest.raises(UnknownStrategyException):
            init_tau(random_graphs(rng, 4, 2), 2, 'k-means', seed=0)


class TestElboTrace:
    def test_coupling_is_allowed(self):
        trace = ElboTrace(values=[-10.0, -10.5, -10.4], coupling=[-0.6, 0.0])
        assert trace.is_monotone()
        np.testing.assert_allclose(trace.adjusted(), [-10.0, -9.9, -9.8])

    def test_decrease_is_detected(self):
        assert not ElboTrace(values=[-10.0, -10.5], coupling=[0.0]).is_monotone()

    def test_raw_values(self):
        assert ElboTrace(values=[-10.0, -10.0, -9.5]).is_non_decreasing()
        trace = ElboTrace(values=[-10.0, -10.5, -10.4], coupling=[-0.6, 0.0])
        assert not trace.is_non_decreasing()


class TestFitVem:
    def test_single_class(self, rng):
        x = random_graphs(rng, 8, 3)
        report = fit_vem(x, 1, VemConfig(restarts=2, zeta=0.01))
        assert report.params.pi[0, 0] == pytest.approx(np.clip(x.density(), 0.01, 0.99))
        assert report.params.gamma[0, 0] == 1.0

    def test_run_properties(self, theta2):
        z = sample_latent_paths(theta2, 30, 5, seed=1)
        x = sample_graphs(theta2, z, seed=2)
        report = fit_vem(x, 2, VemConfig(restarts=3, seed=5))
        trace = ElboTrace(report.trace, report.coupling)
        assert trace.is_monotone()
        assert trace.is_non_decreasing()
        report.state.check_consistency()
        assert not any('gamma' in e for e in report.projection_events)
        assert report.residual_max < 1e-8
        assert report.objective == pytest.approx(elbo(report.params, x, report.state))
        assert len(report.restarts) == 3
        assert report.restarts[0]['strategy'] == 'spectral-mean-graph'
        assert report.restarts[1]['strategy'] == 'random-dirichlet'

    def test_trace_never_decreases(self, theta2):
        """Random starts move alpha the most; the Gamma step is halved when J would drop"""
        for seed in (7, 8, 9):
            z = sample_latent_paths(theta2, 30, 5, seed=seed)
            x = sample_graphs(theta2, z, seed=seed + 100)
            report = fit_vem(x, 2, VemConfig(restarts=2, init='random-dirichlet', seed=seed))
            trace = np.asarray(report.trace)
            assert np.all(np.diff(trace) >= -1e-9 * np.abs(trace[:-1]))

    def test_deterministic(self, theta2):
        z = sample_latent_paths(theta2, 20, 4, seed=3)
        x = sample_graphs(theta2, z, seed=4)
        config = VemConfig(restarts=2, seed=9)
        assert fit_vem(x, 2, config).to_dict() == fit_vem(x, 2, config).to_dict()

    def test_bounds_around_the_complete_likelihood(self, theta2):
        """l_c(z_hat) + log P(z_hat) <= J after an E-step started at z_hat"""
        z = sample_latent_paths(theta2, 5, 3, seed=5)
        x = sample_graphs(theta2, z, seed=6)
        z_hat = map_configuration(theta2, x)
        start = VariationalState.dirac(z_hat, 2)
        j_dirac = elbo(theta2, x, start)
        chi = e_step(theta2, x, start)
        assert elbo(theta2, x, chi) >= j_dirac - 1e-9
        assert j_dirac >= exact_loglik(theta2, x).value + 5 * 3 * np.log(theta2.delta) - 1e-9

    def test_all_restarts_degenerate(self, rng, monkeypatch):
        def degenerate(*args, **kwargs):
            raise DegenerateClassException(1, 0.0)

        monkeypatch.setattr(vem_fit, '_m_step', degenerate)
        with pytest.raises(EstimationFailedException) as err:
            fit_vem(random_graphs(rng, 6, 3), 2, VemConfig(restarts=2))
        assert len(err.value.diagnostics) == 2 * 6

    @pytest.mark.slow
    @pytest.mark.stochastic
    def test_recovers_separated_blocks(self):
        truth = ModelParams(gamma=[[0.8, 0.2], [0.2, 0.8]], pi=[[0.8, 0.1], [0.1, 0.8]])
        good = 0
        for seed in range(10):
            z = sample_latent_paths(truth, 60, 10, seed=100 + seed)
            x = sample_graphs(truth, z, seed=200 + seed)
            report = fit_vem(x, 2, VemConfig(restarts=2, seed=seed))
            _, err = align_by_pi(report.params, truth)
            good += err < 0.08
        assert good >= 9
