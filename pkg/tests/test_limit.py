"""Limiting contrast M(pi, A) and its supremum over row-stochastic A."""

from itertools import permutations

import numpy as np
import pytest

from dynsbm.exact.limit import limit_M, limit_M_sup, limit_M_T
from dynsbm.generic.exceptions import ShapeMismatchException, UnsupportedSizeException
from dynsbm.model.params import bernoulli_entropy, bernoulli_kl, stationary_distribution

from .conftest import random_connectivity, random_stochastic


def random_rows(rng, q):
    return rng.dirichlet(np.ones(q), size=q)


class TestLimitM:
    def test_single_class(self):
        value = limit_M([[0.3]], [1.0], [[0.4]], [[1.0]])
        assert value == pytest.approx(0.3 * np.log(0.4) + 0.7 * np.log(0.6), rel=1e-14)

    def test_identity_at_truth_is_minus_entropy(self, rng):
        for q in (2, 3, 4):
            pi = random_connectivity(rng, q, 0.05)
            alpha = rng.dirichlet(np.ones(q))
            expected = -np.sum(np.outer(alpha, alpha) * bernoulli_entropy(pi))
            assert limit_M(pi, alpha, pi, np.eye(q)) == pytest.approx(expected, rel=1e-12)

    def test_loss_is_weighted_divergence(self, rng):
        """M(pi*, I) - M(pi*, A) = sum alpha alpha a a KL(pi*_ql, pi*_q'l')"""
        q = 3
        pi = random_connectivity(rng, q, 0.05)
        alpha = rng.dirichlet(np.ones(q))
        for _ in range(20):
            a = random_rows(rng, q)
            kl = bernoulli_kl(pi[:, :, None, None], pi[None, None])
            expected = np.einsum('q,l,qa,lb,qlab->', alpha, alpha, a, a, kl)
            loss = limit_M(pi, alpha, pi, np.eye(q)) - limit_M(pi, alpha, pi, a)
            assert loss == pytest.approx(expected, rel=1e-10, abs=1e-14)

    def test_rejects_non_stochastic(self):
        with pytest.raises(ShapeMismatchException):
            limit_M(np.full((2, 2), 0.5), [0.5, 0.5], np.full((2, 2), 0.5), [[1.0, 0.5], [0.0, 1.0]])
        with pytest.raises(ShapeMismatchException):
            limit_M(np.full((2, 2), 0.5), [0.5, 0.5], np.full((3, 3), 0.5), np.eye(2))


class TestLimitMSup:
    def test_single_class(self):
        value, a = limit_M_sup([[0.3]], [1.0], [[0.4]])
        assert value == pytest.approx(0.3 * np.log(0.4) + 0.7 * np.log(0.6))
        np.testing.assert_array_equal(a, [[1.0]])

    def test_truth_is_maximal(self, rng):
        q = 3
        pi = random_connectivity(rng, q, 0.05)
        alpha = rng.dirichlet(np.ones(q))
        value, _ = limit_M_sup(pi, alpha, pi)
        assert value == pytest.approx(limit_M(pi, alpha, pi, np.eye(q)), abs=1e-12)
        for _ in range(1000):
            assert limit_M(pi, alpha, pi, random_rows(rng, q)) <= value + 1e-12

    def test_dominates_random_matrices(self, rng):
        for q in (2, 3, 4):
            pi_true = random_connectivity(rng, q, 0.05)
            pi = random_connectivity(rng, q, 0.05)
            alpha = rng.dirichlet(np.ones(q))
            value, a = limit_M_sup(pi_true, alpha, pi)
            np.testing.assert_allclose(a.sum(axis=1), 1.0, atol=1e-12)
            assert limit_M(pi_true, alpha, pi, a) == pytest.approx(value, abs=1e-12)
            for _ in range(300):
                assert limit_M(pi_true, alpha, pi, random_rows(rng, q)) <= value + 1e-12

    def test_grid_oracle(self, rng):
        """Two classes: compare with a dense grid over both free coordinates"""
        s = np.linspace(0.0, 1.0, 401)
        su, uu = np.meshgrid(s, s, indexing='ij')
        for _ in range(5):
            pi_true = random_connectivity(rng, 2, 0.1)
            pi = random_connectivity(rng, 2, 0.1)
            alpha = rng.dirichlet(np.ones(2))
            value, _ = limit_M_sup(pi_true, alpha, pi)
            a = np.empty(su.shape + (2, 2))
            a[..., 0, 0], a[..., 0, 1] = 1 - su, su
            a[..., 1, 0], a[..., 1, 1] = uu, 1 - uu
            b = (
                pi_true[:, :, None, None] * np.log(pi)[None, None]
                + (1 - pi_true)[:, :, None, None] * np.log1p(-pi)[None, None]
            )
            grid = np.einsum('q,l,...qa,...lb,qlab->...', alpha, alpha, a, a, b)
            assert value >= grid.max() - 1e-12
            assert value - grid.max() < 1e-4

    def test_separation_gap(self, rng):
        """M(pi*) - M(pi) exceeds 2 delta^2 eps^2 / Q^2 away from the label orbit of pi*"""
        delta, eps = 0.1, 0.05
        truths = {
            2: np.array([[0.8, 0.2], [0.2, 0.5]]),
            3: np.array([[0.8, 0.2, 0.3], [0.2, 0.6, 0.1], [0.3, 0.1, 0.4]]),
        }
        for q, pi_true in truths.items():
            alpha = stationary_distribution(random_stochastic(rng, q, delta)).alpha
            best = -np.sum(np.outer(alpha, alpha) * bernoulli_entropy(pi_true))
            checked = 0
            while checked < 50:
                pi = random_connectivity(rng, q, 0.05)
                distance = min(
                    np.max(np.abs(pi_true - pi[np.ix_(p, p)])) for p in permutations(range(q))
                )
                if distance <= eps:
                    continue
                value, _ = limit_M_sup(pi_true, alpha, pi)
                assert best - value > 2 * delta**2 * eps**2 / q**2
                checked += 1

    def test_size_cap(self):
        with pytest.raises(UnsupportedSizeException):
            limit_M_sup(np.full((6, 6), 0.5), np.full(6, 1 / 6), np.full((6, 6), 0.5))


class TestLimitMT:
    def test_constant_stack_matches_stationary(self, rng):
        pi_true = random_connectivity(rng, 2, 0.05)
        pi = random_connectivity(rng, 2, 0.05)
        alpha = np.array([0.4, 0.6])
        value, _ = limit_M_sup(pi_true, alpha, pi)
        stack = limit_M_T(np.stack([pi_true] * 3), alpha, np.stack([pi] * 3))
        assert stack == pytest.approx(value, rel=1e-12)

    def test_average_of_steps(self, rng):
        pi_true = random_connectivity(rng, 2, 0.05, T=3)
        pi = random_connectivity(rng, 2, 0.05, T=3)
        alpha = np.array([0.5, 0.5])
        expected = np.mean([limit_M_sup(pi_true[t], alpha, pi[t])[0] for t in range(3)])
        assert limit_M_T(pi_true, alpha, pi) == pytest.approx(expected)

    def test_shapes(self):
        with pytest.raises(ShapeMismatchException):
            limit_M_T(np.full((2, 2), 0.5), [0.5, 0.5], np.full((2, 2), 0.5))
