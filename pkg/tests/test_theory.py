"""Discrepancy sets and Monte Carlo concentration checks."""

import numpy as np
import pytest

from dynsbm.generic.exceptions import InvalidMarginException, ShapeMismatchException
from dynsbm.model.params import ModelParams
from dynsbm.model.sampler import LatentPaths, sample_latent_paths
from dynsbm.theory.bounds import (
    concentration_report,
    discrepancy_set_size,
    hamming,
    hamming_up_to_permutation,
)

DISTINCT_PI = {
    2: np.array([[0.8, 0.3], [0.3, 0.5]]),
    3: np.array([[0.8, 0.3, 0.2], [0.3, 0.6, 0.1], [0.2, 0.1, 0.45]]),
}


@pytest.fixture
def theta_delta():
    return ModelParams(
        gamma=[[0.7, 0.3], [0.2, 0.8]], pi=DISTINCT_PI[2], delta=0.2, zeta=0.05
    )


class TestHamming:
    def test_counts(self):
        a = LatentPaths([[0, 1], [1, 1]])
        b = LatentPaths([[0, 0], [1, 0]])
        assert hamming(a, b) == 2
        assert hamming(a, a) == 0

    def test_up_to_permutation(self):
        a = LatentPaths([[0, 1], [1, 1], [1, 0]])
        swapped = LatentPaths([[1, 0], [0, 0], [0, 1]])
        assert hamming(a, swapped) == 6
        assert hamming_up_to_permutation(a, swapped, 2) == 0

    def test_shapes(self):
        with pytest.raises(ShapeMismatchException):
            hamming(LatentPaths([[0, 1]]), LatentPaths([[0], [1]]))


class TestDiscrepancySet:
    def test_identical_configurations(self, rng):
        z = LatentPaths(rng.integers(0, 3, size=(10, 4)))
        report = discrepancy_set_size(z, z, DISTINCT_PI[3], delta=0.2, eta=0.1)
        assert report.d_size == 0
        assert report.r == 0

    def test_single_change(self, rng):
        n = 12
        z_star = LatentPaths(rng.integers(0, 3, size=(n, 3)))
        labels = np.array(z_star.labels)
        labels[4, 1] = (labels[4, 1] + 1) % 3
        report = discrepancy_set_size(LatentPaths(labels), z_star, DISTINCT_PI[3], delta=0.2, eta=0.1)
        assert report.r == 1
        assert report.d_size == n - 1
        assert report.upper_ok

    def test_bounds_on_random_perturbations(self, rng, theta_delta):
        checked = 0
        for trial in range(1000):
            n, T = int(rng.integers(10, 51)), int(rng.integers(1, 11))
            z_star = sample_latent_paths(theta_delta, n, T, seed=trial)
            labels = np.array(z_star.labels)
            flip = rng.random(labels.shape) < rng.uniform(0.0, 0.5)
            labels[flip] = rng.integers(0, 2, size=int(flip.sum()))
            report = discrepancy_set_size(
                LatentPaths(labels), z_star, theta_delta.pi, delta=0.2, eta=0.1, alpha=theta_delta.alpha
            )
            assert report.upper_ok
            if report.in_omega:
                assert report.lower_ok
                checked += 1
        assert checked > 150

    def test_time_varying_connectivity(self, rng):
        pi = np.stack([DISTINCT_PI[2], DISTINCT_PI[2][::-1, ::-1]])
        z = LatentPaths(rng.integers(0, 2, size=(6, 2)))
        assert discrepancy_set_size(z, z, pi, delta=0.2, eta=0.1).d_size == 0

    def test_eta_range(self):
        z = LatentPaths([[0], [1]])
        with pytest.raises(InvalidMarginException):
            discrepancy_set_size(z, z, DISTINCT_PI[2], delta=0.1, eta=0.1)


class TestConcentration:
    def test_single_class_has_no_deviation(self):
        params = ModelParams(gamma=[[1.0]], pi=[[0.3]], delta=0.2)
        report = concentration_report(params, 30, 4, replicates=200, seed=0)
        assert report.passed
        for check in report.checks:
            assert check.estimate == 0.0

    def test_check_names(self, theta_delta):
        report = concentration_report(theta_delta, 20, 3, replicates=50, seed=1)
        names = [c.name for c in report.checks]
        assert names[0] == 'omega_failure'
        assert 'transition_1_0' in names
        assert 'pairs_0_1' in names and 'pairs_1_0' not in names
        assert len(report.to_frame()) == len(names)
        assert report.to_dict()['replicates'] == 50

    def test_single_time_step(self, theta_delta):
        report = concentration_report(theta_delta, 20, 1, replicates=50, seed=1)
        assert not any(c.name.startswith('transition') for c in report.checks)

    def test_transition_quantiles(self, theta_delta):
        report = concentration_report(theta_delta, 20, 4, replicates=300, seed=2)
        for check in report.checks:
            if check.name.startswith('transition'):
                assert 0.0 <= check.q50 <= check.q90 <= check.q99
            else:
                assert check.q50 is None and check.q90 is None and check.q99 is None
        frame = report.to_frame()
        assert {'q50', 'q90', 'q99'} <= set(frame.columns)
        assert frame.loc[frame['name'] == 'transition_0_1', 'q99'].notna().all()

    def test_batches_are_deterministic(self, theta_delta):
        a = concentration_report(theta_delta, 15, 3, replicates=1500, seed=7).to_dict()
        b = concentration_report(theta_delta, 15, 3, replicates=1500, seed=7).to_dict()
        assert a == b

    def test_eta_range(self, theta_delta):
        with pytest.raises(InvalidMarginException):
            concentration_report(theta_delta, 10, 2, replicates=10, seed=0, eta=0.3)

    @pytest.mark.stochastic
    def test_bounds_hold(self, theta_delta):
        report = concentration_report(theta_delta, 200, 5, replicates=2000, seed=3, eta=0.1)
        assert report.passed, str(report)

    @pytest.mark.stochastic
    @pytest.mark.parametrize('n', [50, 100])
    def test_pair_moments(self, theta_delta, n):
        report = concentration_report(theta_delta, n, 2, replicates=2000, seed=n)
        for name in ('pairs_0_0', 'pairs_0_1', 'pairs_1_1'):
            assert report[name].passed

    @pytest.mark.slow
    @pytest.mark.stochastic
    def test_bounds_hold_large_sample(self, theta_delta):
        report = concentration_report(theta_delta, 200, 5, replicates=10_000, seed=4, eta=0.1)
        assert report.passed, str(report)
