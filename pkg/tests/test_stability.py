import unittest

import numpy as np

from agents.multipeakon_ode import integrate
from agents.peakon_field import energy_E, functional_F, hypothesis_norm, sample_grid
from agents.perturbations import perturb
from agents.stability import (
    ef_difference_bounds, f_upper_bound_check, interval_maxima, localized_energies,
    localized_f_bound, max_height_bound, max_height_sum, orbital_bound, orbital_distance,
    orbital_stability_audit, single_peakon_identity, train_distance, train_identity)
from globals.errors import PreconditionUnmetError, SeparationTooSmallError
from globals.types import GridField, IntegratorSettings, OdeState, PeakonConfig

SPEEDS = (0.25, 1.0, 4.0)


class TestSinglePeakonEstimates(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(seed=42)

    def test_identity_on_random_configurations(self):
        for _ in range(20):
            v = PeakonConfig(
                np.sort(self.rng.uniform(-5, 5, 3)), self.rng.uniform(-2, 2, 3))
            c, z = self.rng.uniform(0.25, 4), self.rng.uniform(-5, 5)
            with self.subTest(v=v, c=c, z=z):
                self.assertLess(single_peakon_identity(v, c, z).gap, 1e-10)

    def test_f_upper_bound_on_positive_configurations(self):
        for _ in range(20):
            v = PeakonConfig(
                np.sort(self.rng.uniform(-5, 5, 4)), self.rng.uniform(0.2, 2, 4))
            with self.subTest(v=v):
                self.assertGreaterEqual(f_upper_bound_check(v).slack, -1e-9)

    def test_f_upper_bound_saturated_by_peakon(self):
        for c in SPEEDS:
            with self.subTest(c=c):
                self.assertAlmostEqual(
                    f_upper_bound_check(PeakonConfig.peakon(c)).slack, 0.0, places=10)

    def test_ef_difference_bounds_near_peakon(self):
        for c in SPEEDS:
            v = perturb(PeakonConfig.peakon(c), 1e-3, seed=7).config
            eps = 2*hypothesis_norm(v, PeakonConfig.peakon(c))
            with self.subTest(c=c):
                report = ef_difference_bounds(v, c, eps)
                self.assertTrue(report.holds)
                self.assertLess(report.hypothesis_norm, eps)

    def test_ef_difference_precondition(self):
        v = perturb(PeakonConfig.peakon(1.0), 1e-3, seed=7).config
        eps = 0.5*hypothesis_norm(v, PeakonConfig.peakon(1.0))
        with self.assertRaises(PreconditionUnmetError):
            ef_difference_bounds(v, 1.0, eps)

    def test_max_height_bound_near_peakon(self):
        v = perturb(PeakonConfig.peakon(1.0), 1e-3, seed=7).config
        eps = 2*hypothesis_norm(v, PeakonConfig.peakon(1.0))
        self.assertTrue(max_height_bound(v, 1.0, eps).holds)

    def test_max_height_precondition(self):
        with self.assertRaises(PreconditionUnmetError):
            max_height_bound(PeakonConfig.peakon(4.0), 1.0, 1e-3)


class TestTrainIdentity(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(seed=42)

    def test_gap_is_within_envelope(self):
        speeds, z = np.array([1.0, 2.0]), np.array([0.0, 20.0])
        for _ in range(10):
            v = PeakonConfig(
                np.sort(self.rng.uniform(-5, 25, 4)), self.rng.uniform(-2, 2, 4))
            report = train_identity(v, speeds, z, 20.0)
            with self.subTest(v=v):
                self.assertLessEqual(report.gap, report.envelope + 1e-10)

    def test_gap_is_cross_energy_of_train(self):
        speeds, z = np.array([1.0, 4.0]), np.array([0.0, 12.0])
        report = train_identity(PeakonConfig.peakon(1.0), speeds, z, 12.0)
        self.assertAlmostEqual(report.gap, 4*2*np.exp(-12), places=12)

    def test_separation_too_small(self):
        with self.assertRaises(SeparationTooSmallError):
            train_identity(
                PeakonConfig.peakon(1.0), np.array([1.0, 2.0]), np.array([0.0, 5.0]), 20.0)


class TestLocalizedEnergies(unittest.TestCase):

    def setUp(self):
        self.cfg = PeakonConfig(np.array([0.0, 10.0]), np.array([1.0, 1.2]))
        self.centers = np.array([-np.inf, 5.0])

    def test_partition_sums_to_totals(self):
        sample = localized_energies(self.cfg, self.centers, 1.5)

        self.assertAlmostEqual(np.sum(sample.E), energy_E(self.cfg), places=8)
        self.assertAlmostEqual(np.sum(sample.F), functional_F(self.cfg), places=8)
        self.assertAlmostEqual(sample.I[0], energy_E(self.cfg), places=8)

    def test_grid_agrees_with_configuration(self):
        grid = sample_grid(self.cfg, -39.995, 0.01, 9000)

        exact = localized_energies(self.cfg, self.centers, 1.0)
        sampled = localized_energies(grid, self.centers, 1.0)

        np.testing.assert_allclose(sampled.I, exact.I, atol=5e-3)
        np.testing.assert_allclose(sampled.E, exact.E, atol=5e-3)
        np.testing.assert_allclose(sampled.F, exact.F, atol=5e-3)

    def test_interval_maxima_of_separated_train(self):
        cfg = PeakonConfig.train(np.array([1.0, 2.25]), np.array([0.0, 30.0]))

        positions, heights = interval_maxima(cfg, np.array([-np.inf, 15.0]))

        self.assertListEqual(positions.tolist(), [0.0, 30.0])
        np.testing.assert_allclose(heights, [1.0, 1.5], atol=1e-12)

    def test_localized_f_bound_of_separated_train(self):
        cfg = PeakonConfig.train(np.array([1.0, 2.25]), np.array([0.0, 40.0]))
        report = localized_f_bound(cfg, np.array([-np.inf, 20.0]), 1.0, 40.0)

        self.assertTrue(report.holds)
        self.assertAlmostEqual(report.envelope, 1/np.sqrt(40.0), places=14)


class TestOrbitalStability(unittest.TestCase):

    def test_distance_of_shifted_peakon(self):
        self.assertAlmostEqual(
            orbital_distance(PeakonConfig.peakon(2.0, 7.0), 2.0), 0.0, places=6)

    def test_distance_of_grid_peakon(self):
        grid = sample_grid(PeakonConfig.peakon(1.0), -40.0, 0.01, 8000)
        self.assertLess(orbital_distance(GridField(grid.x0, grid.dx, grid.u), 1.0), 0.05)

    def test_bound(self):
        self.assertAlmostEqual(orbital_bound(1.0, 0.1), 1.0, places=14)
        self.assertAlmostEqual(orbital_bound(256.0, 1.0), 2*8*(4 + 8), places=10)

    def test_train_distance(self):
        speeds, z = np.array([1.0, 2.0]), np.array([0.0, 10.0])
        train = PeakonConfig.train(speeds, z)
        self.assertAlmostEqual(train_distance(train, speeds, z), 0.0, places=7)

    def test_max_height_sum(self):
        self.assertEqual(max_height_sum(np.array([1.0, 2.0]), np.array([1.0, 4.0])), 0.0)
        self.assertAlmostEqual(
            max_height_sum(np.array([1.1, 2.0]), np.array([1.0, 4.0])), 0.1, places=14)

    def test_perturbed_peakon_stays_close(self):
        perturbation = perturb(PeakonConfig.peakon(1.0), 1e-3, seed=42)
        traj = integrate(
            OdeState(0.0, perturbation.config), 10.0, IntegratorSettings(sample_dt=1.0))

        trend = orbital_stability_audit(1.0, perturbation, traj)

        self.assertTrue(trend.holds)
        self.assertAlmostEqual(trend.eps, perturbation.hypothesis_norm**0.25, places=14)


if __name__ == '__main__':
    unittest.main()
