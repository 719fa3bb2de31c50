import unittest

import numpy as np
from scipy.integrate import quad

from agents.peakon_field import (
    difference, energy_density, energy_E, energy_pair_grid, eval_field, eval_field_deriv,
    f_density, field_maximum, functional_F, h1_distance, hypothesis_norm,
    integrate_density_on, momentum_total_variation, reconstruct_from_momentum,
    sample_grid, slope_l4_norm, y_plus_margin)
from globals.errors import DegenerateConfigurationError, InvalidGridError
from globals.types import GridField, PeakonConfig

SPEEDS = (0.25, 1.0, 4.0)


def quad_density(cfg: PeakonConfig, density) -> float:
    """Whole-line integral of density(u, u_x) by adaptive quadrature, split at the kinks."""
    def integrand(x: float) -> float:
        return float(density(eval_field(cfg, x), eval_field_deriv(cfg, x)))
    edges = np.concatenate([[cfg.q.min() - 60], np.sort(cfg.q), [cfg.q.max() + 60]])
    return sum(
        quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
        for lo, hi in zip(edges[:-1], edges[1:]))


class TestConservedFunctionals(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(seed=42)

    def test_peakon_closed_form_values(self):
        for c in SPEEDS:
            peakon = PeakonConfig.peakon(c, 1.5)
            with self.subTest(c=c):
                self.assertLess(abs(energy_E(peakon) - 2*c)/(2*c), 1e-10)
                self.assertLess(abs(functional_F(peakon) - (4/3)*c**2)/((4/3)*c**2), 1e-10)

    def test_energy_against_quadrature(self):
        for _ in range(5):
            cfg = PeakonConfig(
                np.sort(self.rng.uniform(-5, 5, 3)), self.rng.uniform(-2, 2, 3))
            reference = quad_density(cfg, energy_density)
            with self.subTest(cfg=cfg):
                self.assertLess(abs(energy_E(cfg) - reference)/reference, 1e-8)

    def test_functional_against_quadrature(self):
        for _ in range(5):
            cfg = PeakonConfig(
                np.sort(self.rng.uniform(-5, 5, 4)), self.rng.uniform(0.2, 2, 4))
            reference = quad_density(cfg, f_density)
            with self.subTest(cfg=cfg):
                self.assertLess(abs(functional_F(cfg) - reference)/abs(reference), 1e-8)

    def test_translation_invariance(self):
        for shift in (-37.25, 12.5, 100.0):
            cfg = PeakonConfig(
                np.sort(self.rng.uniform(-5, 5, 4)), self.rng.uniform(0.2, 2, 4))
            shifted = PeakonConfig(cfg.q + shift, cfg.p)
            with self.subTest(shift=shift):
                self.assertLess(abs(energy_E(shifted) - energy_E(cfg))/energy_E(cfg), 1e-12)
                self.assertLess(
                    abs(functional_F(shifted) - functional_F(cfg))/functional_F(cfg), 1e-12)

    def test_coincident_positions(self):
        merged = PeakonConfig(np.array([0.0, 0.0]), np.array([0.5, 0.5]))
        self.assertAlmostEqual(functional_F(merged), 4/3, places=12)
        self.assertAlmostEqual(energy_E(merged), 2.0, places=12)


class TestFieldEvaluation(unittest.TestCase):

    def test_derivative_vanishes_at_kink(self):
        peakon = PeakonConfig.peakon(1.0, 2.0)
        self.assertEqual(eval_field_deriv(peakon, 2.0), 0.0)

    def test_derivative_away_from_kink(self):
        peakon = PeakonConfig.peakon(4.0)
        self.assertAlmostEqual(eval_field_deriv(peakon, 1.0), -2*np.exp(-1), places=15)
        self.assertAlmostEqual(eval_field_deriv(peakon, -1.0), 2*np.exp(-1), places=15)

    def test_field_of_train(self):
        train = PeakonConfig.train(np.array([1.0, 4.0]), np.array([0.0, 10.0]))
        self.assertAlmostEqual(eval_field(train, 10.0), 2 + np.exp(-10), places=15)


class TestDistances(unittest.TestCase):

    def test_difference_with_itself(self):
        cfg = PeakonConfig(np.array([-1.0, 2.0]), np.array([1.0, -0.5]))
        self.assertAlmostEqual(energy_E(difference(cfg, cfg)), 0.0, places=14)

    def test_h1_distance_of_shifted_peakon(self):
        for z in (0.1, 1.0, 5.0):
            with self.subTest(z=z):
                self.assertAlmostEqual(
                    h1_distance(PeakonConfig.peakon(1.0), PeakonConfig.peakon(1.0, z)),
                    np.sqrt(4*(1 - np.exp(-z))), places=12)

    def test_slope_l4_norm_of_peakon(self):
        for c in SPEEDS:
            with self.subTest(c=c):
                self.assertAlmostEqual(
                    slope_l4_norm(PeakonConfig.peakon(c)), (c**2/2)**0.25, places=12)

    def test_hypothesis_norm_vanishes_on_reference(self):
        peakon = PeakonConfig.peakon(2.0)
        self.assertAlmostEqual(hypothesis_norm(peakon, peakon), 0.0, places=12)


class TestWindowedIntegrals(unittest.TestCase):

    def test_whole_line(self):
        self.assertAlmostEqual(
            integrate_density_on(PeakonConfig.peakon(1.0), energy_density), 2.0, places=12)

    def test_half_line(self):
        self.assertAlmostEqual(
            integrate_density_on(PeakonConfig.peakon(1.0), energy_density, 0.0), 1.0,
            places=12)

    def test_empty_window(self):
        self.assertEqual(
            integrate_density_on(PeakonConfig.peakon(1.0), energy_density, 3.0, 2.0), 0.0)

    def test_weighted_rows(self):
        values = integrate_density_on(
            PeakonConfig.peakon(1.0), energy_density,
            weights=lambda x: np.vstack([np.ones_like(x), 0.5*np.ones_like(x)]))
        np.testing.assert_allclose(values, [2.0, 1.0], rtol=1e-12)


class TestFieldMaximum(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(seed=42)

    def test_peakon(self):
        x, M = field_maximum(PeakonConfig.peakon(4.0, -3.0))
        self.assertEqual(x, -3.0)
        self.assertAlmostEqual(M, 2.0, places=15)

    def test_dominates_dense_sampling(self):
        for _ in range(20):
            cfg = PeakonConfig(
                np.sort(self.rng.uniform(-4, 4, 4)), self.rng.uniform(-2, 2, 4))
            lo, hi = cfg.q.min(), cfg.q.max()
            samples = np.linspace(lo, hi, 20001)
            x, M = field_maximum(cfg, lo, hi)
            with self.subTest(cfg=cfg):
                self.assertGreaterEqual(M, np.max(eval_field(cfg, samples)) - 1e-12)
                self.assertAlmostEqual(M, eval_field(cfg, x), places=12)

    def test_concave_segment(self):
        cfg = PeakonConfig(np.array([-1.0, 1.0]), np.array([-1.0, -1.0]))
        x, M = field_maximum(cfg, -1.0, 1.0)
        self.assertAlmostEqual(x, 0.0, places=12)
        self.assertAlmostEqual(M, -2*np.exp(-1), places=12)

    def test_window(self):
        train = PeakonConfig.train(np.array([4.0, 1.0]), np.array([0.0, 10.0]))
        x, M = field_maximum(train, 5.0, np.inf)
        self.assertEqual(x, 10.0)
        self.assertAlmostEqual(M, 1 + 2*np.exp(-10), places=14)


class TestGridFields(unittest.TestCase):

    def test_exact_derivative_grid(self):
        grid = sample_grid(PeakonConfig.peakon(1.0), -39.995, 0.01, 8000)
        pair = energy_pair_grid(grid)
        self.assertAlmostEqual(pair.E, 2.0, delta=1e-3)
        self.assertAlmostEqual(pair.F, 4/3, delta=1e-3)

    def test_staggered_differences(self):
        grid = sample_grid(PeakonConfig.peakon(1.0), -40.0, 0.01, 8000)
        pair = energy_pair_grid(GridField(grid.x0, grid.dx, grid.u))
        self.assertAlmostEqual(pair.E, 2.0, delta=1e-3)
        self.assertAlmostEqual(pair.F, 4/3, delta=1e-3)

    def test_too_coarse(self):
        with self.assertRaises(InvalidGridError):
            energy_pair_grid(GridField(0.0, 1.0, np.zeros(4)))

    def test_mismatched_derivative(self):
        with self.assertRaises(InvalidGridError):
            energy_pair_grid(GridField(0.0, 1.0, np.zeros(16), np.zeros(15)))


class TestMomentumDensity(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(seed=42)

    def test_reconstruction(self):
        cfg = reconstruct_from_momentum([(0.0, 2.0), (3.0, 1.0)])
        self.assertListEqual(cfg.q.tolist(), [0.0, 3.0])
        self.assertListEqual(cfg.p.tolist(), [1.0, 0.5])

    def test_no_mass(self):
        with self.assertRaises(DegenerateConfigurationError):
            reconstruct_from_momentum([])

    def test_total_variation(self):
        self.assertEqual(momentum_total_variation([(0.0, 1.0), (1.0, -2.0)]), 3.0)

    def test_nonnegative_momentum_gives_y_plus(self):
        for _ in range(20):
            masses = list(zip(
                np.sort(self.rng.uniform(-5, 5, 3)), self.rng.uniform(0, 2, 3)))
            cfg = reconstruct_from_momentum(masses)
            with self.subTest(masses=masses):
                self.assertGreaterEqual(
                    y_plus_margin(cfg, np.linspace(-10, 10, 2001)), -1e-12)

    def test_negative_momentum_leaves_y_plus(self):
        cfg = reconstruct_from_momentum([(0.0, 2.0), (1.0, -1.0)])
        self.assertLess(y_plus_margin(cfg, np.linspace(-3, 3, 601)), 0.0)


if __name__ == '__main__':
    unittest.main()
