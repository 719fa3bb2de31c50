import logging
import unittest

import numpy as np

from agents.multipeakon_ode import (
    conservation_report, integrate, logger, minimum_separation, ode_rhs, reflect,
    relative_drifts, sample_times)
from globals.errors import CollisionDetectedError, ConfigValidationError
from globals.types import IntegratorSettings, OdeState, PeakonConfig


class TestVectorField(unittest.TestCase):

    def test_single_peakon(self):
        dq, dp = ode_rhs(PeakonConfig.peakon(2.0, 3.0))
        self.assertAlmostEqual(dq[0], 2.0, places=15)
        self.assertEqual(dp[0], 0.0)

    def test_two_peakons(self):
        cfg = PeakonConfig(np.array([0.0, 1.0]), np.array([1.0, 2.0]))
        u = np.array([1 + 2*np.exp(-1), 2 + np.exp(-1)])
        ux = np.array([2*np.exp(-1), -np.exp(-1)])

        dq, dp = ode_rhs(cfg)

        np.testing.assert_allclose(dq, u**2, rtol=1e-15)
        np.testing.assert_allclose(dp, -cfg.p*u*ux, rtol=1e-15)


class TestSampleTimes(unittest.TestCase):

    def test_forward_with_remainder(self):
        np.testing.assert_allclose(sample_times(0.0, 1.0, 0.3), [0, 0.3, 0.6, 0.9, 1.0])

    def test_forward_exact(self):
        times = sample_times(0.0, 1.0, 0.1)
        self.assertEqual(len(times), 11)
        self.assertEqual(times[-1], 1.0)

    def test_backward(self):
        np.testing.assert_allclose(sample_times(0.0, -1.0, 0.5), [0, -0.5, -1.0])


class TestIntegration(unittest.TestCase):

    def test_single_peakon_travels_at_its_speed(self):
        c = 2.0
        traj = integrate(
            OdeState(0.0, PeakonConfig.peakon(c)), 10.0, IntegratorSettings(sample_dt=0.5))

        np.testing.assert_allclose(traj.positions[:, 0], c*traj.times, atol=1e-8)
        np.testing.assert_allclose(traj.amplitudes[:, 0], np.sqrt(c), rtol=1e-14)
        self.assertEqual(len(traj.samples), 21)
        self.assertEqual(len(traj.diagnostics), 21)

    def test_backward_integration(self):
        settings = IntegratorSettings(sample_dt=1.0)
        traj = integrate(OdeState(0.0, PeakonConfig.peakon(1.0)), -5.0, settings)
        self.assertAlmostEqual(traj.samples[-1].t, -5.0)
        self.assertAlmostEqual(traj.samples[-1].cfg.q[0], -5.0, places=8)

    def test_zero_span(self):
        start = OdeState(1.0, PeakonConfig.peakon(1.0))
        traj = integrate(start, 1.0, IntegratorSettings())
        self.assertEqual(len(traj.samples), 1)
        self.assertIs(traj.samples[0], start)

    def test_three_peakon_conservation(self):
        cfg = PeakonConfig(np.array([-4.0, 0.0, 4.0]), np.array([2.0, 1.5, 1.0]))
        traj = integrate(OdeState(0.0, cfg), 100.0, IntegratorSettings(sample_dt=1.0))

        drift_e, drift_f = conservation_report(traj)

        self.assertLess(drift_e, 1e-8)
        self.assertLess(drift_f, 1e-6)
        self.assertGreater(minimum_separation(traj), 0.0)

    def test_tighter_tolerance_reduces_drift(self):
        cfg = PeakonConfig(np.array([-4.0, 0.0, 4.0]), np.array([2.0, 1.5, 1.0]))
        drifts = []
        for rtol in (1e-8, 1e-10):
            settings = IntegratorSettings(rtol=rtol, atol=rtol*1e-2, sample_dt=1.0)
            traj = integrate(OdeState(0.0, cfg), 100.0, settings)
            drifts.append(conservation_report(traj)[0])
        self.assertGreaterEqual(drifts[0], 10*drifts[1])

    def test_reordering_keeps_positions_distinct(self):
        cfg = PeakonConfig(np.array([0.0, 5.0]), np.array([2.0, 1.0]))
        traj = integrate(OdeState(0.0, cfg), 60.0, IntegratorSettings(sample_dt=1.0))
        final = traj.samples[-1].cfg

        self.assertGreater(minimum_separation(traj), 0.0)
        self.assertLess(final.p[0], final.p[1])

    def test_collision(self):
        cfg = PeakonConfig(np.array([-1.0, 1.0]), np.array([1.0, -1.0]))
        settings = IntegratorSettings(collision_gap=1e-2, sample_dt=1.0)
        with (
                self.assertLogs(logger, level=logging.ERROR) as log_context,
                self.assertRaises(CollisionDetectedError) as error_context):
            integrate(OdeState(0.0, cfg), 200.0, settings)

        self.assertEqual((error_context.exception.i, error_context.exception.j), (0, 1))
        self.assertLess(error_context.exception.t, 200.0)
        self.assertIn("collision of peakons 0 and 1", log_context.output[0])

    def test_invalid_settings(self):
        with self.assertRaises(ConfigValidationError):
            integrate(
                OdeState(0.0, PeakonConfig.peakon(1.0)), 1.0, IntegratorSettings(rtol=0.0))


class TestTrajectoryDiagnostics(unittest.TestCase):

    def test_reflection_symmetry(self):
        cfg = PeakonConfig(np.array([-2.0, 1.0, 3.0]), np.array([1.0, 0.5, 1.5]))
        settings = IntegratorSettings(sample_dt=5.0)

        forward = integrate(OdeState(0.0, cfg), 5.0, settings).samples[-1].cfg
        backward = integrate(OdeState(0.0, reflect(cfg)), -5.0, settings).samples[-1].cfg

        np.testing.assert_allclose(reflect(backward).q, forward.q, atol=1e-7)
        np.testing.assert_allclose(reflect(backward).p, forward.p, atol=1e-7)

    def test_relative_drifts_start_at_zero(self):
        cfg = PeakonConfig(np.array([0.0, 3.0]), np.array([1.0, 0.5]))
        traj = integrate(OdeState(0.0, cfg), 5.0, IntegratorSettings(sample_dt=1.0))
        drift_e, drift_f = relative_drifts(traj)
        self.assertEqual(drift_e[0], 0.0)
        self.assertEqual(drift_f[0], 0.0)
        self.assertEqual(len(drift_e), len(traj.samples))

    def test_minimum_separation_single_peakon(self):
        traj = integrate(
            OdeState(0.0, PeakonConfig.peakon(1.0)), 1.0, IntegratorSettings(sample_dt=0.5))
        self.assertEqual(minimum_separation(traj), float("inf"))


if __name__ == '__main__':
    unittest.main()
