import tempfile
import unittest
from pathlib import Path

import numpy as np

from agents.validators import (
    CommandLineArgsValidator, GridValidator, PeakonValidator, ScenarioValidator,
    SettingsValidator)
from globals.errors import (
    ConfigValidationError, InvalidConfigFileError, InvalidGridError,
    InvalidOutputDirectoryError, NonPositiveAmplitudeError, UnorderedPositionsError)
from globals.types import (
    AuditSettings, GridField, IntegratorSettings, PdeSettings, PeakonConfig, Scenario,
    WeightParams)

SAMPLE_ODE_PATH = Path(Path(__file__).parent, "samples", "ode_single.toml")


class TestPeakonValidator(unittest.TestCase):

    def test_valid_config(self):
        cfg = PeakonConfig(np.array([1.0, 0.0]), np.array([1, -1]))
        PeakonValidator.validate_config(cfg)

    def test_invalid_configs(self):
        invalid = {
            "empty": PeakonConfig(np.array([]), np.array([])),
            "mismatched": PeakonConfig(np.array([0.0, 1.0]), np.array([1.0])),
            "not finite": PeakonConfig(np.array([0.0, np.inf]), np.array([1.0, 1.0])),
        }
        for reason, cfg in invalid.items():
            with self.subTest(reason=reason), self.assertRaises(ConfigValidationError):
                PeakonValidator.validate_config(cfg)

    def test_ordered_positive(self):
        cfg = PeakonConfig(np.array([0.0, 1.0]), np.array([1.0, 2.0]))
        PeakonValidator.validate_ordered_positive(cfg)
        self.assertTrue(PeakonValidator.is_ordered_positive(cfg))

    def test_nonpositive_amplitude(self):
        cfg = PeakonConfig(np.array([0.0, 1.0]), np.array([1.0, 0.0]))
        with self.assertRaises(NonPositiveAmplitudeError) as error_context:
            PeakonValidator.validate_ordered_positive(cfg)
        self.assertIn("p[1]", str(error_context.exception))
        self.assertFalse(PeakonValidator.is_ordered_positive(cfg))

    def test_unordered_positions(self):
        cfg = PeakonConfig(np.array([0.0, 2.0, 2.0]), np.array([1.0, 1.0, 1.0]))
        with self.assertRaises(UnorderedPositionsError) as error_context:
            PeakonValidator.validate_ordered_positive(cfg)
        self.assertIn("q[1] >= q[2]", str(error_context.exception))

    def test_weight_params(self):
        PeakonValidator.validate_weight_params(
            WeightParams(1.0, 1.0, np.array([-np.inf, 0.0, 5.0])))
        with self.assertRaises(ConfigValidationError) as error_context:
            PeakonValidator.validate_weight_params(
                WeightParams(1.0, 1.0, np.array([0.0, np.nan])))
        self.assertEqual(error_context.exception.field, "centers")


class TestGridValidator(unittest.TestCase):

    def test_invalid_grids(self):
        invalid = {
            "coarse": GridField(0.0, 0.1, np.zeros(7)),
            "spacing": GridField(0.0, 0.0, np.zeros(16)),
            "derivative": GridField(0.0, 0.1, np.zeros(16), np.zeros(8)),
        }
        for reason, field in invalid.items():
            with self.subTest(reason=reason), self.assertRaises(InvalidGridError):
                GridValidator.validate_grid(field)


class TestSettingsValidator(unittest.TestCase):

    def test_integrator(self):
        invalid = {
            "atol": IntegratorSettings(atol=0.0),
            "sample_dt": IntegratorSettings(sample_dt=-1.0),
            "rtol": IntegratorSettings(rtol=1e-16),
        }
        for field, settings in invalid.items():
            with self.subTest(field=field):
                with self.assertRaises(ConfigValidationError) as error_context:
                    SettingsValidator.validate_integrator(settings)
                self.assertEqual(error_context.exception.field, field)

    def test_pde(self):
        invalid = {
            "N": PdeSettings(N=128),
            "cfl": PdeSettings(cfl=0.6),
            "viscosity": PdeSettings(viscosity=-1.0),
            "frame_speed": PdeSettings(frame_speed=-0.5),
            "boundary_margin": PdeSettings(boundary_margin=0.0),
        }
        for field, settings in invalid.items():
            with self.subTest(field=field):
                with self.assertRaises(ConfigValidationError) as error_context:
                    SettingsValidator.validate_pde(settings)
                self.assertEqual(error_context.exception.field, field)

    def test_audit(self):
        invalid = {
            "cases": AuditSettings(cases=0),
            "magnitude": AuditSettings(magnitude=-1e-3),
            "K": AuditSettings(K=0.5),
            "L": AuditSettings(L=0.0),
        }
        for field, settings in invalid.items():
            with self.subTest(field=field):
                with self.assertRaises(ConfigValidationError) as error_context:
                    SettingsValidator.validate_audit(settings)
                self.assertEqual(error_context.exception.field, field)


class TestScenarioValidator(unittest.TestCase):

    def setUp(self):
        self.initial = PeakonConfig(np.array([0.0, 5.0]), np.array([1.0, 2.0]))

    def test_valid_scenarios(self):
        scenarios = [
            Scenario("ode-sim", self.initial, Path("run"), t_end=1.0),
            Scenario("spectrum", self.initial, Path("run")),
            Scenario("lemma-audit", None, Path("run")),
        ]
        for scenario in scenarios:
            with self.subTest(kind=scenario.kind):
                ScenarioValidator.validate_scenario(scenario)

    def test_invalid_scenarios(self):
        descending = PeakonConfig(np.array([5.0, 0.0]), np.array([1.0, 2.0]))
        negative = PeakonConfig(np.array([0.0, 5.0]), np.array([1.0, -2.0]))
        invalid = {
            "kind": Scenario("heat-sim", self.initial, Path("run")),
            "initial": Scenario("spectrum", None, Path("run")),
            "t_end": Scenario("pde-sim", self.initial, Path("run"), t_end=-1.0),
            "q": Scenario("asymptotics", descending, Path("run")),
            "p": Scenario("stability-report", negative, Path("run")),
        }
        for field, scenario in invalid.items():
            with self.subTest(field=field):
                with self.assertRaises(ConfigValidationError) as error_context:
                    ScenarioValidator.validate_scenario(scenario)
                self.assertEqual(error_context.exception.field, field)

    def test_signed_data_allowed_for_simulations(self):
        negative = PeakonConfig(np.array([0.0, 5.0]), np.array([1.0, -2.0]))
        ScenarioValidator.validate_scenario(
            Scenario("ode-sim", negative, Path("run"), t_end=1.0))


class TestCommandLineArgsValidator(unittest.TestCase):

    def setUp(self):
        self.validator = CommandLineArgsValidator()
        self.validator.config_paths = [SAMPLE_ODE_PATH]
        self.validator.output_prefix = None
        self.validator.workers = 1

    def test_valid_arguments(self):
        with tempfile.TemporaryDirectory() as output_dir:
            self.validator.output_prefix = Path(output_dir, "run")
            self.validator.validate_arguments()

    def test_validate_config_paths(self):
        self.validator.config_paths = [SAMPLE_ODE_PATH, Path("missing.toml")]
        with self.assertRaises(InvalidConfigFileError):
            self.validator.validate_arguments()

    def test_validate_output_prefix(self):
        self.validator.output_prefix = Path("missing-directory", "run")
        with self.assertRaises(InvalidOutputDirectoryError):
            self.validator.validate_arguments()

    def test_validate_workers(self):
        self.validator.workers = 0
        with self.assertRaises(ConfigValidationError) as error_context:
            self.validator.validate_arguments()
        self.assertEqual(error_context.exception.field, "workers")


if __name__ == '__main__':
    unittest.main()
