from pathlib import Path

import numpy as np

from globals.constants import (
    MAX_CFL, MIN_GRID_POINTS, MIN_PDE_POINTS, MIN_RTOL, ORDERED_POSITIVE_KINDS,
    SCENARIO_KINDS)
from globals.errors import (
    ConfigValidationError, InvalidConfigFileError, InvalidGridError,
    InvalidOutputDirectoryError, NonPositiveAmplitudeError, UnorderedPositionsError)
from globals.types import (
    AuditSettings, GridField, IntegratorSettings, PdeSettings, PeakonConfig, Scenario,
    SpectrumSettings, WeightParams)


class PeakonValidator:

    @staticmethod
    def validate_config(cfg: PeakonConfig) -> None:
        """
        Validates the shape of a peakon configuration: matching non-empty position and
        amplitude vectors with finite entries.

        Args:
            cfg (PeakonConfig): Configuration to be checked.

        Raises:
            ConfigValidationError: If the vectors are empty, mismatched or not finite.
        """
        if cfg.q.ndim != 1 or cfg.q.shape != cfg.p.shape or cfg.n < 1:
            raise ConfigValidationError(
                "q", "q and p must be non-empty sequences of the same length")
        if not (np.all(np.isfinite(cfg.q)) and np.all(np.isfinite(cfg.p))):
            raise ConfigValidationError("q", "q and p must contain only finite values")

    @staticmethod
    def validate_ordered_positive(cfg: PeakonConfig) -> None:
        """
        Validates that all amplitudes are positive and positions strictly ascending.

        Args:
            cfg (PeakonConfig): Configuration to be checked.

        Raises:
            NonPositiveAmplitudeError: If an amplitude is zero or negative.
            UnorderedPositionsError: If two consecutive positions are not ascending.
        """
        PeakonValidator.validate_config(cfg)
        for index, value in enumerate(cfg.p):
            if value <= 0:
                raise NonPositiveAmplitudeError(index, float(value))
        unordered = np.flatnonzero(np.diff(cfg.q) <= 0)
        if unordered.size:
            raise UnorderedPositionsError(int(unordered[0]))

    @staticmethod
    def is_ordered_positive(cfg: PeakonConfig) -> bool:
        return bool(np.all(cfg.p > 0) and np.all(np.diff(cfg.q) > 0))

    @staticmethod
    def validate_weight_params(params: WeightParams) -> None:
        """
        Validates the weight family parameters.

        Args:
            params (WeightParams): Parameters to be checked.

        Raises:
            ConfigValidationError: If slope is not positive, K is below 1 or the centers
            are not strictly ascending.
        """
        if params.slope <= 0:
            raise ConfigValidationError("slope", "slope must be positive")
        if params.K < 1:
            raise ConfigValidationError("K", "K must be at least 1")
        centers = np.asarray(params.centers, dtype=float)
        if np.any(np.isnan(centers)) or np.any(np.diff(centers) <= 0):
            raise ConfigValidationError("centers", "centers must be strictly ascending")


class GridValidator:

    @staticmethod
    def validate_grid(field: GridField) -> None:
        """
        Validates a grid field.

        Args:
            field (GridField): Grid to be checked.

        Raises:
            InvalidGridError: If the grid has fewer than MIN_GRID_POINTS points, a
            non-positive spacing or a derivative of mismatched length.
        """
        if field.N < MIN_GRID_POINTS:
            raise InvalidGridError(
                f"{field.N} point(s), at least {MIN_GRID_POINTS} are required")
        if not field.dx > 0:
            raise InvalidGridError(f"spacing dx = {field.dx} is not positive")
        if field.ux is not None and len(field.ux) != field.N:
            raise InvalidGridError(
                f"derivative has {len(field.ux)} point(s), expected {field.N}")


class SettingsValidator:

    @staticmethod
    def validate_integrator(settings: IntegratorSettings) -> None:
        """
        Validates integrator settings.

        Raises:
            ConfigValidationError: If any setting is not positive or rtol is below
            MIN_RTOL.
        """
        for name in ("rtol", "atol", "max_step", "collision_gap", "sample_dt"):
            if not getattr(settings, name) > 0:
                raise ConfigValidationError(name, f"{name} must be positive")
        if settings.rtol < MIN_RTOL:
            raise ConfigValidationError("rtol", f"rtol must be at least {MIN_RTOL}")

    @staticmethod
    def validate_pde(settings: PdeSettings) -> None:
        """
        Validates PDE solver settings.

        Raises:
            ConfigValidationError: If the grid is too small, the CFL factor out of range,
            the viscosity or a fixed frame speed negative or any length/index not
            positive.
        """
        if settings.N < MIN_PDE_POINTS:
            raise ConfigValidationError("N", f"N must be at least {MIN_PDE_POINTS}")
        if not 0 < settings.cfl <= MAX_CFL:
            raise ConfigValidationError("cfl", f"cfl must be in (0, {MAX_CFL}]")
        if settings.viscosity < 0:
            raise ConfigValidationError("viscosity", "viscosity must be nonnegative")
        if settings.frame_speed is not None and settings.frame_speed < 0:
            raise ConfigValidationError("frame_speed", "frame_speed must be nonnegative")
        for name in (
                "half_width", "mollifier_n", "snapshot_dt", "slope_ceiling",
                "boundary_margin"):
            if not getattr(settings, name) > 0:
                raise ConfigValidationError(name, f"{name} must be positive")

    @staticmethod
    def validate_spectrum(settings: SpectrumSettings) -> None:
        for name in ("tol", "horizon"):
            if not getattr(settings, name) > 0:
                raise ConfigValidationError(name, f"{name} must be positive")

    @staticmethod
    def validate_audit(settings: AuditSettings) -> None:
        if settings.cases < 1:
            raise ConfigValidationError("cases", "cases must be at least 1")
        if settings.magnitude < 0:
            raise ConfigValidationError("magnitude", "magnitude must be nonnegative")
        if settings.n0 < 1:
            raise ConfigValidationError("n0", "n0 must be at least 1")
        if settings.K is not None and settings.K < 1:
            raise ConfigValidationError("K", "K must be at least 1")
        for name in ("t_end", "L"):
            value = getattr(settings, name)
            if value is not None and not value > 0:
                raise ConfigValidationError(name, f"{name} must be positive")


class ScenarioValidator:

    @staticmethod
    def validate_scenario(scenario: Scenario) -> None:
        """
        Validates a scenario: known kind, kind-specific blocks present, ordered-positive
        initial data where the pipeline requires it, and every settings block.

        Args:
            scenario (Scenario): Scenario to be checked.

        Raises:
            ConfigValidationError: If any of the checks fails, naming the offending field.
        """
        if scenario.kind not in SCENARIO_KINDS:
            raise ConfigValidationError(
                "kind", f"kind must be one of {', '.join(SCENARIO_KINDS)}")
        if scenario.initial is None and scenario.kind != "lemma-audit":
            raise ConfigValidationError("initial", "initial q and p are required")
        if scenario.kind in ("ode-sim", "pde-sim") and scenario.t_end is None:
            raise ConfigValidationError("t_end", f"t_end is required for {scenario.kind}")
        if scenario.initial is not None:
            PeakonValidator.validate_config(scenario.initial)
            if scenario.kind in ORDERED_POSITIVE_KINDS:
                if np.any(np.diff(scenario.initial.q) <= 0):
                    raise ConfigValidationError("q", "q must be ascending")
                if np.any(scenario.initial.p <= 0):
                    raise ConfigValidationError("p", "p must be positive")
        if (scenario.kind == "pde-sim" and scenario.t_end is not None
                and scenario.t_end <= 0):
            raise ConfigValidationError("t_end", "t_end must be positive for pde-sim")
        SettingsValidator.validate_integrator(scenario.integrator)
        SettingsValidator.validate_spectrum(scenario.spectrum)
        SettingsValidator.validate_pde(scenario.pde)
        SettingsValidator.validate_audit(scenario.audit)


class CommandLineArgsValidator:
    kind: str
    config_paths: list[Path]
    output_prefix: Path | None
    seed: int | None
    workers: int
    parquet_required: bool
    quiet: int
    verbose: bool

    def _validate_config_paths(self) -> None:
        """
        Validates the paths to the configuration files, checking if they actually are
        files.

        Raises:
            InvalidConfigFileError: If any of the given paths is not a file.
        """
        for config_path in self.config_paths:
            if not config_path.is_file():
                raise InvalidConfigFileError(config_path)

    def _validate_output_prefix(self) -> None:
        """
        Validates the output prefix, checking that its parent directory exists.

        Raises:
            InvalidOutputDirectoryError: If the parent directory does not exist.
        """
        if self.output_prefix is not None and not self.output_prefix.parent.is_dir():
            raise InvalidOutputDirectoryError(self.output_prefix.parent)

    def _validate_workers(self) -> None:
        """
        Validates the number of worker processes.

        Raises:
            ConfigValidationError: If the number is not positive.
        """
        if self.workers < 1:
            raise ConfigValidationError("workers", "workers must be a positive integer")

    def validate_arguments(self) -> None:
        """Executes all validation methods from the class."""
        self._validate_config_paths()
        self._validate_output_prefix()
        self._validate_workers()
