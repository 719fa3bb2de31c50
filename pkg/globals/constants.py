import logging

PARQUET_CONF = {
    "engine": "pyarrow",
    "compression": "lz4",
    "compression_level": 11
}

LOGGER_NAME = "peakon_lab"
CONSOLE_HANDLER = "peakon_lab.console"
LOG_FORMAT = "%(asctime)s  %(levelname)-8.8s: %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%dT%H:%M:%S%z"
QUIET_LEVELS = (logging.INFO, logging.WARNING, logging.ERROR)

SCENARIO_KINDS: list[str] = [
    "ode-sim",
    "pde-sim",
    "spectrum",
    "asymptotics",
    "stability-report",
    "lemma-audit",
    ]

ORDERED_POSITIVE_KINDS: list[str] = ["spectrum", "asymptotics", "stability-report"]

EXIT_CODES: dict[str, int] = {
    "pass": 0,
    "audit_failure": 1,
    "config_error": 2,
    "numeric_failure": 3,
}

DEFAULT_SEED = 42

INTEGRATOR_DEFAULTS: dict[str, float] = {
    "rtol": 1e-10,
    "atol": 1e-12,
    "max_step": 1.0,
    "collision_gap": 1e-6,
    "sample_dt": 0.1,
}
MIN_RTOL = 1e-14

SPECTRUM_DEFAULTS: dict[str, float] = {
    "tol": 1e-9,
    "horizon": 200.0,
}
MAX_SPECTRUM_SIZE = 64

PDE_DEFAULTS: dict[str, float | int | None] = {
    "half_width": 100.0,
    "N": 8192,
    "cfl": 0.4,
    "viscosity": 0.0,
    "frame_speed": None,
    "mollifier_n": 1000,
    "snapshot_dt": 1.0,
    "slope_ceiling": 1e3,
    "boundary_margin": 20.0,
}
MIN_PDE_POINTS = 256
MAX_CFL = 0.5

AUDIT_DEFAULTS: dict[str, float | int] = {
    "cases": 100,
    "magnitude": 1e-3,
    "n0": 8,
    "t_end": 100.0,
    "drift_tolerance": 1e-6,
    "pde_drift_tolerance": 1e-3,
    "asymptotic_tolerance": 1e-3,
}

OUTPUT_DEFAULTS: dict[str, str] = {
    "prefix": "peakon-run",
}

MIN_GRID_POINTS = 8

# Gauss-Legendre orders and panel layout shared by every quadrature
SEGMENT_ORDER = 32
MOLLIFIER_ORDER = 64
MOLLIFIER_PANELS = 16
SPLIT_LENGTH = 10.0
DOMAIN_PAD = 40.0

PSI_SLOPE = 1.0

IDENTITY_TOLERANCE = 1e-10
INEQUALITY_TOLERANCE = 1e-9
Y_PLUS_TOLERANCE = 1e-12

E_DIFFERENCE_FACTOR = 4.0
F_DIFFERENCE_FACTOR = 120.0
MAX_HEIGHT_FACTOR = 10.0

# Frozen envelope constants, see DESIGN.md for provenance
MONOTONICITY_ENVELOPE = 1.0
LOCALIZED_F_ENVELOPE = 1.0
TRAIN_DISTANCE_ENVELOPE = 1.0

NEWTON_MAX_ITERATIONS = 50
NEWTON_TOLERANCE = 1e-12
NEWTON_MAX_HALVINGS = 30
JACOBIAN_MAX_CONDITION = 1e12

GOLDEN_TOLERANCE = 1e-12

CSV_FLOAT_FORMAT = "%.17g"
