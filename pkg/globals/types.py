from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from globals.constants import (
    AUDIT_DEFAULTS, DEFAULT_SEED, INTEGRATOR_DEFAULTS, PDE_DEFAULTS, PSI_SLOPE,
    SPECTRUM_DEFAULTS)

FloatArray = np.ndarray[Any, np.dtype[np.float64]]
Density = Callable[[FloatArray, FloatArray], FloatArray]
MomentumMasses = list[tuple[float, float]]
ConfigDocument = dict[str, Any]


@dataclass(slots=True)
class PeakonConfig:
    q: FloatArray
    p: FloatArray

    def __post_init__(self) -> None:
        self.q = np.atleast_1d(np.asarray(self.q, dtype=float))
        self.p = np.atleast_1d(np.asarray(self.p, dtype=float))

    @property
    def n(self) -> int:
        return len(self.q)

    @classmethod
    def peakon(cls, c: float, z: float = 0.0) -> "PeakonConfig":
        """Single peakon of speed c centred at z."""
        return cls(np.array([z]), np.array([np.sqrt(c)]))

    @classmethod
    def train(cls, speeds: FloatArray, shifts: FloatArray) -> "PeakonConfig":
        """Sum of peakons of the given speeds centred at the given shifts."""
        return cls(
            np.asarray(shifts, dtype=float), np.sqrt(np.asarray(speeds, dtype=float)))


@dataclass(slots=True)
class WeightParams:
    slope: float = PSI_SLOPE
    K: float = 1.0
    centers: FloatArray = field(default_factory=lambda: np.array([]))


@dataclass(slots=True)
class GridField:
    x0: float
    dx: float
    u: FloatArray
    ux: FloatArray | None = None

    @property
    def N(self) -> int:
        return len(self.u)

    @property
    def x(self) -> FloatArray:
        return self.x0 + self.dx*np.arange(len(self.u))


@dataclass(slots=True)
class EnergyPair:
    E: float
    F: float


@dataclass(slots=True)
class OdeState:
    t: float
    cfg: PeakonConfig


@dataclass(slots=True)
class IntegratorSettings:
    rtol: float = INTEGRATOR_DEFAULTS["rtol"]
    atol: float = INTEGRATOR_DEFAULTS["atol"]
    max_step: float = INTEGRATOR_DEFAULTS["max_step"]
    collision_gap: float = INTEGRATOR_DEFAULTS["collision_gap"]
    sample_dt: float = INTEGRATOR_DEFAULTS["sample_dt"]


@dataclass(slots=True)
class Trajectory:
    samples: list[OdeState]
    diagnostics: list[EnergyPair]

    @property
    def times(self) -> FloatArray:
        return np.array([state.t for state in self.samples])

    @property
    def positions(self) -> FloatArray:
        return np.array([state.cfg.q for state in self.samples])

    @property
    def amplitudes(self) -> FloatArray:
        return np.array([state.cfg.p for state in self.samples])

    @property
    def energies(self) -> FloatArray:
        return np.array([pair.E for pair in self.diagnostics])

    @property
    def functionals(self) -> FloatArray:
        return np.array([pair.F for pair in self.diagnostics])


@dataclass(slots=True)
class SpeedSpectrum:
    lambdas: FloatArray
    residual: float
    imag_leak: float


@dataclass(slots=True)
class AsymptoticsReport:
    lambdas: FloatArray
    horizon: float
    forward_amplitude: FloatArray
    forward_speed: FloatArray
    backward_amplitude: FloatArray
    backward_speed: FloatArray

    @property
    def max_deviation(self) -> float:
        return float(max(
            np.max(self.forward_amplitude), np.max(self.forward_speed),
            np.max(self.backward_amplitude), np.max(self.backward_speed)))


@dataclass(slots=True)
class IdentityCheck:
    lhs: float
    rhs: float

    @property
    def gap(self) -> float:
        return abs(self.lhs - self.rhs)


@dataclass(slots=True)
class FBoundCheck:
    F: float
    bound: float
    slack: float


@dataclass(slots=True)
class EFDifferenceReport:
    hypothesis_norm: float
    e_difference: float
    e_bound: float
    f_difference: float
    f_bound: float

    @property
    def e_margin(self) -> float:
        return self.e_bound - self.e_difference

    @property
    def f_margin(self) -> float:
        return self.f_bound - self.f_difference

    @property
    def holds(self) -> bool:
        return self.e_margin >= 0 and self.f_margin >= 0


@dataclass(slots=True)
class MaxHeightReport:
    M: float
    deviation: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.deviation <= self.bound


@dataclass(slots=True)
class TrainIdentityReport:
    lhs: float
    rhs: float
    gap: float
    envelope: float


@dataclass(slots=True)
class LocalizedEnergySample:
    I: FloatArray
    E: FloatArray
    F: FloatArray


@dataclass(slots=True)
class LocalizedBoundReport:
    F: FloatArray
    bound: FloatArray
    envelope: float

    @property
    def margins(self) -> FloatArray:
        return self.bound - self.F

    @property
    def holds(self) -> bool:
        return bool(np.all(self.margins >= -self.envelope))


@dataclass(slots=True)
class ModulationTrack:
    times: FloatArray
    shifts: FloatArray
    positions: FloatArray
    heights: FloatArray
    per_bump_distance: FloatArray

    @property
    def modulation_offset(self) -> float:
        """Largest distance between a tracked maximum and its orthogonality shift."""
        return float(np.max(np.abs(self.positions - self.shifts)))

    @property
    def minimum_gap(self) -> float:
        if self.positions.shape[1] < 2:
            return float("inf")
        return float(np.min(np.diff(self.positions, axis=1)))


@dataclass(slots=True)
class LocalizedEnergyReport:
    times: FloatArray
    I: FloatArray
    Ei: FloatArray
    Fi: FloatArray
    monotonicity_excess: FloatArray
    envelope: float
    asserted: bool = True

    @property
    def max_excess(self) -> float:
        if self.monotonicity_excess.shape[1] < 2:
            return 0.0
        return float(np.max(self.monotonicity_excess[:, 1:]))

    @property
    def passed(self) -> bool:
        return self.max_excess <= self.envelope


@dataclass(slots=True)
class StabilityTrend:
    eps: float
    bound: float
    sup_distance: float
    train_distance: float | None = None
    height_deviation: float | None = None

    @property
    def holds(self) -> bool:
        return self.sup_distance <= self.bound


@dataclass(slots=True)
class PerturbationResult:
    config: PeakonConfig
    h1_deviation: float
    slope_l4_deviation: float

    @property
    def hypothesis_norm(self) -> float:
        return self.h1_deviation + self.slope_l4_deviation


@dataclass(slots=True)
class PdeSettings:
    half_width: float = PDE_DEFAULTS["half_width"]
    N: int = PDE_DEFAULTS["N"]
    cfl: float = PDE_DEFAULTS["cfl"]
    viscosity: float = PDE_DEFAULTS["viscosity"]
    frame_speed: float | None = PDE_DEFAULTS["frame_speed"]
    mollifier_n: int = PDE_DEFAULTS["mollifier_n"]
    snapshot_dt: float = PDE_DEFAULTS["snapshot_dt"]
    slope_ceiling: float = PDE_DEFAULTS["slope_ceiling"]
    boundary_margin: float = PDE_DEFAULTS["boundary_margin"]

    @property
    def dx(self) -> float:
        return 2*self.half_width/self.N

    def frame_speed_for(self, cfg: PeakonConfig) -> float:
        if self.frame_speed is None:
            return float(np.max(cfg.p**2, initial=0.0))
        return self.frame_speed


@dataclass(slots=True)
class PdeRun:
    times: FloatArray
    snapshots: list[GridField]
    diagnostics: list[EnergyPair]

    @property
    def energies(self) -> FloatArray:
        return np.array([pair.E for pair in self.diagnostics])

    @property
    def functionals(self) -> FloatArray:
        return np.array([pair.F for pair in self.diagnostics])


@dataclass(slots=True)
class SpectrumSettings:
    tol: float = SPECTRUM_DEFAULTS["tol"]
    horizon: float = SPECTRUM_DEFAULTS["horizon"]


@dataclass(slots=True)
class AuditSettings:
    cases: int = AUDIT_DEFAULTS["cases"]
    magnitude: float = AUDIT_DEFAULTS["magnitude"]
    n0: int = AUDIT_DEFAULTS["n0"]
    t_end: float = AUDIT_DEFAULTS["t_end"]
    drift_tolerance: float = AUDIT_DEFAULTS["drift_tolerance"]
    pde_drift_tolerance: float = AUDIT_DEFAULTS["pde_drift_tolerance"]
    asymptotic_tolerance: float = AUDIT_DEFAULTS["asymptotic_tolerance"]
    L: float | None = None
    K: float | None = None


@dataclass(slots=True)
class Scenario:
    kind: str
    initial: PeakonConfig | None
    output_prefix: Path
    seed: int = DEFAULT_SEED
    t_end: float | None = None
    integrator: IntegratorSettings = field(default_factory=IntegratorSettings)
    spectrum: SpectrumSettings = field(default_factory=SpectrumSettings)
    pde: PdeSettings = field(default_factory=PdeSettings)
    audit: AuditSettings = field(default_factory=AuditSettings)
    document: ConfigDocument = field(default_factory=dict)


@dataclass(slots=True)
class AuditResult:
    name: str
    passed: bool
    margin: float
    asserted: bool = True
    details: dict[str, Any] = field(default_factory=dict)


@dataclass(slots=True)
class RunReport:
    kind: str
    exit_code: int
    audits: list[AuditResult] = field(default_factory=list)
    payload: dict[str, Any] = field(default_factory=dict)
    error: str | None = None
