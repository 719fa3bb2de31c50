import logging
import time
from collections.abc import Callable

import numpy as np

from agents.modulation import ModulationKernel, modulation_kernel, modulation_solve
from agents.peakon_field import (
    energy_E, functional_F, hypothesis_norm, momentum_total_variation,
    reconstruct_from_momentum, y_plus_margin)
from agents.perturbations import perturb
from agents.stability import (
    ef_difference_bounds, f_upper_bound_check, localized_energies, localized_f_bound,
    max_height_bound, single_peakon_identity, train_identity)
from globals.constants import (
    AUDIT_DEFAULTS, IDENTITY_TOLERANCE, INEQUALITY_TOLERANCE, LOGGER_NAME,
    Y_PLUS_TOLERANCE)
from globals.types import AuditResult, FloatArray, PeakonConfig

logger = logging.getLogger(LOGGER_NAME)

REFERENCE_SPEEDS = (0.25, 1.0, 4.0)
TRAIN_SEPARATIONS = (10.0, 20.0, 40.0, 200.0)
KERNEL_OFFSETS = (0.0, 0.25, 0.5)


class LemmaAuditSuite:
    """
    Randomized checks of the identities and inequalities behind the stability estimates,
    each one summarised as an AuditResult whose margin is nonnegative when it passes.
    """

    rng: np.random.Generator
    cases: int

    def __init__(
            self,
            seed: int,
            cases: int = AUDIT_DEFAULTS["cases"],
            magnitude: float = AUDIT_DEFAULTS["magnitude"],
            n0: int = AUDIT_DEFAULTS["n0"]) -> None:
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.cases = cases
        self.magnitude = magnitude
        self.n0 = n0

    def _random_config(self, positive: bool = True, max_size: int = 5) -> PeakonConfig:
        n = int(self.rng.integers(1, max_size + 1))
        q = np.cumsum(self.rng.uniform(0.2, 4.0, n)) - 5.0
        if positive:
            p = self.rng.uniform(0.2, 2.0, n)
        else:
            p = self.rng.uniform(-2.0, 2.0, n)
        return PeakonConfig(q, p)

    def _random_train(self, separation: float) -> tuple[FloatArray, FloatArray]:
        n = int(self.rng.integers(2, 4))
        speeds = np.sort(self.rng.uniform(0.5, 3.0, n))
        shifts = np.cumsum(separation*self.rng.uniform(0.6, 1.0, n))
        return speeds, shifts

    def _near_peakons(self) -> list[tuple[float, PeakonConfig]]:
        near = []
        for c in REFERENCE_SPEEDS:
            near.append((c, PeakonConfig.peakon(c*(1 + self.magnitude))))
            near.append((c, PeakonConfig.peakon(c, self.magnitude**2)))
            seed = int(self.rng.integers(2**31))
            near.append((c, perturb(PeakonConfig.peakon(c), self.magnitude, seed).config))
        return near

    def audit_single_peakon_identity(self) -> AuditResult:
        gaps = []
        for _ in range(self.cases):
            v = self._random_config(positive=False, max_size=3)
            check = single_peakon_identity(
                v, self.rng.uniform(0.25, 4.0), self.rng.uniform(-5.0, 5.0))
            gaps.append(check.gap)
        worst = max(gaps)
        return AuditResult(
            "single_peakon_identity", worst < IDENTITY_TOLERANCE,
            IDENTITY_TOLERANCE - worst,
            details={"cases": self.cases, "max_gap": worst})

    def audit_f_upper_bound(self) -> AuditResult:
        slacks = [
            f_upper_bound_check(self._random_config()).slack for _ in range(self.cases)]
        saturation = [
            abs(f_upper_bound_check(PeakonConfig.peakon(c)).slack)
            for c in REFERENCE_SPEEDS]
        worst = min(slacks)
        passed = worst >= -INEQUALITY_TOLERANCE and max(saturation) < INEQUALITY_TOLERANCE
        return AuditResult(
            "f_upper_bound", passed, worst + INEQUALITY_TOLERANCE,
            details={
                "cases": self.cases, "min_slack": worst, "peakon_slack": max(saturation)})

    def audit_ef_differences(self) -> AuditResult:
        margins = []
        for c, v in self._near_peakons():
            eps = 1.01*hypothesis_norm(v, PeakonConfig.peakon(c)) + np.finfo(float).tiny
            report = ef_difference_bounds(v, c, eps)
            margins.append(min(report.e_margin, report.f_margin))
        worst = min(margins)
        return AuditResult(
            "ef_differences", worst >= -INEQUALITY_TOLERANCE, worst,
            details={"cases": len(margins)})

    def audit_max_height(self) -> AuditResult:
        margins = []
        for c, v in self._near_peakons():
            eps = 1.01*hypothesis_norm(v, PeakonConfig.peakon(c)) + np.finfo(float).tiny
            report = max_height_bound(v, c, eps)
            margins.append(report.bound - report.deviation)
        worst = min(margins)
        return AuditResult(
            "max_height", worst >= -INEQUALITY_TOLERANCE, worst,
            details={"cases": len(margins)})

    def audit_train_identity(self) -> AuditResult:
        margins, details = [], {}
        for L in TRAIN_SEPARATIONS:
            speeds, shifts = self._random_train(L)
            v = self._random_config(positive=False)
            report = train_identity(v, speeds, shifts, L)
            margins.append(report.envelope + IDENTITY_TOLERANCE - report.gap)
            details[f"gap_L{L:g}"] = report.gap
        worst = min(margins)
        return AuditResult("train_identity", worst >= 0, worst, details=details)

    def audit_localized_f_bound(self) -> AuditResult:
        L = 20.0
        K = max(1.0, np.sqrt(L)/8)
        margins = []
        for _ in range(max(1, self.cases//10)):
            speeds, shifts = self._random_train(2*L)
            v = perturb(
                PeakonConfig.train(speeds, shifts), self.magnitude,
                int(self.rng.integers(2**31))).config
            centers = np.concatenate([[-np.inf], 0.5*(shifts[1:] + shifts[:-1])])
            report = localized_f_bound(v, centers, K, L)
            margins.append(float(np.min(report.margins)) + report.envelope)
        worst = min(margins)
        return AuditResult(
            "localized_f_bound", worst >= 0, worst, details={"cases": len(margins), "L": L})

    def audit_partition_consistency(self) -> AuditResult:
        errors = []
        for _ in range(max(1, self.cases//10)):
            v = self._random_config()
            centers = np.sort(self.rng.uniform(-5.0, 10.0, int(self.rng.integers(1, 4))))
            sample = localized_energies(v, centers, float(self.rng.uniform(1.0, 3.0)))
            errors.append(abs(np.sum(sample.E) - energy_E(v))/energy_E(v))
            errors.append(abs(np.sum(sample.F) - functional_F(v))/abs(functional_F(v)))
        worst = max(errors)
        return AuditResult(
            "partition_consistency", worst < IDENTITY_TOLERANCE, IDENTITY_TOLERANCE - worst,
            details={"max_relative_error": worst})

    def audit_y_plus(self) -> AuditResult:
        margins, variations = [], []
        for _ in range(self.cases):
            n = int(self.rng.integers(1, 6))
            masses = list(zip(
                np.sort(self.rng.uniform(-10.0, 10.0, n)), self.rng.uniform(0.0, 2.0, n)))
            cfg = reconstruct_from_momentum(masses)
            samples = np.linspace(cfg.q.min() - 5, cfg.q.max() + 5, 2001)
            margins.append(y_plus_margin(cfg, samples))
            variations.append(momentum_total_variation(masses))
        worst = min(margins)
        return AuditResult(
            "y_plus", worst >= -Y_PLUS_TOLERANCE, worst + Y_PLUS_TOLERANCE,
            details={
                "cases": self.cases, "min_margin": worst,
                "max_total_variation": max(variations)})

    def audit_modulation_kernel(self) -> AuditResult:
        identity_gaps = [
            abs(np.subtract(*ModulationKernel.kernel_identity(y))) for y in KERNEL_OFFSETS]
        monotone = modulation_kernel(self.n0).is_monotone()
        recovery = []
        for _ in range(max(1, self.cases//10)):
            speeds, shifts = self._random_train(20.0)
            guess = shifts + self.rng.uniform(-0.1, 0.1, len(shifts))
            solved = modulation_solve(
                PeakonConfig.train(speeds, shifts), speeds, guess, self.n0)
            recovery.append(float(np.max(np.abs(solved - shifts))))
        worst = max(max(identity_gaps), max(recovery))
        return AuditResult(
            "modulation_kernel", monotone and worst < IDENTITY_TOLERANCE,
            IDENTITY_TOLERANCE - worst,
            details={
                "identity_gap": max(identity_gaps), "shift_error": max(recovery),
                "monotone": monotone, "n0": self.n0})

    def audits(self) -> list[Callable[[], AuditResult]]:
        return [
            self.audit_single_peakon_identity,
            self.audit_f_upper_bound,
            self.audit_ef_differences,
            self.audit_max_height,
            self.audit_train_identity,
            self.audit_localized_f_bound,
            self.audit_partition_consistency,
            self.audit_y_plus,
            self.audit_modulation_kernel,
        ]

    def run(self) -> list[AuditResult]:
        """
        Executes every audit of the suite in a fixed order, so that results only depend on
        the seed.

        Returns:
            list[AuditResult]: One result per audit.
        """
        results = []
        for audit in self.audits():
            start_time = time.perf_counter()
            results.append(audit())
            logger.debug(
                f"Audit '{results[-1].name}' finished in "
                f"{time.perf_counter() - start_time:.2f}s")
        return results
