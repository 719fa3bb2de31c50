import logging
import time
from collections.abc import Callable
from concurrent.futures import ProcessPoolExecutor
from typing import Any

import numpy as np

from agents.audits import LemmaAuditSuite
from agents.exporters import (
    CSVExporter, JSONReportExporter, NetCDFExporter, ParquetExporter)
from agents.modulation import monotonicity_audit, train_stability_audit
from agents.multipeakon_ode import conservation_report, integrate, minimum_separation
from agents.pde_solver import crest_position, energy_drift, pde_integrate
from agents.perturbations import perturb
from agents.spectral import lambda_spectrum, verify_asymptotics
from agents.stability import orbital_stability_audit
from agents.validators import PeakonValidator
from globals.constants import EXIT_CODES, LOGGER_NAME
from globals.errors import ConfigurationError, NumericFailureError
from globals.types import (
    AuditResult, OdeState, PeakonConfig, RunReport, Scenario, Trajectory)

logger = logging.getLogger(LOGGER_NAME)

Pipeline = Callable[[], tuple[list[AuditResult], dict[str, Any]]]


class ScenarioRunner:

    scenario: Scenario
    state: dict[str, int | float]

    def __init__(self, scenario: Scenario, parquet_required: bool = False) -> None:
        self.scenario = scenario
        self.parquet_required = parquet_required
        self.json_exporter = JSONReportExporter(scenario.output_prefix)
        self.state = {
            "total": 0,
            "processed": 0,
            "passed": 0,
            "failed": 0,
            "reported": 0,
            "pass_rate": 0,
        }

    def _count_audit(self, audit: AuditResult) -> None:
        """
        Updates the internal state of the class with one audit result and logs it.

        Args:
            audit (AuditResult): Result to be registered.
        """
        self.state["processed"] += 1
        counter = f"[{self.state['processed']}/{self.state['total']}]"
        if not audit.asserted:
            self.state["reported"] += 1
            logger.info(
                f"{counter} Audit '{audit.name}' reported, margin {audit.margin:.3g} "
                f"(not asserted)")
        elif audit.passed:
            self.state["passed"] += 1
            logger.info(f"{counter} Audit '{audit.name}' passed, margin {audit.margin:.3g}")
        else:
            self.state["failed"] += 1
            logger.error(
                f"{counter} Audit '{audit.name}' failed, margin {audit.margin:.3g}")

    def _set_final_state(self) -> None:
        """
        Updates the elements from internal state of the class that are derived from others
        and logs a summary, used at the end of a run.
        """
        asserted = self.state["passed"] + self.state["failed"]
        self.state["pass_rate"] = 100*self.state["passed"]/asserted if asserted else 100.0
        logger.info(
            f"Processed {self.state['processed']} audit(s): {self.state['passed']} passed, "
            f"{self.state['failed']} failed, {self.state['reported']} reported only. "
            f"Pass rate: {self.state['pass_rate']:.2f}%")

    def _integrate(self, initial: PeakonConfig, t_end: float) -> Trajectory:
        """
        Integrates the multipeakon flow and exports the trajectory.

        Args:
            initial (PeakonConfig): Configuration at t = 0.
            t_end (float): Final time.

        Returns:
            Trajectory: Sampled trajectory.
        """
        traj = integrate(OdeState(0.0, initial), t_end, self.scenario.integrator)
        CSVExporter(self.scenario.output_prefix).generate_csv(traj)
        if self.parquet_required:
            ParquetExporter(self.scenario.output_prefix).generate_parquet(traj)
        return traj

    def _run_ode(self) -> tuple[list[AuditResult], dict[str, Any]]:
        initial = self.scenario.initial
        traj = self._integrate(initial, self.scenario.t_end)
        drift_e, drift_f = conservation_report(traj)
        tolerance = self.scenario.audit.drift_tolerance
        worst = max(drift_e, drift_f)
        audits = [AuditResult(
            "conservation", worst <= tolerance, tolerance - worst,
            details={"driftE": drift_e, "driftF": drift_f})]
        separation = minimum_separation(traj)
        final = traj.samples[-1].cfg
        if initial.n > 1 and PeakonValidator.is_ordered_positive(initial):
            ordered = bool(np.all(np.diff(final.p) > 0))
            audits.append(AuditResult(
                "reordering", ordered and separation > 0, separation, asserted=False,
                details={"final_amplitudes": final.p, "min_separation": separation}))
        payload = {
            "n": initial.n,
            "t_end": self.scenario.t_end,
            "samples": len(traj.samples),
            "final_q": final.q,
            "final_p": final.p,
            "min_separation": separation,
        }
        return audits, payload

    def _run_pde(self) -> tuple[list[AuditResult], dict[str, Any]]:
        initial = self.scenario.initial
        run = pde_integrate(initial, self.scenario.t_end, self.scenario.pde)
        NetCDFExporter(self.scenario.output_prefix).generate_netcdf(run)
        drift = energy_drift(run)
        tolerance = self.scenario.audit.pde_drift_tolerance
        crests = [crest_position(snapshot) for snapshot in run.snapshots]
        audits = [AuditResult(
            "conservation", drift <= tolerance, tolerance - drift,
            details={"driftE": drift})]
        if initial.n == 1 and initial.p[0] > 0:
            expected = initial.q[0] + initial.p[0]**2*self.scenario.t_end
            error = abs(crests[-1] - expected)
            allowed = 2*self.scenario.pde.dx
            audits.append(AuditResult(
                "crest_speed", error <= allowed, allowed - error,
                details={"expected": expected, "measured": crests[-1]}))
        payload = {
            "times": run.times,
            "crest_positions": crests,
            "E": run.energies,
            "F": run.functionals,
            "dx": self.scenario.pde.dx,
            "frame_speed": self.scenario.pde.frame_speed_for(initial),
        }
        return audits, payload

    def _run_spectrum(self) -> tuple[list[AuditResult], dict[str, Any]]:
        tolerance = self.scenario.spectrum.tol
        spectrum = lambda_spectrum(self.scenario.initial, tolerance)
        audits = [AuditResult(
            "spectrum_residual", spectrum.residual <= tolerance,
            tolerance - spectrum.residual, details={"imag_leak": spectrum.imag_leak})]
        payload = {
            "lambdas": spectrum.lambdas,
            "asymptotic_speeds": spectrum.lambdas**2,
            "residual": spectrum.residual,
        }
        return audits, payload

    def _run_asymptotics(self) -> tuple[list[AuditResult], dict[str, Any]]:
        report = verify_asymptotics(
            self.scenario.initial, self.scenario.spectrum.horizon,
            self.scenario.integrator, self.scenario.spectrum.tol)
        tolerance = self.scenario.audit.asymptotic_tolerance
        deviation = report.max_deviation
        audits = [AuditResult("asymptotics", deviation <= tolerance, tolerance - deviation)]
        payload = {
            "lambdas": report.lambdas,
            "horizon": report.horizon,
            "forward_amplitude_deviation": report.forward_amplitude,
            "forward_speed_deviation": report.forward_speed,
            "backward_amplitude_deviation": report.backward_amplitude,
            "backward_speed_deviation": report.backward_speed,
        }
        return audits, payload

    def _run_stability(self) -> tuple[list[AuditResult], dict[str, Any]]:
        initial = self.scenario.initial
        settings = self.scenario.audit
        perturbation = perturb(initial, settings.magnitude, self.scenario.seed)
        traj = self._integrate(perturbation.config, settings.t_end)
        payload: dict[str, Any] = {
            "hypothesis_norm": perturbation.hypothesis_norm,
            "h1_deviation": perturbation.h1_deviation,
            "slope_l4_deviation": perturbation.slope_l4_deviation,
        }
        if initial.n == 1:
            trend = orbital_stability_audit(initial.p[0]**2, perturbation, traj)
            payload.update(
                eps=trend.eps, bound=trend.bound, sup_distance=trend.sup_distance)
            margin = trend.bound - trend.sup_distance
            return [AuditResult("orbital_stability", trend.holds, margin)], payload

        speeds = initial.p**2
        L = settings.L if settings.L is not None else float(np.min(np.diff(initial.q)))
        track, trend = train_stability_audit(perturbation, traj, speeds, L, settings.n0)
        gap_margin = track.minimum_gap - L/2
        audits = [AuditResult(
            "train_stability", trend.holds and gap_margin > 0,
            min(gap_margin, trend.bound - trend.sup_distance),
            details={"min_gap": track.minimum_gap, "L": L})]
        try:
            report = monotonicity_audit(traj, speeds, L, settings.K, settings.n0)
            audits.append(AuditResult(
                "monotonicity", report.passed, report.envelope - report.max_excess,
                asserted=report.asserted,
                details={"envelope": report.envelope, "max_excess": report.max_excess}))
        except NumericFailureError as error:
            if np.all(np.diff(speeds) > 0):
                raise
            audits.append(AuditResult(
                "monotonicity", False, float("nan"), asserted=False,
                details={"error": str(error)}))
        payload.update(
            eps=trend.eps, bound=trend.bound, sup_distance=trend.sup_distance,
            modulation_offset=track.modulation_offset, min_gap=track.minimum_gap,
            train_distance=trend.train_distance, height_deviation=trend.height_deviation)
        return audits, payload

    def _run_lemma_audit(self) -> tuple[list[AuditResult], dict[str, Any]]:
        settings = self.scenario.audit
        suite = LemmaAuditSuite(
            self.scenario.seed, settings.cases, settings.magnitude, settings.n0)
        return suite.run(), {"cases": settings.cases, "seed": self.scenario.seed}

    def _pipelines(self) -> dict[str, Pipeline]:
        return {
            "ode-sim": self._run_ode,
            "pde-sim": self._run_pde,
            "spectrum": self._run_spectrum,
            "asymptotics": self._run_asymptotics,
            "stability-report": self._run_stability,
            "lemma-audit": self._run_lemma_audit,
        }

    def run(self) -> RunReport:
        """
        Executes the pipeline of the scenario kind, exporting the manifest, the report and,
        when the run stops early, an error record.

        Returns:
            RunReport: Audits, payload and exit status of the run.
        """
        start_time = time.perf_counter()
        kind = self.scenario.kind
        logger.info(f"Starting '{kind}' scenario with seed {self.scenario.seed}")
        self.json_exporter.generate_manifest(self.scenario)
        try:
            audits, payload = self._pipelines()[kind]()
        except ConfigurationError as error:
            logger.exception(f"Scenario '{kind}' rejected. Details:\n{error}")
            report = RunReport(kind, EXIT_CODES["config_error"], error=str(error))
            self.json_exporter.generate_error_record(kind, error, report.exit_code)
        except NumericFailureError as error:
            logger.exception(f"Scenario '{kind}' stopped by a numeric failure")
            report = RunReport(kind, EXIT_CODES["numeric_failure"], error=str(error))
            self.json_exporter.generate_error_record(kind, error, report.exit_code)
        else:
            self.state["total"] = len(audits)
            for audit in audits:
                self._count_audit(audit)
            self._set_final_state()
            exit_code = EXIT_CODES["pass"]
            if self.state["failed"]:
                exit_code = EXIT_CODES["audit_failure"]
            report = RunReport(kind, exit_code, audits, payload)
        self.json_exporter.generate_report(report)
        logger.info(f"Completed process in {time.perf_counter() - start_time:.2f}s")
        return report


def execute_scenario(scenario: Scenario, parquet_required: bool = False) -> int:
    """Runs one scenario and returns its exit status."""
    return ScenarioRunner(scenario, parquet_required).run().exit_code


def run_sweep(
        scenarios: list[Scenario],
        workers: int = 1,
        parquet_required: bool = False) -> int:
    """
    Runs independent scenarios, in worker processes when more than one worker is
    requested. Each scenario must write to its own output prefix.

    Args:
        scenarios (list[Scenario]): Scenarios to be run.
        workers (int, optional): Number of worker processes. Defaults to 1.
        parquet_required (bool, optional): Whether Parquet trajectories are exported.
            Defaults to False.

    Returns:
        int: Worst exit status among the scenarios.
    """
    if workers <= 1 or len(scenarios) <= 1:
        codes = [execute_scenario(scenario, parquet_required) for scenario in scenarios]
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            codes = list(executor.map(
                execute_scenario, scenarios, [parquet_required]*len(scenarios)))
    logger.info(f"Sweep of {len(scenarios)} scenario(s) finished with status {max(codes)}")
    return max(codes)
