import json
import logging
from datetime import datetime
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from netCDF4 import Dataset

from agents.multipeakon_ode import relative_drifts
from globals.constants import CSV_FLOAT_FORMAT, LOGGER_NAME, PARQUET_CONF
from globals.types import PdeRun, RunReport, Scenario, Trajectory

logger = logging.getLogger(LOGGER_NAME)

MANIFEST_SCHEMA_VERSION = 1
TRACKED_PACKAGES = ["numpy", "scipy", "pandas", "pyarrow", "netCDF4"]
REPORT_FIELDS = {
    "kind": "scenario kind",
    "exit_code": "0 pass, 1 audit failure, 2 configuration error, 3 numeric failure",
    "audits": "list of {name, passed, asserted, margin, details}",
    "payload": "kind-specific measurements",
    "error": "error message when the run stopped early, else null",
}


def trajectory_columns(n: int) -> list[str]:
    """CSV schema of a trajectory with n peakons."""
    return (
        ["t"] + [f"q{i}" for i in range(1, n + 1)] + [f"p{i}" for i in range(1, n + 1)]
        + ["E", "F", "driftE", "driftF"])


def trajectory_dataframe(traj: Trajectory) -> pd.DataFrame:
    """
    Flattens a trajectory into one row per sample.

    Args:
        traj (Trajectory): Sampled trajectory.

    Returns:
        pd.DataFrame: Columns t, q1..qn, p1..pn, E, F, driftE and driftF.
    """
    drift_e, drift_f = relative_drifts(traj)
    data = np.column_stack([
        traj.times, traj.positions, traj.amplitudes, traj.energies, traj.functionals,
        drift_e, drift_f
    ])
    return pd.DataFrame(data, columns=trajectory_columns(traj.positions.shape[1]))


def _to_builtin(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(key): _to_builtin(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_builtin(item) for item in value]
    if isinstance(value, np.ndarray):
        return _to_builtin(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if np.isfinite(value) else str(value)
    return value


class BaseScenarioExporter:

    output_prefix: Path

    def __init__(self, output_prefix: Path) -> None:
        self.output_prefix = output_prefix

    def _get_file_path(self, suffix: str) -> Path:
        """
        Builds the path of an output file from the scenario prefix.

        Args:
            suffix (str): File-specific part of the name, extension included.

        Returns:
            Path: Path to the output file.
        """
        return self.output_prefix.with_name(f"{self.output_prefix.name}-{suffix}")


class CSVExporter(BaseScenarioExporter):

    def generate_csv(self, traj: Trajectory) -> Path:
        """
        Exports a trajectory with full round-trip precision.

        Args:
            traj (Trajectory): Trajectory to be exported.

        Returns:
            Path: Path to the new CSV file.
        """
        output_path = self._get_file_path("trajectory.csv")
        trajectory_dataframe(traj).to_csv(
            output_path, sep=",", index=False, encoding="utf-8",
            float_format=CSV_FLOAT_FORMAT)
        logger.info(f"Successfully exported trajectory to '{output_path.resolve()}'")
        return output_path


class ParquetExporter(BaseScenarioExporter):

    def generate_parquet(self, traj: Trajectory) -> Path:
        """
        Exports a trajectory to a Parquet file.

        Note: Index columns are not written. Advanced Parquet configuration arguments are
        defined in `globals.constants.PARQUET_CONF`.

        Args:
            traj (Trajectory): Trajectory to be exported.

        Returns:
            Path: Path to the new Parquet file.
        """
        output_path = self._get_file_path("trajectory.parquet")
        trajectory_dataframe(traj).to_parquet(output_path, index=False, **PARQUET_CONF)
        logger.info(f"Successfully exported trajectory to '{output_path.resolve()}'")
        return output_path


class NetCDFExporter(BaseScenarioExporter):

    def generate_netcdf(self, run: PdeRun) -> Path:
        """
        Exports grid snapshots with dimensions (time, x), their E and F values and the
        origin x0 of each snapshot; node j of snapshot k sits at x[j] - x[0] + x0[k].

        Args:
            run (PdeRun): Grid run to be exported.

        Returns:
            Path: Path to the new NetCDF4 file.
        """
        output_path = self._get_file_path("snapshots.nc")
        grid = run.snapshots[0]
        with Dataset(output_path, "w", format="NETCDF4") as dataset:
            dataset.createDimension("time", len(run.times))
            dataset.createDimension("x", grid.N)
            x = dataset.createVariable("x", "f8", ("x",))
            x.units = "1"
            x[:] = grid.x
            t = dataset.createVariable("t", "f8", ("time",))
            t.units = "1"
            t[:] = run.times
            u = dataset.createVariable("u", "f8", ("time", "x"), zlib=True)
            u.units = "1"
            u[:] = np.array([snapshot.u for snapshot in run.snapshots])
            origins = [snapshot.x0 for snapshot in run.snapshots]
            for name, values in (
                    ("E", run.energies), ("F", run.functionals), ("x0", origins)):
                variable = dataset.createVariable(name, "f8", ("time",))
                variable.units = "1"
                variable[:] = values
        logger.info(f"Successfully exported snapshots to '{output_path.resolve()}'")
        return output_path


class JSONReportExporter(BaseScenarioExporter):

    def _write(self, content: dict[str, Any], suffix: str) -> Path:
        output_path = self._get_file_path(suffix)
        with open(output_path, "w", encoding="utf-8") as file:
            json.dump(
                _to_builtin(content), file, indent=2, ensure_ascii=False, sort_keys=True)
        logger.info(f"Successfully exported {suffix} to '{output_path.resolve()}'")
        return output_path

    def generate_report(self, report: RunReport) -> Path:
        """
        Exports the per-audit results and the kind-specific payload of a run.

        Args:
            report (RunReport): Report to be exported.

        Returns:
            Path: Path to the new JSON file.
        """
        return self._write({
            "kind": report.kind,
            "exit_code": report.exit_code,
            "audits": [
                {
                    "name": audit.name,
                    "passed": audit.passed,
                    "asserted": audit.asserted,
                    "margin": audit.margin,
                    "details": audit.details,
                }
                for audit in report.audits
            ],
            "payload": report.payload,
            "error": report.error,
        }, "report.json")

    def generate_manifest(self, scenario: Scenario) -> Path:
        """
        Exports the run manifest: configuration echo, package versions, seed, timestamp
        and the schemas of the other output files.

        Args:
            scenario (Scenario): Scenario being run.

        Returns:
            Path: Path to the new JSON file.
        """
        versions = {}
        for package in TRACKED_PACKAGES:
            try:
                versions[package] = version(package)
            except PackageNotFoundError:
                versions[package] = "unknown"
        n = scenario.initial.n if scenario.initial is not None else 0
        return self._write({
            "schema_version": MANIFEST_SCHEMA_VERSION,
            "kind": scenario.kind,
            "seed": scenario.seed,
            "timestamp": datetime.now().isoformat(timespec="seconds"),
            "config": scenario.document,
            "versions": versions,
            "schema": {
                "trajectory_csv": trajectory_columns(n),
                "snapshots_nc": {
                    "dimensions": ["time", "x"],
                    "variables": ["x", "t", "u", "E", "F"],
                },
                "report_json": REPORT_FIELDS,
            },
        }, "manifest.json")

    def generate_error_record(self, kind: str, error: Exception, exit_code: int) -> Path:
        """
        Exports a machine-readable record of the error that stopped a run.

        Args:
            kind (str): Scenario kind.
            error (Exception): Error raised by the run.
            exit_code (int): Exit status associated with the error.

        Returns:
            Path: Path to the new JSON file.
        """
        return self._write({
            "kind": kind,
            "error": type(error).__name__,
            "message": str(error),
            "exit_code": exit_code,
        }, "error.json")
