import csv
import hashlib
import io
import json
import logging
import os
import platform
import tempfile
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import scipy

from app import __version__
from app.exceptions import (
    BoundaryContaminationError,
    ConvergenceError,
    InstabilityError,
    SimulationError,
)
from app.models.run_models import DiagnosticSeries, Trajectory
from app.schemas.experiment_schemas import ExperimentConfig, PicardSchema
from app.services.diagnostics_service import collect, model_params_dict
from app.services.evolution_service import evolve, picard_solve, suggest_dt
from app.services.initial_data_service import generate_initial_data
from app.services.opcheck_service import run_check_suite
from app.spectral.operators import inverse_transform, make_grid
from config.config import OUTPUT_DIR

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SIMULATION = 2
EXIT_CONFIG = 3

_STATUS = {
    InstabilityError: "instability",
    BoundaryContaminationError: "boundary_contamination",
    ConvergenceError: "no_convergence",
}


def format_float(value: float) -> str:
    return f"{value:.15e}"


def config_hash(config: ExperimentConfig) -> str:
    canonical = json.dumps(config.model_dump(mode="json", exclude={"output_dir"}), sort_keys=True)
    return hashlib.md5(canonical.encode("utf-8")).hexdigest()[:10]


def atomic_write(path: str, text: str) -> None:
    """Write to a temporary file in the target directory, then rename over `path`."""
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_path, path)
    except Exception:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def series_to_csv(series: DiagnosticSeries) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["time", *series.columns])
    for i, t in enumerate(series.times):
        row = [format_float(float(t))]
        if series.records:
            row.extend(format_float(series.records[i][column]) for column in series.columns)
        writer.writerow(row)
    return buffer.getvalue()


BOUNDARY_KEYS = ("boundary_mass_initial", "boundary_mass_max", "boundary_exceeded_at")


@dataclass
class RunResult:
    name: str
    config_hash: str
    status: str
    exit_code: int
    run_dir: str
    series: Optional[DiagnosticSeries] = None
    blowup_time: Optional[float] = None
    error: Optional[str] = None
    info: Dict[str, Any] = field(default_factory=dict)

    def final_values(self) -> Dict[str, float]:
        return self.series.final() if self.series is not None else {}


def boundary_summary(config: ExperimentConfig, result: RunResult) -> Dict[str, Any]:
    summary: Dict[str, Any] = {
        "threshold": config.evolve.boundary_mass_threshold,
        "action": config.evolve.boundary_action,
    }
    for key in BOUNDARY_KEYS:
        if key in result.info:
            summary[key.replace("boundary_", "")] = result.info[key]
    summary["contaminated"] = (
        result.status == "boundary_contamination" or result.info.get("boundary_exceeded_at") is not None
    )
    return summary


class ExperimentService:
    def __init__(self, output_dir: Optional[str] = None):
        self.output_dir = output_dir or OUTPUT_DIR

    def run_dir_for(self, config: ExperimentConfig) -> str:
        base = config.output_dir or self.output_dir
        return os.path.join(base, f"{config.name}-{config_hash(config)}")

    # ------------- Simulation -------------
    def simulate(self, config: ExperimentConfig) -> Trajectory:
        grid = make_grid(config.grid.length, config.grid.n)
        params = config.model.to_params()
        try:
            u0 = generate_initial_data(config.initial_data, grid, params, seed=config.seed)
        except ValueError as e:
            logger.error(f"Initial data for {config.name} rejected: {e}")
            raise
        integrator = config.evolve.integrator
        if isinstance(integrator, PicardSchema):
            return picard_solve(
                u0, config.evolve.t_end, params, tol=integrator.tol, max_iter=integrator.max_iter,
                quad_nodes=integrator.quad_nodes, dealias=config.evolve.dealias_mode(),
            )
        dt = config.evolve.dt
        if dt is None:
            dt = suggest_dt(u0, params, config.evolve.dt_safety, t_final=config.evolve.t_end)
            logger.info(f"Using suggested dt={dt:.6e}")
        return evolve(u0, config.evolve.to_config(dt), params)

    def run_experiment(self, config: ExperimentConfig) -> RunResult:
        digest = config_hash(config)
        run_dir = self.run_dir_for(config)
        logger.info(f"Running {config.name} ({digest}) into {run_dir}")
        try:
            trajectory = self.simulate(config)
        except SimulationError as e:
            status = _STATUS.get(type(e), "simulation_error")
            logger.error(f"Run {config.name} failed: {e}")
            result = RunResult(
                config.name, digest, status, EXIT_SIMULATION, run_dir,
                blowup_time=e.time if isinstance(e, InstabilityError) else None, error=str(e),
            )
            self.write_manifest(config, result)
            return result

        try:
            series = collect(trajectory, config.functionals())
        except ValueError as e:
            logger.error(f"Diagnostics for {config.name} failed: {e}")
            raise
        result = RunResult(config.name, digest, "ok", EXIT_OK, run_dir, series=series, info=dict(trajectory.info))
        if result.info.get("boundary_exceeded_at") is not None:
            logger.warning(
                f"Run {config.name}: outer mass share reached {result.info['boundary_mass_max']:.3e}, "
                f"first above threshold at t={result.info['boundary_exceeded_at']:.6g}"
            )
        try:
            self.write_series(result)
            self.write_snapshots(config, trajectory, result)
            if config.opcheck:
                self.write_opcheck(config, result)
            self.write_manifest(config, result)
        except OSError as e:
            logger.error(f"Writing outputs of {config.name} to {run_dir} failed: {e}")
            raise
        logger.info(f"Finished {config.name} ({digest})")
        return result

    # ------------- Output -------------
    def write_series(self, result: RunResult) -> None:
        atomic_write(os.path.join(result.run_dir, "diagnostics.csv"), series_to_csv(result.series))

    def write_snapshots(self, config: ExperimentConfig, trajectory: Trajectory, result: RunResult) -> None:
        wanted = config.snapshot_times if config.snapshot_times is not None else [0.0, trajectory.t_end]
        x = trajectory.grid.nodes
        written = set()
        for t in wanted:
            index = int(np.argmin(np.abs(trajectory.times - t)))
            if index in written:
                continue
            written.add(index)
            values = inverse_transform(trajectory.snapshots[index])
            lines = [f"# t={format_float(float(trajectory.times[index]))}", "# x u"]
            lines.extend(f"{format_float(xi)} {format_float(ui)}" for xi, ui in zip(x, values))
            name = f"snapshot_{index:06d}.txt"
            atomic_write(os.path.join(result.run_dir, "snapshots", name), "\n".join(lines) + "\n")
        result.info["snapshots"] = sorted(written)

    def write_opcheck(self, config: ExperimentConfig, result: RunResult) -> List[Dict[str, Any]]:
        reports: List[Dict[str, Any]] = []
        for name, report in run_check_suite(config.seed):
            reports.append({"name": name, **report.as_dict()})
        atomic_write(os.path.join(result.run_dir, "opcheck.json"), json.dumps(reports, indent=2) + "\n")
        return reports

    def write_manifest(self, config: ExperimentConfig, result: RunResult) -> Dict[str, Any]:
        manifest = {
            "name": config.name,
            "config_hash": result.config_hash,
            "status": result.status,
            "exit_code": result.exit_code,
            "blowup_time": result.blowup_time,
            "error": result.error,
            "grid": {"length": config.grid.length, "n": config.grid.n},
            "params": model_params_dict(config.model.to_params()),
            "seed": config.seed,
            "run": dict(result.info),
            "boundary": boundary_summary(config, result),
            "versions": {
                "package": __version__,
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            "config": config.model_dump(mode="json", exclude={"output_dir"}),
        }
        atomic_write(os.path.join(result.run_dir, "manifest.json"), json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return manifest


def run_experiment(config: ExperimentConfig, output_dir: Optional[str] = None) -> RunResult:
    return ExperimentService(output_dir).run_experiment(config)
