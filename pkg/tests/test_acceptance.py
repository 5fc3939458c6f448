"""End-to-end runs of catalog presets; the refinement sweeps take minutes."""
import csv
import json
import os

import numpy as np
import pytest

from app.services.diagnostics_service import energy, integral_I, mass
from app.services.experiment_service import ExperimentService, config_hash
from app.services.preset_service import REFINEMENT_SIZES, ROUGH_S, build_preset
from app.services.sweep_service import REFINEMENT_FILE, SweepService
from app.spectral.operators import inverse_transform, l2_norm, transform
from config.config import BOUNDARY_MASS_THRESHOLD

pytestmark = pytest.mark.slow


def test_kdv_soliton_travels_and_conserves():
    (config,) = build_preset("kdv-soliton")
    trajectory = ExperimentService().simulate(config)
    params = config.model.to_params()
    first, last = trajectory.snapshots[0], trajectory.snapshots[-1]

    assert abs(mass(last) - mass(first)) < 1e-8 * mass(first)
    assert abs(energy(last, params) - energy(first, params)) < 1e-5 * abs(energy(first, params))
    assert abs(integral_I(last) - integral_I(first)) < 1e-13 * max(1.0, abs(integral_I(first)))

    grid = last.grid
    t_end = config.evolve.t_end
    exact = transform(2.0 / np.cosh(grid.nodes - 4.0 * t_end) ** 2, grid)
    assert l2_norm(last.with_coeffs(last.coeffs - exact.coeffs)) < 1e-4 * l2_norm(first)
    assert inverse_transform(last).max() == pytest.approx(2.0, rel=1e-4)


def test_preset_runs_are_reproducible(tmp_path):
    (config,) = build_preset("benjamin-fifth-order", seed=2)
    outputs = []
    for sub in ("a", "b"):
        result = ExperimentService(str(tmp_path / sub)).run_experiment(config)
        assert result.status == "ok"
        with open(os.path.join(result.run_dir, "diagnostics.csv"), "rb") as f:
            outputs.append(f.read())
    assert outputs[0] == outputs[1]


# ------------- Rough-data refinement sweeps -------------
ROUGH_PRESETS = ["benjamin-smoothing", "kawahara-smoothing", "propagation-split"]


@pytest.fixture(scope="module")
def rough_sweeps(tmp_path_factory):
    out = {}
    for name in ROUGH_PRESETS:
        directory = str(tmp_path_factory.mktemp(name))
        configs = build_preset(name, seed=0)
        rows = SweepService(directory, 1).sweep(configs)
        with open(os.path.join(directory, REFINEMENT_FILE), encoding="utf-8") as f:
            table = json.load(f)
        out[name] = (directory, configs, rows, table)
    return out


def _run_file(directory, config, filename):
    return os.path.join(directory, f"{config.name}-{config_hash(config)}", filename)


@pytest.mark.parametrize("name", ROUGH_PRESETS)
def test_rough_runs_finish_and_record_boundary_shares(rough_sweeps, name):
    directory, configs, rows, _ = rough_sweeps[name]
    assert [row["status"] for row in rows] == ["ok"] * len(REFINEMENT_SIZES)
    for config in configs:
        with open(_run_file(directory, config, "manifest.json"), encoding="utf-8") as f:
            boundary = json.load(f)["boundary"]
        assert boundary["action"] == "record"
        assert boundary["threshold"] == BOUNDARY_MASS_THRESHOLD
        assert boundary["mass_initial"] <= BOUNDARY_MASS_THRESHOLD
        assert boundary["mass_max"] >= boundary["mass_initial"]


@pytest.mark.parametrize("name", ROUGH_PRESETS)
def test_refinement_table_covers_every_functional(rough_sweeps, name):
    _, configs, _, table = rough_sweeps[name]
    (entry,) = table.values()
    assert entry["grid_n"] == list(REFINEMENT_SIZES)
    columns = {spec.column for spec in configs[0].functionals()}
    assert set(entry["ratios"]) == columns
    for ratios in entry["ratios"].values():
        assert len(ratios) == 2 and all(np.isfinite(ratio) and ratio > 0.0 for ratio in ratios)
    assert set(entry["diverges"]) == columns


@pytest.mark.parametrize("name", ["benjamin-smoothing", "kawahara-smoothing"])
def test_rough_data_norm_grows_under_refinement(rough_sweeps, name):
    _, _, _, table = rough_sweeps[name]
    (entry,) = table.values()
    column = f"sobolev_norm[s={ROUGH_S + 1.0:g}]"
    # H^{s+1} norm of H^{s+delta} data grows like 2^{1-delta} per doubling
    assert all(ratio > 1.2 for ratio in entry["ratios"][column])


def test_split_decay_functional_is_finite_along_the_run(rough_sweeps):
    directory, configs, _, _ = rough_sweeps["propagation-split"]
    decay_column = next(spec.column for spec in configs[0].functionals() if spec.kind == "decay_weighted")
    t_end = configs[0].evolve.t_end
    for config in configs:
        with open(_run_file(directory, config, "diagnostics.csv"), encoding="utf-8") as f:
            records = list(csv.DictReader(f))
        times = np.array([float(record["time"]) for record in records])
        for t in (t_end / 4, t_end / 2, t_end):
            record = records[int(np.argmin(np.abs(times - t)))]
            weighted = float(record["time"]) * float(record[decay_column])
            assert np.isfinite(weighted) and weighted > 0.0
