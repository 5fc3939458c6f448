import os

import pytest

from app.cli.commands import load_config
from app.services.experiment_service import config_hash
from app.services.preset_service import (
    REFINEMENT_SIZES,
    ROUGH_HALF_WIDTH,
    build_preset,
    gwp_threshold,
    list_presets,
    write_preset,
)
from config.config import BOUNDARY_MASS_THRESHOLD


@pytest.mark.parametrize("name", list_presets())
def test_every_preset_builds(name):
    configs = build_preset(name, seed=1)
    assert configs
    names = [config.name for config in configs]
    assert len(set(names)) == len(names)
    assert all(config.seed == 1 for config in configs)


def test_unknown_preset():
    with pytest.raises(ValueError):
        build_preset("navier-stokes")


def test_kdv_soliton_uses_b_six():
    (config,) = build_preset("kdv-soliton")
    assert config.model.b == [6.0]
    assert config.initial_data.type == "soliton" and config.initial_data.speed == 4.0


@pytest.mark.parametrize("name", ["benjamin-smoothing", "kawahara-smoothing", "propagation-split"])
def test_refinement_presets_double_the_grid(name):
    configs = build_preset(name)
    assert [config.grid.n for config in configs] == list(REFINEMENT_SIZES)
    assert len({config.initial_data.model_dump_json() for config in configs}) == 1


def test_gwp_threshold_covers_all_degrees():
    configs = gwp_threshold(0, N=2)
    assert [config.model.M for config in configs] == list(range(1, 10))
    assert all(config.model.b[-1] == 1.0 and sum(config.model.b) == 1.0 for config in configs)


def test_written_files_load_back(tmp_path):
    paths = write_preset("picard-crosscheck", str(tmp_path), seed=3)
    assert sorted(os.path.basename(path) for path in paths) == [
        "picard-crosscheck-ifrk4.json",
        "picard-crosscheck-picard.json",
    ]
    built = {config.name: config for config in build_preset("picard-crosscheck", seed=3)}
    for path in paths:
        loaded = load_config(path)
        assert config_hash(loaded) == config_hash(built[loaded.name])


@pytest.mark.parametrize("name", ["benjamin-smoothing", "kawahara-smoothing", "propagation-split"])
def test_rough_presets_record_with_the_default_threshold(name):
    for config in build_preset(name):
        assert config.evolve.boundary_action == "record"
        assert config.evolve.boundary_mass_threshold == BOUNDARY_MASS_THRESHOLD


@pytest.mark.parametrize("name", ["benjamin-smoothing", "kawahara-smoothing"])
def test_smoothing_data_is_localized(name):
    assert all(config.initial_data.localize == ROUGH_HALF_WIDTH for config in build_preset(name))


@pytest.mark.parametrize("name", list_presets())
def test_no_preset_turns_the_guard_off(name):
    assert all(config.evolve.boundary_mass_threshold <= 1e-6 for config in build_preset(name))
