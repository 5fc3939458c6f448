"""Catalog of ready-made experiment configs.

Each preset expands to one or more ExperimentConfig documents; sweeps over the
grid size use one config per n so the refinement ratio of every functional can
be read off the sweep summary.
"""
import json
import logging
import os
from typing import Any, Callable, Dict, List, Optional, Sequence

from app.schemas.experiment_schemas import ExperimentConfig
from app.services.experiment_service import atomic_write
from config.config import DEFAULT_SEED

logger = logging.getLogger(__name__)

REFINEMENT_SIZES = (512, 1024, 2048)
ROUGH_S = 1.6
SMOOTHING_R = 5.0
SMOOTHING_T = 0.5
# rough data sits on [-10, 10]; its high modes still reach the outer 10% before T,
# so these runs record the outer mass share instead of stopping
ROUGH_HALF_WIDTH = 10.0
ROUGH_EVOLVE = {"t_end": SMOOTHING_T, "boundary_action": "record"}

KDV = {"N": 1, "M": 1, "b": [1.0]}
BENJAMIN = {"N": 1, "M": 1, "gamma": 1.0, "b": [1.0]}
KAWAHARA = {"N": 2, "M": 1, "a": [1.0], "b": [1.0]}
BENJAMIN_FIFTH = {"N": 2, "M": 1, "gamma": 1.0, "a": [1.0], "b": [1.0]}
SEVENTH_KDV = {"N": 3, "M": 1, "a": [0.0, 0.0], "b": [1.0]}


def _config(payload: Dict[str, Any], seed: int) -> ExperimentConfig:
    return ExperimentConfig.model_validate({**payload, "seed": seed})


def _kato_block(s: float, offsets: Sequence[float]) -> List[Dict[str, Any]]:
    return [
        {"kind": "kato", "r": s + offset, "R": SMOOTHING_R, "operator": operator}
        for offset in offsets
        for operator in ("J", "absD", "mixed")
    ]


def _smoothing_sweep(name: str, model: Dict[str, Any], seed: int) -> List[ExperimentConfig]:
    s = ROUGH_S
    diagnostics = [
        {"kind": "mass"},
        *_kato_block(s, (0.0, 0.5, 1.0, 2.0)),
        {"kind": "sobolev_norm", "s": s + 1.0},
        {"kind": "sobolev_norm", "s": s + model["N"]},
    ]
    return [
        _config({
            "name": f"{name}-n{n}",
            "model": model,
            "grid": {"length": 40.0, "n": n},
            "evolve": ROUGH_EVOLVE,
            "initial_data": {"type": "random_hs", "s": s, "localize": ROUGH_HALF_WIDTH},
            "diagnostics": diagnostics,
        }, seed)
        for n in REFINEMENT_SIZES
    ]


# ============= CATALOG =============

def kdv_soliton(seed: int) -> List[ExperimentConfig]:
    return [_config({
        "name": "kdv-soliton",
        "model": {**KDV, "b": [6.0]},
        "grid": {"length": 40.0, "n": 1024},
        "evolve": {"t_end": 1.0},
        "initial_data": {"type": "soliton", "speed": 4.0},
        "diagnostics": [{"kind": "mass"}, {"kind": "energy"}, {"kind": "integral_I"}],
    }, seed)]


def benjamin_smoothing(seed: int) -> List[ExperimentConfig]:
    return _smoothing_sweep("benjamin-smoothing", BENJAMIN, seed)


def kawahara_smoothing(seed: int) -> List[ExperimentConfig]:
    return _smoothing_sweep("kawahara-smoothing", KAWAHARA, seed)


def _smooth_run(name: str, model: Dict[str, Any], seed: int) -> List[ExperimentConfig]:
    return [_config({
        "name": name,
        "model": model,
        "grid": {"length": 40.0, "n": 512},
        "evolve": {"t_end": 1.0},
        "initial_data": {"type": "gaussian", "amplitude": 0.5, "width": 1.5},
        "diagnostics": [
            {"kind": "mass"},
            {"kind": "energy"},
            {"kind": "kato", "r": float(model["N"]), "R": SMOOTHING_R, "operator": "J"},
        ],
    }, seed)]


def benjamin_fifth_order(seed: int) -> List[ExperimentConfig]:
    return _smooth_run("benjamin-fifth-order", BENJAMIN_FIFTH, seed)


def seventh_order_kdv(seed: int) -> List[ExperimentConfig]:
    return _smooth_run("seventh-order-kdv", SEVENTH_KDV, seed)


def propagation_split(seed: int) -> List[ExperimentConfig]:
    s = ROUGH_S
    m = s + 1.0
    window = {"x0": 0.0, "eps": 0.5, "v": 1.0}
    diagnostics = [
        {"kind": "propagation", "r": m, **window, "side": "right"},
        {"kind": "propagation", "r": m, **window, "side": "left"},
        {"kind": "window_smoothing", "m": m, **window, "R": SMOOTHING_R},
        {"kind": "decay_weighted", "r": m, "s": s, "delta": 0.5},
        {"kind": "sobolev_norm", "s": m},
    ]
    return [
        _config({
            "name": f"propagation-split-n{n}",
            "model": BENJAMIN,
            "grid": {"length": 40.0, "n": n},
            "evolve": ROUGH_EVOLVE,
            "initial_data": {
                "type": "split",
                "rough": {"type": "random_hs", "s": s},
                "smooth_right": {"type": "gaussian", "amplitude": 1.0, "width": 1.0, "center": 3.0},
                "x0": 0.0,
            },
            "diagnostics": diagnostics,
            "snapshot_times": [0.0, SMOOTHING_T / 4, SMOOTHING_T / 2, SMOOTHING_T],
        }, seed)
        for n in REFINEMENT_SIZES
    ]


def picard_crosscheck(seed: int) -> List[ExperimentConfig]:
    base = {
        "model": BENJAMIN,
        "grid": {"length": 40.0, "n": 256},
        "initial_data": {"type": "gaussian", "amplitude": 0.1, "width": 1.0},
        "diagnostics": [{"kind": "mass"}, {"kind": "energy"}],
    }
    return [
        _config({**base, "name": "picard-crosscheck-ifrk4", "evolve": {"t_end": 0.05, "dt": 1e-3}}, seed),
        _config({
            **base,
            "name": "picard-crosscheck-picard",
            "evolve": {"t_end": 0.05, "integrator": {"kind": "picard", "tol": 1e-8}},
        }, seed),
    ]


def gwp_threshold(seed: int, N: int = 1) -> List[ExperimentConfig]:
    """Nonlinearity degree M from 1 up to 4N+1 with large smooth data."""
    configs = []
    for M in range(1, 4 * N + 2):
        configs.append(_config({
            "name": f"gwp-threshold-M{M}",
            "model": {"N": N, "M": M, "a": [0.0] * (N - 1), "b": [0.0] * (M - 1) + [1.0]},
            "grid": {"length": 80.0, "n": 2048},
            "evolve": {"t_end": 0.5, "boundary_mass_threshold": 1e-6},
            "initial_data": {"type": "gaussian", "amplitude": 3.0, "width": 1.0},
            "diagnostics": [{"kind": "mass"}, {"kind": "sobolev_norm", "s": float(N)}],
        }, seed))
    return configs


PRESETS: Dict[str, Callable[[int], List[ExperimentConfig]]] = {
    "kdv-soliton": kdv_soliton,
    "benjamin-smoothing": benjamin_smoothing,
    "kawahara-smoothing": kawahara_smoothing,
    "benjamin-fifth-order": benjamin_fifth_order,
    "seventh-order-kdv": seventh_order_kdv,
    "propagation-split": propagation_split,
    "picard-crosscheck": picard_crosscheck,
    "gwp-threshold": gwp_threshold,
}


def list_presets() -> List[str]:
    return sorted(PRESETS)


def build_preset(name: str, seed: Optional[int] = None) -> List[ExperimentConfig]:
    if name not in PRESETS:
        raise ValueError(f"Unknown preset {name!r}; choose one of {', '.join(list_presets())}")
    return PRESETS[name](DEFAULT_SEED if seed is None else seed)


def write_preset(name: str, out: str, seed: Optional[int] = None) -> List[str]:
    """Write one JSON file per config of the preset into the directory `out`."""
    paths = []
    for config in build_preset(name, seed):
        path = os.path.join(out, f"{config.name}.json")
        payload = config.model_dump(mode="json", exclude_none=True)
        atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
        paths.append(path)
    logger.info(f"Wrote {len(paths)} config(s) for preset {name} to {out}")
    return paths
