"""Conserved quantities, Sobolev norms and the localized smoothing functionals.

Spatial windows are sharp indicators integrated by the trapezoid rule over the
grid nodes they contain; time integrals use the trapezoid rule over snapshot
times. Time-integrated functionals are also exposed as running values so a
DiagnosticSeries row at t_i holds the functional over [0, t_i].
"""
import logging
import math
from typing import Callable, Dict, List, Sequence, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from app.exceptions import WindowError
from app.models.run_models import DiagnosticSeries, FunctionalSpec, Trajectory
from app.models.spectral_models import (
    DispersionMode,
    Grid,
    ModelParams,
    OperatorKind,
    SpectralField,
)
from app.spectral.operators import abs_power, bessel, fractional_A, inverse_transform

logger = logging.getLogger(__name__)

DIVERGENCE_FACTOR = 4.0


# ------------- Conserved quantities and norms -------------
def mass(field: SpectralField) -> float:
    return field.grid.length * float(np.sum(np.abs(field.coeffs) ** 2))


def _weighted_mass(field: SpectralField, weights: np.ndarray) -> float:
    return field.grid.length * float(np.sum(weights * np.abs(field.coeffs) ** 2))


def energy(field: SpectralField, params: ModelParams) -> float:
    grid = field.grid
    xi = grid.wavenumbers
    total = 0.5 * _weighted_mass(field, xi ** (2 * params.N))
    if params.gamma != 0.0:
        total -= 0.5 * params.gamma * _weighted_mass(field, abs_power(xi, params.nonlocal_exponent))
    for k, a_k in enumerate(params.a, start=1):
        total -= 0.5 * (-1) ** k * a_k * _weighted_mass(field, xi ** (2 * k))
    if not params.is_linear:
        u = inverse_transform(field)
        for k, b_k in enumerate(params.b, start=1):
            if b_k != 0.0:
                total -= b_k / ((k + 1) * (k + 2)) * float(np.sum(u ** (k + 2))) * grid.dx
    return total


def integral_I(field: SpectralField) -> float:
    return field.grid.length * field.coeffs[0].real


def sobolev_norm(field: SpectralField, s: float) -> float:
    return math.sqrt(_weighted_mass(field, (1.0 + field.grid.wavenumbers ** 2) ** s))


# ------------- Windows -------------
def window_integral(values: np.ndarray, grid: Grid, lo: float, hi: float) -> float:
    """Trapezoid over the nodes in [lo, hi]."""
    inside = (grid.nodes >= lo) & (grid.nodes <= hi)
    if np.count_nonzero(inside) < 2:
        return 0.0
    return float(trapezoid(values[inside], grid.nodes[inside]))


def _check_window(grid: Grid, lo: float, hi: float, label: str) -> None:
    half = 0.5 * grid.length
    if lo < -half or hi > half or lo > hi:
        raise WindowError(f"{label} window [{lo:.6g}, {hi:.6g}] leaves the domain [{-half:g}, {half:g})")


def _squares(traj: Trajectory, transform: Callable[[SpectralField], SpectralField]) -> List[np.ndarray]:
    return [inverse_transform(transform(snapshot)) ** 2 for snapshot in traj.snapshots]


def _time_prefix(values: Sequence[float], times: np.ndarray) -> np.ndarray:
    return cumulative_trapezoid(np.asarray(values, dtype=float), times, initial=0.0)


# ------------- Kato smoothing -------------
def kato_series(traj: Trajectory, r: float, R: float, kind: Union[OperatorKind, str] = OperatorKind.J) -> np.ndarray:
    if r < 0:
        raise ValueError(f"r must be nonnegative, got {r}")
    grid = traj.grid
    if not 0.0 < R < 0.5 * grid.length:
        raise WindowError(f"R must lie in (0, L/2) = (0, {0.5 * grid.length:g}), got {R}")
    local = [
        window_integral(square, grid, -R, R)
        for square in _squares(traj, lambda f: fractional_A(f, r, kind))
    ]
    return _time_prefix(local, traj.times)


def kato_functional(traj: Trajectory, r: float, R: float, kind: Union[OperatorKind, str] = OperatorKind.J) -> float:
    """int_0^T int_{-R}^{R} (A^r u)^2 dx dt."""
    return float(kato_series(traj, r, R, kind)[-1])


# ------------- Propagation of regularity -------------
def _moving_bounds(traj: Trajectory, x0: float, eps: float, v: float, side: str) -> List[tuple]:
    grid = traj.grid
    half = 0.5 * grid.length
    last = half - grid.dx
    bounds = []
    for t in traj.times:
        if side == "right":
            lo, hi = x0 + eps - v * t, last
        else:
            lo, hi = -half, x0 - eps - v * t
        _check_window(grid, lo, hi, f"{side} half-line")
        bounds.append((lo, hi))
    return bounds


def propagation_series(
    traj: Trajectory, r: float, x0: float, eps: float, v: float, side: str = "right"
) -> np.ndarray:
    if not (v > 0 and eps > 0):
        raise ValueError(f"v and eps must be positive, got v={v}, eps={eps}")
    if side not in ("right", "left"):
        raise ValueError(f"side must be 'right' or 'left', got {side!r}")
    bounds = _moving_bounds(traj, x0, eps, v, side)
    grid = traj.grid
    values = [
        window_integral(square, grid, lo, hi)
        for square, (lo, hi) in zip(_squares(traj, lambda f: bessel(f, r)), bounds)
    ]
    return np.maximum.accumulate(np.asarray(values))


def propagation_functional(
    traj: Trajectory, r: float, x0: float, eps: float, v: float, side: str = "right"
) -> float:
    """sup_t int_{x0+eps-vt}^{inf} (J^r u)^2 dx; side="left" integrates up to x0-eps-vt instead."""
    return float(propagation_series(traj, r, x0, eps, v, side)[-1])


def window_smoothing_series(
    traj: Trajectory, m: float, x0: float, eps: float, R: float, v: float
) -> np.ndarray:
    if not (v > 0 and eps > 0):
        raise ValueError(f"v and eps must be positive, got v={v}, eps={eps}")
    if not R > eps:
        raise ValueError(f"R must exceed eps, got R={R}, eps={eps}")
    grid = traj.grid
    order = m + traj.params.N
    values = []
    for t, square in zip(traj.times, _squares(traj, lambda f: bessel(f, order))):
        lo, hi = x0 + eps - v * t, x0 + R - v * t
        _check_window(grid, lo, hi, "smoothing")
        values.append(window_integral(square, grid, lo, hi))
    return _time_prefix(values, traj.times)


def window_smoothing_functional(traj: Trajectory, m: float, x0: float, eps: float, R: float, v: float) -> float:
    """int_0^T int_{x0+eps-vt}^{x0+R-vt} (J^{m+N} u)^2 dx dt."""
    return float(window_smoothing_series(traj, m, x0, eps, R, v)[-1])


# ------------- Decay -------------
def _decay_integral(field: SpectralField, r: float, s: float, delta: float) -> float:
    grid = field.grid
    power = math.floor(r - s) + 1 + delta
    x_minus = np.maximum(0.0, -grid.nodes)
    weight = (1.0 + x_minus ** 2) ** (-0.5 * power)
    return float(np.sum(weight * inverse_transform(bessel(field, r)) ** 2)) * grid.dx


def decay_weighted_functional(field: SpectralField, r: float, s: float, delta: float, t: float) -> float:
    """int <x_->^{-(floor(r-s)+1+delta)} (J^r u)^2 dx; the caller compares t times this with a constant."""
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if not r > s:
        raise ValueError(f"r must exceed s, got r={r}, s={s}")
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    return _decay_integral(field, r, s, delta)


# ------------- Refinement oracle -------------
def refinement_ratio(coarse: float, fine: float) -> float:
    if coarse == 0.0:
        return math.inf if fine != 0.0 else 1.0
    return fine / coarse


def diverges_under_refinement(values: Sequence[float], factor: float = DIVERGENCE_FACTOR) -> bool:
    """True when each of the last two doublings multiplies the value by at least `factor`."""
    if len(values) < 3:
        raise ValueError("Need values at three successive resolutions")
    a, b, c = values[-3:]
    return refinement_ratio(a, b) >= factor and refinement_ratio(b, c) >= factor


# ------------- Series assembly -------------
def _per_snapshot(traj: Trajectory, fn: Callable[[SpectralField], float]) -> np.ndarray:
    return np.array([fn(snapshot) for snapshot in traj.snapshots])


def _evaluate(traj: Trajectory, spec: FunctionalSpec) -> np.ndarray:
    p = spec.params
    kind = spec.kind
    if kind == "mass":
        return _per_snapshot(traj, mass)
    if kind == "energy":
        return _per_snapshot(traj, lambda f: energy(f, traj.params))
    if kind == "integral_I":
        return _per_snapshot(traj, integral_I)
    if kind == "sobolev_norm":
        return _per_snapshot(traj, lambda f: sobolev_norm(f, p["s"]))
    if kind == "kato":
        return kato_series(traj, p["r"], p["R"], p.get("kind", OperatorKind.J))
    if kind == "propagation":
        return propagation_series(traj, p["r"], p["x0"], p["eps"], p["v"], p.get("side", "right"))
    if kind == "window_smoothing":
        return window_smoothing_series(traj, p["m"], p["x0"], p["eps"], p["R"], p["v"])
    if kind == "decay_weighted":
        if not (p["delta"] > 0 and p["r"] > p["s"]):
            raise ValueError(f"decay_weighted needs delta > 0 and r > s, got {p}")
        return _per_snapshot(traj, lambda f: _decay_integral(f, p["r"], p["s"], p["delta"]))
    raise ValueError(f"Unknown functional {kind!r}")


def collect(traj: Trajectory, spec: Sequence[FunctionalSpec]) -> DiagnosticSeries:
    meta: Dict[str, object] = {
        "grid": {"length": traj.grid.length, "n": traj.grid.n},
        "params": model_params_dict(traj.params),
        "functionals": [{"kind": item.kind, **item.params} for item in spec],
    }
    if not spec:
        return DiagnosticSeries(traj.times.copy(), [], [], meta)

    columns = [item.column for item in spec]
    values = {}
    for item, column in zip(spec, columns):
        series = _evaluate(traj, item)
        if not np.isfinite(series).all():
            logger.error(f"Functional {column} produced non-finite values")
            raise ValueError(f"Functional {column} produced non-finite values")
        values[column] = series
    records = [{column: float(values[column][i]) for column in columns} for i in range(len(traj))]
    return DiagnosticSeries(traj.times.copy(), columns, records, meta)


def model_params_dict(params: ModelParams) -> Dict[str, object]:
    out: Dict[str, object] = {
        "N": params.N,
        "M": params.M,
        "gamma": params.gamma,
        "a": list(params.a),
        "b": list(params.b),
        "dispersion_mode": params.dispersion_mode.value,
    }
    if params.dispersion_mode is DispersionMode.FRACTIONAL:
        out["beta"] = params.beta
    return out
