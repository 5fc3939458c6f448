"""Time integration: dealiased nonlinearity, integrating-factor RK4 and Picard iteration.

Both integrators work with the linear flow S(t) = exp(i t omega(D)) exactly,
so only the nonlinear term

    N(u) = sum_k b_k u^k u_x

limits the time step.
"""
import logging
import math
from typing import Any, Dict, List, Optional

import numpy as np
from scipy import fft
from scipy.integrate import cumulative_trapezoid

from app.exceptions import BoundaryContaminationError, ConvergenceError, InstabilityError
from app.models.run_models import DealiasMode, EvolveConfig, Trajectory
from app.models.spectral_models import Grid, ModelParams, SpectralField
from app.spectral.operators import (
    alternating_sign,
    dispersion_symbol,
    inverse_transform,
    propagator_factor,
)
from config.config import BLOWUP_GROWTH_CAP, BOUNDARY_FRACTION, DT_GUARD

logger = logging.getLogger(__name__)


# ------------- Nonlinearity -------------
def padded_size(n: int, factor: float) -> int:
    size = int(math.ceil(n * factor))
    return size + size % 2


def two_thirds_mask(grid: Grid) -> np.ndarray:
    return np.abs(grid.modes) < grid.n / 3.0


def _polynomial(u: np.ndarray, b) -> np.ndarray:
    # sum_k b_k u^k by Horner
    acc = np.full_like(u, b[-1])
    for coefficient in reversed(b[:-1]):
        acc = acc * u + coefficient
    return acc * u


def _nonlinear_coeffs(coeffs: np.ndarray, grid: Grid, params: ModelParams, dealias: DealiasMode) -> np.ndarray:
    if params.is_linear:
        return np.zeros_like(coeffs)
    sign = alternating_sign(grid)
    ik = 1j * grid.wavenumbers
    coeffs = coeffs.copy()
    coeffs[grid.nyquist_index] = 0.0

    if dealias.kind == "two_thirds":
        keep = two_thirds_mask(grid)
        coeffs = np.where(keep, coeffs, 0.0)
        n = grid.n
        u = n * fft.ifft(coeffs * sign).real
        ux = n * fft.ifft(ik * coeffs * sign).real
        out = fft.fft(_polynomial(u, params.b) * ux) * (sign / n)
        out = np.where(keep, out, 0.0)
    else:
        n_pad = padded_size(grid.n, dealias.factor)
        slots = grid.modes % n_pad
        padded = np.zeros(n_pad, dtype=np.complex128)
        padded[slots] = coeffs * sign
        u = n_pad * fft.ifft(padded).real
        padded[slots] = ik * coeffs * sign
        ux = n_pad * fft.ifft(padded).real
        out = fft.fft(_polynomial(u, params.b) * ux)[slots] * (sign / n_pad)

    # N(u) is a perfect derivative
    out[0] = 0.0
    out[grid.nyquist_index] = 0.0
    return out


def nonlinearity(field: SpectralField, params: ModelParams, dealias: Optional[DealiasMode] = None) -> SpectralField:
    dealias = dealias or DealiasMode.two_thirds()
    return SpectralField(field.grid, _nonlinear_coeffs(field.coeffs, field.grid, params, dealias))


# ------------- Integrating-factor RK4 -------------
class IntegratingFactorStepper:
    """RK4 on v(t) = S(-t)u(t) with the propagator factors cached for one dt."""

    def __init__(self, grid: Grid, params: ModelParams, dt: float, dealias: DealiasMode):
        self.grid = grid
        self.params = params
        self.dt = dt
        self.dealias = dealias
        omega = dispersion_symbol(params, grid)
        self.full = propagator_factor(omega, dt)
        self.half = propagator_factor(omega, 0.5 * dt)

    def _rhs(self, coeffs: np.ndarray) -> np.ndarray:
        return -_nonlinear_coeffs(coeffs, self.grid, self.params, self.dealias)

    def step(self, coeffs: np.ndarray) -> np.ndarray:
        dt, E, E2 = self.dt, self.full, self.half
        if self.params.is_linear:
            out = E * coeffs
        else:
            k1 = self._rhs(coeffs)
            k2 = self._rhs(E2 * (coeffs + 0.5 * dt * k1))
            k3 = self._rhs(E2 * coeffs + 0.5 * dt * k2)
            k4 = self._rhs(E * coeffs + dt * E2 * k3)
            out = E * coeffs + (dt / 6.0) * (E * k1 + 2.0 * E2 * (k2 + k3) + k4)
        out[self.grid.nyquist_index] = 0.0
        return out


def step_ifrk4(
    field: SpectralField, dt: float, params: ModelParams, dealias: Optional[DealiasMode] = None
) -> SpectralField:
    stepper = IntegratingFactorStepper(field.grid, params, dt, dealias or DealiasMode.two_thirds())
    with np.errstate(over="ignore", invalid="ignore"):
        coeffs = stepper.step(field.coeffs)
    if not np.isfinite(coeffs).all():
        logger.error(f"Instability: non-finite coefficients after a step of size {dt:.6g}")
        raise InstabilityError(f"Non-finite coefficients after a step of size {dt}", time=dt)
    return SpectralField(field.grid, coeffs)


def suggest_dt(
    field: SpectralField, params: ModelParams, safety: float = 0.5, t_final: Optional[float] = None
) -> float:
    """safety / (max|u|^M * max|xi| * max|b_k| * M + DT_GUARD), never above t_final when given."""
    if not 0.0 < safety <= 1.0:
        raise ValueError(f"safety must be in (0, 1], got {safety}")
    if t_final is not None and not t_final > 0:
        raise ValueError(f"t_final must be positive, got {t_final}")
    cap = math.inf if t_final is None else t_final
    amplitude = float(np.abs(inverse_transform(field)).max())
    if amplitude == 0.0 or params.is_linear:
        dt = min(safety / DT_GUARD, cap)
        logger.warning(f"suggest_dt: no nonlinear time scale, returning dt={dt:.3e}")
        return dt
    rate = amplitude ** params.M * field.grid.max_wavenumber * max(abs(b) for b in params.b) * params.M
    return min(safety / (rate + DT_GUARD), cap)


# ------------- Run-time guards -------------
def _sobolev_sq(coeffs: np.ndarray, grid: Grid, s: float) -> float:
    weights = (1.0 + grid.wavenumbers ** 2) ** s
    return grid.length * float(np.sum(weights * np.abs(coeffs) ** 2))


def boundary_mass_fraction(field: SpectralField, fraction: float = BOUNDARY_FRACTION) -> float:
    """Share of the L2 mass sitting in the outer `fraction` of the domain."""
    grid = field.grid
    values = inverse_transform(field) ** 2
    total = float(values.sum())
    if total == 0.0:
        return 0.0
    outer = np.abs(grid.nodes) >= 0.5 * grid.length * (1.0 - fraction)
    return float(values[outer].sum()) / total


def _check_boundary(field: SpectralField, threshold: float, t: float, action: str = "error") -> float:
    """Outer mass share of `field`; above `threshold` it raises, or only reports when action is 'record'."""
    share = boundary_mass_fraction(field)
    if share > threshold and action == "error":
        logger.error(f"Boundary contamination at t={t:.6g}: outer mass share {share:.3e} > {threshold:.1e}")
        raise BoundaryContaminationError(
            f"Outer mass share {share:.3e} exceeds threshold {threshold:.1e} at t={t:.6g}", time=t
        )
    return share


class BoundaryRecord:
    """Outer mass shares seen by a run whose boundary action is 'record'."""

    def __init__(self, threshold: float):
        self.threshold = threshold
        self.initial: Optional[float] = None
        self.largest = 0.0
        self.exceeded_at: Optional[float] = None

    def add(self, share: float, t: float) -> None:
        if self.initial is None:
            self.initial = share
        self.largest = max(self.largest, share)
        if share > self.threshold and self.exceeded_at is None:
            self.exceeded_at = t
            logger.warning(
                f"Outer mass share {share:.3e} passed {self.threshold:.1e} at t={t:.6g}; "
                "recording and continuing"
            )

    def as_info(self) -> Dict[str, Any]:
        return {
            "boundary_mass_initial": self.initial,
            "boundary_mass_max": self.largest,
            "boundary_exceeded_at": self.exceeded_at,
        }


# ------------- Drivers -------------
def evolve(u0: SpectralField, config: EvolveConfig, params: ModelParams) -> Trajectory:
    grid = u0.grid
    n_steps = max(1, int(math.ceil(config.t_end / config.dt - 1e-9)))
    dt = config.t_end / n_steps
    stepper = IntegratingFactorStepper(grid, params, dt, config.dealias)
    reference = math.sqrt(_sobolev_sq(u0.coeffs, grid, params.N))
    logger.debug(f"evolve: {n_steps} steps of dt={dt:.6e} on n={grid.n}, L={grid.length:g}")

    boundary = BoundaryRecord(config.boundary_mass_threshold)
    boundary.add(_check_boundary(u0, config.boundary_mass_threshold, 0.0, config.boundary_action), 0.0)
    coeffs = u0.coeffs.copy()
    coeffs[grid.nyquist_index] = 0.0
    times: List[float] = [0.0]
    snapshots: List[SpectralField] = [SpectralField(grid, coeffs.copy())]

    for step in range(1, n_steps + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            coeffs = stepper.step(coeffs)
        t = step * dt
        if not np.isfinite(coeffs).all():
            logger.error(f"Instability at t={t:.6g}: non-finite coefficients")
            raise InstabilityError(f"Non-finite coefficients at t={t:.6g}", time=t)
        if step % config.output_every == 0 or step == n_steps:
            norm = math.sqrt(_sobolev_sq(coeffs, grid, params.N))
            if reference > 0.0 and norm > BLOWUP_GROWTH_CAP * reference:
                logger.error(f"Instability at t={t:.6g}: H^{params.N} norm grew by {norm / reference:.3e}")
                raise InstabilityError(
                    f"H^{params.N} norm grew beyond {BLOWUP_GROWTH_CAP:.0e} times its initial value at t={t:.6g}",
                    time=t,
                )
            snapshot = SpectralField(grid, coeffs.copy())
            boundary.add(_check_boundary(snapshot, config.boundary_mass_threshold, t, config.boundary_action), t)
            times.append(t)
            snapshots.append(snapshot)

    info: Dict[str, Any] = {"dt": dt, "steps": n_steps}
    if config.boundary_action == "record":
        info.update(boundary.as_info())
    return Trajectory(np.array(times), snapshots, params, info=info)


def picard_solve(
    u0: SpectralField,
    t_end: float,
    params: ModelParams,
    tol: float = 1e-8,
    max_iter: int = 50,
    quad_nodes: int = 101,
    dealias: Optional[DealiasMode] = None,
) -> Trajectory:
    """Fixed point of u(t) = S(t)[u0 - int_0^t S(-tau) N(u(tau)) dtau] on uniform time nodes."""
    if quad_nodes < 2:
        raise ValueError(f"quad_nodes must be >= 2, got {quad_nodes}")
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    dealias = dealias or DealiasMode.two_thirds()
    grid = u0.grid
    times = np.linspace(0.0, t_end, quad_nodes)
    omega = dispersion_symbol(params, grid)
    forward = np.array([propagator_factor(omega, t) for t in times])
    backward = np.conj(forward)
    start = u0.coeffs.copy()
    start[grid.nyquist_index] = 0.0

    current = forward * start
    distance = np.inf
    for iteration in range(1, max_iter + 1):
        integrand = np.array(
            [backward[i] * _nonlinear_coeffs(current[i], grid, params, dealias) for i in range(quad_nodes)]
        )
        accumulated = cumulative_trapezoid(integrand, times, axis=0, initial=0.0)
        updated = forward * (start - accumulated)
        updated[:, grid.nyquist_index] = 0.0
        if not np.isfinite(updated).all():
            raise ConvergenceError(
                f"Picard iterate became non-finite at iteration {iteration}", iterations=iteration, distance=np.inf
            )
        distance = float(np.sqrt(grid.length * np.sum(np.abs(updated - current) ** 2, axis=1)).max())
        current = updated
        logger.debug(f"picard iteration {iteration}: sup distance {distance:.3e}")
        if distance < tol:
            logger.info(f"Picard converged in {iteration} iterations (distance {distance:.3e})")
            snapshots = [SpectralField(grid, row.copy()) for row in current]
            return Trajectory(times, snapshots, params, info={"iterations": iteration, "distance": distance})

    logger.error(f"Picard failed to reach tol={tol:.1e} in {max_iter} iterations (distance {distance:.3e})")
    raise ConvergenceError(
        f"Picard iteration did not reach tol={tol:.1e} within {max_iter} iterations; last distance {distance:.3e}",
        iterations=max_iter,
        distance=distance,
    )

