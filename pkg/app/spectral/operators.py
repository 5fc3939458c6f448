"""Periodic grid, transforms and the Fourier multipliers used throughout the package.

Coefficients are plane-wave amplitudes: for nodes x_j = -L/2 + jL/n,

    u(x_j) = sum_k c_k exp(i xi_k x_j),    xi_k = 2 pi k / L,

stored in FFT order. Every multiplier zeroes the Nyquist coefficient, which
has no Hermitian partner for odd symbols.
"""
import logging
import math
from typing import Optional, Union

import numpy as np
from scipy import fft

from app.models.spectral_models import (
    Grid,
    ModelParams,
    MultiplierSymbol,
    OperatorKind,
    SpectralField,
)

logger = logging.getLogger(__name__)

MEAN_ZERO_RTOL = 1e-13
_I_POWERS = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)


def make_grid(length: float, n: int) -> Grid:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise ValueError(f"Node count must be an integer, got {n!r}")
    if not length > 0:
        raise ValueError(f"Grid length must be positive, got {length}")
    if n < 8 or n & (n - 1):
        raise ValueError(f"Node count must be a power of two >= 8, got {n}")
    n = int(n)
    length = float(length)
    modes = np.rint(fft.fftfreq(n, d=1.0 / n)).astype(np.int64)
    wavenumbers = 2.0 * np.pi * modes / length
    nodes = -0.5 * length + np.arange(n) * (length / n)
    return Grid(length, n, nodes, wavenumbers, modes)


def alternating_sign(grid: Grid) -> np.ndarray:
    # (-1)^k from the shift of the origin to -L/2
    return 1.0 - 2.0 * (grid.modes & 1)


def transform(samples: np.ndarray, grid: Grid) -> SpectralField:
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (grid.n,):
        raise ValueError(f"Expected {grid.n} samples, got shape {samples.shape}")
    coeffs = fft.fft(samples) * (alternating_sign(grid) / grid.n)
    return SpectralField(grid, coeffs)


def inverse_transform(field: SpectralField) -> np.ndarray:
    grid = field.grid
    return grid.n * fft.ifft(field.coeffs * alternating_sign(grid)).real


def l2_norm(field: SpectralField) -> float:
    return math.sqrt(field.grid.length * float(np.sum(np.abs(field.coeffs) ** 2)))


def multiply(f: SpectralField, g: SpectralField) -> SpectralField:
    """Pointwise product formed at the grid nodes, without dealiasing."""
    if not f.grid.matches(g.grid):
        raise ValueError("Cannot multiply fields on different grids")
    return transform(inverse_transform(f) * inverse_transform(g), f.grid)


# ------------- Symbols -------------
def abs_power(xi: np.ndarray, s: float) -> np.ndarray:
    """|xi|^s with 0^0 = 1 and the origin mapped to 0 for s != 0."""
    if s == 0:
        return np.ones_like(xi, dtype=float)
    out = np.zeros_like(xi, dtype=float)
    nonzero = xi != 0
    out[nonzero] = np.abs(xi[nonzero]) ** s
    return out


def signed_power(xi: np.ndarray, p: float) -> np.ndarray:
    # sgn(xi)|xi|^p is odd bit for bit on a symmetric lattice
    return np.sign(xi) * abs_power(xi, p)


def bessel_symbol(grid: Grid, s: float) -> MultiplierSymbol:
    values = (1.0 + grid.wavenumbers ** 2) ** (0.5 * s)
    return MultiplierSymbol(values.astype(np.complex128), order=float(s))


def riesz_symbol(grid: Grid, s: float) -> MultiplierSymbol:
    return MultiplierSymbol(abs_power(grid.wavenumbers, s).astype(np.complex128), order=float(s))


def hilbert_symbol(grid: Grid) -> MultiplierSymbol:
    return MultiplierSymbol(-1j * np.sign(grid.wavenumbers), order=0.0)


def derivative_symbol(grid: Grid, k: int) -> MultiplierSymbol:
    if k < 0:
        raise ValueError(f"Derivative order must be nonnegative, got {k}")
    values = _I_POWERS[k % 4] * grid.wavenumbers ** k
    return MultiplierSymbol(np.asarray(values, dtype=np.complex128), order=float(k))


def fractional_A_symbol(grid: Grid, r: float, kind: Union[OperatorKind, str]) -> MultiplierSymbol:
    if r < 0:
        raise ValueError(f"Operator order r must be nonnegative, got {r}")
    kind = OperatorKind(kind)
    if kind is OperatorKind.J:
        return bessel_symbol(grid, r)
    if kind is OperatorKind.ABS_D:
        return riesz_symbol(grid, r)
    whole = int(math.floor(r))
    frac = r - whole
    values = derivative_symbol(grid, whole).values * abs_power(grid.wavenumbers, frac)
    return MultiplierSymbol(values, order=float(r))


def dispersion_symbol(params: ModelParams, grid: Grid) -> MultiplierSymbol:
    """omega(xi) = -gamma xi|xi|^beta + xi^{2N+1} - sum_k (-1)^k a_k xi^{2k+1}, beta = 1 for Hilbert."""
    xi = grid.wavenumbers
    omega = signed_power(xi, 2 * params.N + 1)
    if params.gamma != 0.0:
        omega = omega - params.gamma * signed_power(xi, 1.0 + params.nonlocal_exponent)
    for k, a_k in enumerate(params.a, start=1):
        if a_k != 0.0:
            omega = omega - (-1) ** k * a_k * signed_power(xi, 2 * k + 1)
    return MultiplierSymbol(omega.astype(np.complex128), order=float(2 * params.N + 1))


def propagator_factor(omega: MultiplierSymbol, t: float) -> np.ndarray:
    return np.exp(1j * t * omega.values.real)


# ------------- Operators -------------
def apply_symbol(field: SpectralField, symbol: Union[MultiplierSymbol, np.ndarray]) -> SpectralField:
    values = symbol.values if isinstance(symbol, MultiplierSymbol) else symbol
    coeffs = field.coeffs * values
    coeffs[field.grid.nyquist_index] = 0.0
    return SpectralField(field.grid, coeffs)


def is_mean_zero(field: SpectralField) -> bool:
    scale = float(np.abs(field.coeffs).max())
    return scale == 0.0 or abs(field.coeffs[0]) <= MEAN_ZERO_RTOL * scale


def bessel(field: SpectralField, s: float) -> SpectralField:
    return apply_symbol(field, bessel_symbol(field.grid, s))


def riesz(field: SpectralField, s: float) -> SpectralField:
    if s < 0 and not is_mean_zero(field):
        raise ValueError(f"|D|^{s} needs a mean-zero field, mean coefficient is {field.coeffs[0]:.3e}")
    return apply_symbol(field, riesz_symbol(field.grid, s))


def hilbert(field: SpectralField) -> SpectralField:
    return apply_symbol(field, hilbert_symbol(field.grid))


def derivative(field: SpectralField, k: int = 1) -> SpectralField:
    return apply_symbol(field, derivative_symbol(field.grid, k))


def fractional_A(field: SpectralField, r: float, kind: Union[OperatorKind, str]) -> SpectralField:
    return apply_symbol(field, fractional_A_symbol(field.grid, r, kind))


def linear_propagator(
    field: SpectralField,
    t: float,
    params: ModelParams,
    omega: Optional[MultiplierSymbol] = None,
) -> SpectralField:
    """S(t) = exp(i t omega(D)); pass a precomputed omega to skip rebuilding the symbol."""
    if omega is None:
        omega = dispersion_symbol(params, field.grid)
    return apply_symbol(field, propagator_factor(omega, t))
