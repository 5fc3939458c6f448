from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np


def _freeze(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Grid:
    """Periodic grid on [-L/2, L/2) with wavenumbers stored in FFT order."""

    length: float
    n: int
    nodes: np.ndarray = field(repr=False)
    wavenumbers: np.ndarray = field(repr=False)
    modes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError(f"Grid length must be positive, got {self.length}")
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"Grid node count must be a power of two >= 8, got {self.n}")
        for array in (self.nodes, self.wavenumbers, self.modes):
            _freeze(array)

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def nyquist_index(self) -> int:
        return self.n // 2

    @property
    def max_wavenumber(self) -> float:
        return float(np.abs(self.wavenumbers).max())

    @property
    def partner_index(self) -> np.ndarray:
        # index of -xi for every xi
        return (-np.arange(self.n)) % self.n

    def matches(self, other: "Grid") -> bool:
        return self is other or (self.n == other.n and self.length == other.length)


@dataclass(eq=False)
class SpectralField:
    """A real function stored as plane-wave amplitudes: u(x) = sum_xi c(xi) e^{i xi x}."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.shape != (self.grid.n,):
            raise ValueError(
                f"Expected {self.grid.n} coefficients, got shape {self.coeffs.shape}"
            )

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy())

    def with_coeffs(self, coeffs: np.ndarray) -> "SpectralField":
        return SpectralField(self.grid, coeffs)

    @property
    def mean_coefficient(self) -> complex:
        return complex(self.coeffs[0])

    def hermitian_defect(self) -> float:
        scale = float(np.abs(self.coeffs).max())
        if scale == 0.0:
            return 0.0
        mirrored = np.conj(self.coeffs[self.grid.partner_index])
        return float(np.abs(self.coeffs - mirrored).max()) / scale

    def is_real(self, rtol: float = 1e-12) -> bool:
        return self.hermitian_defect() <= rtol

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.coeffs).all())


class DispersionMode(str, Enum):
    HILBERT = "hilbert"
    FRACTIONAL = "fractional"


@dataclass(frozen=True)
class ModelParams:
    """One member of the equation family

        u_t + gamma H u_xx + (-1)^{N+1} d_x^{2N+1} u + sum_k a_k d_x^{2k+1} u
            + sum_k b_k u^k u_x = 0

    with H u_xx replaced by d_x |D|^beta u in fractional mode.
    All-zero b describes the linear flow.
    """

    N: int
    M: int
    gamma: float = 0.0
    a: Tuple[float, ...] = ()
    b: Tuple[float, ...] = (1.0,)
    dispersion_mode: DispersionMode = DispersionMode.HILBERT
    beta: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        object.__setattr__(self, "dispersion_mode", DispersionMode(self.dispersion_mode))
        if self.N < 1 or self.M < 1:
            raise ValueError(f"N and M must be positive integers, got N={self.N}, M={self.M}")
        if len(self.a) != self.N - 1:
            raise ValueError(f"Expected {self.N - 1} coefficients a_k for N={self.N}, got {len(self.a)}")
        if len(self.b) != self.M:
            raise ValueError(f"Expected {self.M} coefficients b_k, got {len(self.b)}")
        if self.b[-1] == 0.0 and any(self.b):
            raise ValueError("b_M must be nonzero")
        if self.dispersion_mode is DispersionMode.FRACTIONAL:
            if self.beta is None or not 0.0 < self.beta < 2.0:
                raise ValueError(f"Fractional dispersion needs beta in (0, 2), got {self.beta}")
        elif self.beta is not None:
            raise ValueError("beta is only meaningful in fractional dispersion mode")

    @classmethod
    def linear(cls, N: int = 1, gamma: float = 0.0, a: Tuple[float, ...] = (), **kwargs) -> "ModelParams":
        return cls(N=N, M=1, gamma=gamma, a=a, b=(0.0,), **kwargs)

    @property
    def is_linear(self) -> bool:
        return not any(self.b)

    @property
    def nonlocal_exponent(self) -> float:
        if self.dispersion_mode is DispersionMode.FRACTIONAL:
            return float(self.beta)
        return 1.0


@dataclass(frozen=True, eq=False)
class MultiplierSymbol:
    values: np.ndarray = field(repr=False)
    order: float

    def __post_init__(self):
        _freeze(self.values)


class OperatorKind(str, Enum):
    """Which order-r operator the smoothing functionals measure."""

    J = "J"
    ABS_D = "absD"
    MIXED = "mixed"
