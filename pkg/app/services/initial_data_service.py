import logging
import math
from typing import Optional, Union

import numpy as np

from app.models.spectral_models import Grid, ModelParams, SpectralField
from app.schemas.experiment_schemas import GaussianSchema, RandomHsSchema, SolitonSchema, SplitSchema
from app.spectral.operators import derivative, inverse_transform, l2_norm, transform
from app.weights.weight_functions import build_plateau

logger = logging.getLogger(__name__)

SOLITON_RESIDUAL_RTOL = 1e-6
SOLITON_CHECK_MIN_N = 1024
LOCALIZE_TRANSITION = 1.0

Descriptor = Union[SolitonSchema, GaussianSchema, RandomHsSchema, SplitSchema]


class InitialDataService:
    def __init__(self, grid: Grid, params: Optional[ModelParams] = None, seed: int = 0):
        self.grid = grid
        self.params = params
        self.seed = seed

    def generate(self, descriptor: Descriptor) -> SpectralField:
        if isinstance(descriptor, SolitonSchema):
            return self.soliton(descriptor)
        if isinstance(descriptor, GaussianSchema):
            return self.gaussian(descriptor)
        if isinstance(descriptor, RandomHsSchema):
            return self.random_hs(descriptor)
        if isinstance(descriptor, SplitSchema):
            return self.split(descriptor)
        raise ValueError(f"Unknown initial data descriptor {type(descriptor).__name__}")

    # ------------- Soliton -------------
    def _soliton_b(self, descriptor: SolitonSchema) -> float:
        params = self.params
        if params is not None:
            if params.N != 1 or params.M != 1 or params.gamma != 0.0 or params.beta is not None:
                raise ValueError("soliton initial data needs the KdV model N=1, M=1, gamma=0")
            if descriptor.b is not None and descriptor.b != params.b[0]:
                raise ValueError(f"soliton b={descriptor.b} does not match model b_1={params.b[0]}")
            return params.b[0]
        if descriptor.b is None:
            raise ValueError("soliton needs b when no model is given")
        return descriptor.b

    def soliton(self, descriptor: SolitonSchema) -> SpectralField:
        """(3c/b) sech^2(sqrt(c)/2 (x - center)), the KdV traveling wave of speed c."""
        b = self._soliton_b(descriptor)
        if b == 0.0:
            raise ValueError("soliton needs a nonzero nonlinear coefficient b")
        speed = descriptor.speed
        kappa = 0.5 * math.sqrt(speed)
        x = self.grid.nodes
        field = transform((3.0 * speed / b) / np.cosh(kappa * (x - descriptor.center)) ** 2, self.grid)
        if self.grid.n >= SOLITON_CHECK_MIN_N:
            residual = soliton_residual(field, speed, b)
            if residual > SOLITON_RESIDUAL_RTOL:
                logger.error(f"Soliton residual {residual:.3e} above {SOLITON_RESIDUAL_RTOL:.0e}")
                raise ValueError(
                    f"Soliton does not satisfy the PDE on this grid (relative residual {residual:.3e}); "
                    "enlarge L or n"
                )
        return field

    # ------------- Smooth and rough data -------------
    def gaussian(self, descriptor: GaussianSchema) -> SpectralField:
        x = self.grid.nodes
        values = descriptor.amplitude * np.exp(-(((x - descriptor.center) / descriptor.width) ** 2))
        return transform(values, self.grid)

    def random_hs(self, descriptor: RandomHsSchema) -> SpectralField:
        """Coefficients <xi>^{-s-1/2-delta} with seeded uniform phases, mean zero.

        Phases are drawn mode by mode from |k| = 1 upwards, so refining the grid
        with the same seed keeps every coarse coefficient. With `localize` set the
        field is multiplied by a smooth cutoff equal to 1 on [-localize, localize]
        and 0 beyond localize + 1; the mean is then no longer zero.
        """
        grid = self.grid
        seed = self.seed if descriptor.seed is None else descriptor.seed
        rng = np.random.default_rng(seed)
        half = grid.n // 2
        phases = rng.uniform(0.0, 2.0 * np.pi, size=half - 1)
        positive = np.arange(1, half)
        xi = 2.0 * np.pi * positive / grid.length
        amplitude = descriptor.amplitude * (1.0 + xi ** 2) ** (-0.5 * (descriptor.s + 0.5 + descriptor.delta))
        coeffs = np.zeros(grid.n, dtype=np.complex128)
        coeffs[positive] = amplitude * np.exp(1j * phases)
        coeffs[grid.n - positive] = np.conj(coeffs[positive])
        field = SpectralField(grid, coeffs)
        if descriptor.localize is None:
            return field
        return self._localize(field, descriptor.localize)

    def _localize(self, field: SpectralField, half_width: float) -> SpectralField:
        grid = self.grid
        outer = half_width + LOCALIZE_TRANSITION
        if outer >= 0.5 * grid.length:
            raise ValueError(f"localize={half_width} leaves no room inside a domain of length {grid.length:g}")
        cutoff = build_plateau(-outer, -half_width, half_width, outer, "localize")
        return transform(inverse_transform(field) * cutoff.evaluate(grid.nodes), grid)

    def split(self, descriptor: SplitSchema) -> SpectralField:
        """Rough data left of x0 (smoothly cut off before x0) plus a smooth bump to its right."""
        grid = self.grid
        half = 0.5 * grid.length
        x0 = descriptor.x0
        if not (-0.8 * half < x0 - descriptor.transition and x0 < half):
            raise ValueError(f"x0={x0} leaves no room for rough data on the left of the domain")
        window = build_plateau(-0.9 * half, -0.8 * half, x0 - descriptor.transition, x0, "split-window")
        rough = inverse_transform(self.random_hs(descriptor.rough)) * window.evaluate(grid.nodes)
        smooth = inverse_transform(self.gaussian(descriptor.smooth_right))
        return transform(rough + smooth, grid)


def soliton_residual(field: SpectralField, speed: float, b: float) -> float:
    """|| -c u_x + u_xxx + b u u_x || / ||u||, zero for an exact traveling wave."""
    u = inverse_transform(field)
    ux = inverse_transform(derivative(field, 1))
    uxxx = inverse_transform(derivative(field, 3))
    residual = transform(-speed * ux + uxxx + b * u * ux, field.grid)
    return l2_norm(residual) / l2_norm(field)


def generate_initial_data(
    descriptor: Descriptor, grid: Grid, params: Optional[ModelParams] = None, seed: int = 0
) -> SpectralField:
    return InitialDataService(grid, params, seed).generate(descriptor)
