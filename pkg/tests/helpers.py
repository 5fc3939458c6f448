import numpy as np

from app.models.spectral_models import Grid, SpectralField


def random_field(grid: Grid, seed: int, decay: float = 2.0, mean_zero: bool = False) -> SpectralField:
    """Real field with coefficients ~ (1 + |k|)^-decay and an empty Nyquist slot."""
    rng = np.random.default_rng(seed)
    half = grid.n // 2
    positive = np.arange(1, half)
    values = (rng.normal(size=half - 1) + 1j * rng.normal(size=half - 1)) * (1.0 + positive) ** (-decay)
    coeffs = np.zeros(grid.n, dtype=np.complex128)
    coeffs[positive] = values
    coeffs[grid.n - positive] = np.conj(values)
    if not mean_zero:
        coeffs[0] = rng.normal()
    return SpectralField(grid, coeffs)
