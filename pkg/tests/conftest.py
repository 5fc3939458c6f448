import numpy as np
import pytest

from app.models.spectral_models import ModelParams
from app.spectral.operators import make_grid


@pytest.fixture
def grid():
    return make_grid(2.0 * np.pi, 64)


@pytest.fixture
def wide_grid():
    return make_grid(40.0, 256)


@pytest.fixture
def kdv():
    return ModelParams(N=1, M=1, b=(1.0,))


@pytest.fixture
def benjamin():
    return ModelParams(N=1, M=1, gamma=1.0, b=(1.0,))


@pytest.fixture
def gaussian_config():
    def build(**overrides):
        payload = {
            "name": "small-gaussian",
            "model": {"N": 1, "M": 1, "gamma": 1.0, "b": [1.0]},
            "grid": {"length": 40.0, "n": 64},
            "evolve": {"t_end": 0.1, "dt": 0.05},
            "initial_data": {"type": "gaussian", "amplitude": 0.2, "width": 2.0},
            "diagnostics": [{"kind": "mass"}, {"kind": "energy"}],
        }
        payload.update(overrides)
        return payload

    return build
