import numpy as np
import pytest

from xxz_correlators.bethe_solver import solve_ground_state
from xxz_correlators.models import ModelParams


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(7)


@pytest.fixture
def massless() -> ModelParams:
    return ModelParams(delta=0.5)


@pytest.fixture
def massive() -> ModelParams:
    return ModelParams(delta=2.0)


@pytest.fixture(params=[0.5, 2.0], ids=['massless', 'massive'])
def params(request) -> ModelParams:
    return ModelParams(delta=request.param)


@pytest.fixture
def chain_state():
    params = ModelParams(delta=0.5, M=6)
    return solve_ground_state(params)
