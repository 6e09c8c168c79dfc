import numpy as np
import pytest

from vkplate import DomainSpec, MaterialParams, PlateModel, build_constraints, build_uniform_mesh

BENCH_PARAMS = MaterialParams(lam=1e3, mu=1e3, c=3e3, f=-1e3)


@pytest.fixture
def square():
    return DomainSpec(-1.0, 1.0, -1.0, 1.0)


@pytest.fixture
def model4(square):
    mesh = build_uniform_mesh(square, 4, 4)
    return PlateModel(mesh, BENCH_PARAMS, build_constraints(mesh, "all_edges"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
