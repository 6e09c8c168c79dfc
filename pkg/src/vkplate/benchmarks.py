"""Problem assembly for the two plate benchmarks and custom runs."""

from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .gradient_flow import EvolutionConfig
from .mesh import DomainSpec, MeshGrid, build_uniform_mesh
from .plate_model import (MaterialParams, PlateModel, PlateState, build_constraints,
                          interpolate_initial)


def bump(x1, x2):
    return (1 - x1**2) ** 2 * (1 - x2**2) ** 2


def bump_grad(x1, x2):
    return (-4 * x1 * (1 - x1**2) * (1 - x2**2) ** 2,
            -4 * x2 * (1 - x2**2) * (1 - x1**2) ** 2)


def bump_mixed(x1, x2):
    return 16 * x1 * x2 * (1 - x1**2) * (1 - x2**2)


@dataclass
class Problem:
    config: RunConfig
    mesh: MeshGrid
    params: MaterialParams
    model: PlateModel
    initial: PlateState

    @property
    def x0(self):
        return self.model.reduce(self.initial)

    @property
    def evolution(self):
        c = self.config
        return EvolutionConfig(tau=c.tau, n_max=c.n_max, grad_tol=c.grad_tol,
                               max_iter=c.max_iter, ls_shrink=c.ls_shrink,
                               ls_slope=c.ls_slope, memory=c.memory)


def build_problem(config):
    c = config
    mesh = build_uniform_mesh(DomainSpec(c.x1_min, c.x1_max, c.x2_min, c.x2_max), c.nx, c.ny)
    params = MaterialParams(c.lam, c.mu, c.c, c.f)
    constraints = build_constraints(mesh, c.boundary)
    model = PlateModel(mesh, params, constraints, c.quadrature)
    if c.initial == "bump":
        init = interpolate_initial(mesh, bump, bump_grad, bump_mixed)
    else:
        init = PlateState.zeros(mesh)
    # clamp the initial datum so it lies in the constrained space
    init = model.state(model.reduce(init))
    return Problem(c, mesh, params, model, init)
