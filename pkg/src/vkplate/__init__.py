"""Quasistatic viscoelastic von Karman plates by minimizing movements."""

from .benchmarks import Problem, build_problem
from .config import ConfigError, RunConfig, load_config, preset_config
from .elements import QuadratureKind, QuadratureMode, bfs_eval, q1_eval, quadrature
from .gradient_flow import (EvolutionConfig, EvolutionTrace, NumericalFailure,
                            QuadraticToySystem, StepRecord, energy_dissipation_report,
                            incremental_value, interpolant, minimize_step, run_evolution)
from .mesh import BoundarySelector, DomainSpec, MeshError, MeshGrid, boundary_nodes, build_uniform_mesh
from .plate_model import (ConstraintSet, MaterialParams, MeshMismatchError, PlateModel,
                          PlateState, StrainSample, build_constraints, dissipation,
                          dissipation_sq_gradient, dissipation_via_thickness, energy,
                          energy_gradient, energy_via_thickness, interpolate_initial,
                          prolong, qd2, qw2, strain_at)

__version__ = "0.1.0"
