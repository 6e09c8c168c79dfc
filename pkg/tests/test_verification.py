import numpy as np
import pytest

from vkplate import plate_model as pm
from vkplate.benchmarks import build_problem
from vkplate.config import preset_config
from vkplate.gradient_flow import QuadraticToySystem, run_evolution
from vkplate.mesh import DomainSpec, build_uniform_mesh
from vkplate.verification import (fd_gradient_check, level_distance, metric_axioms_sample,
                                  refinement_study, weak_residual)


def test_fd_check_on_quadratic_is_exact(rng):
    sys = QuadraticToySystem(rng.normal(size=80))
    # no truncation error for quadratics, so a large step only reduces roundoff
    assert fd_gradient_check(sys, rng.normal(size=80), step_scale=1e-2) <= 1e-10
    assert fd_gradient_check(sys, rng.normal(size=80), step_scale=1e-2,
                             prev=rng.normal(size=80)) <= 1e-10


def test_fd_check_plate(model4, rng):
    assert fd_gradient_check(model4, 0.3 * rng.standard_normal(model4.dim)) <= 1e-6


def test_fd_check_zero_state_unloaded(square):
    mesh = build_uniform_mesh(square, 4, 4)
    model = pm.PlateModel(mesh, pm.MaterialParams(1e3, 1e3, 3e3, 0.0),
                          pm.build_constraints(mesh, "all_edges"))
    assert fd_gradient_check(model, np.zeros(model.dim)) == 0.0


def test_fd_check_detects_wrong_gradient(rng):
    class Wrong(QuadraticToySystem):
        def energy_gradient(self, z):
            return 1.01 * super().energy_gradient(z)
    sys = Wrong(np.zeros(5))
    assert fd_gradient_check(sys, rng.normal(size=5)) > 1e-3


def test_metric_axioms(model4):
    rep = metric_axioms_sample(model4, 100, seed=7)
    assert rep.ok and rep.n_triples == 100
    assert rep.max_self_distance == 0 and rep.max_asymmetry == 0


def test_collinear_membrane_triple_is_tight(model4, rng):
    n_u = 2 * model4.mesh.n_nodes
    free = model4.constraints.free
    mask = free < n_u  # u DOFs only
    z, w = np.zeros(model4.dim), np.zeros(model4.dim)
    z[mask], w[mask] = rng.normal(size=(2, mask.sum()))
    m = model4.metric
    d13 = m(z, w)
    assert m(z, (z + w) / 2) + m((z + w) / 2, w) == pytest.approx(d13, rel=1e-12)


def test_metric_axioms_flag_a_non_metric():
    class Squared(QuadraticToySystem):
        def metric(self, a, b):
            return super().metric(a, b) ** 2
    rep = metric_axioms_sample(Squared(np.zeros(3)), 50, seed=1,
                               sampler=lambda r: 3 * r.standard_normal(3))
    assert rep.n_violations > 0


@pytest.fixture(scope="module")
def bench1():
    prob = build_problem(preset_config("benchmark1", n_max=2))
    return prob, run_evolution(prob.model, prob.x0, prob.evolution)


@pytest.mark.parametrize("mode", ["gauss2", "paper", "gauss3"])
def test_residual_identity_for_arbitrary_pairs(model4, rng, mode):
    model = pm.PlateModel(model4.mesh, model4.params, model4.constraints, mode)
    for _ in range(3):
        a = model.state(0.3 * rng.standard_normal(model.dim))
        b = model.state(0.3 * rng.standard_normal(model.dim))
        rep = weak_residual(a, b, 0.7, model.params, model.constraints, mode)
        assert rep.identity_ok


def test_residual_vanishes_at_accepted_steps(bench1):
    prob, trace = bench1
    m = prob.model
    for prev, cur, rec in zip(trace.all_states, trace.states, trace.records):
        rep = weak_residual(m.state(prev), m.state(cur), prob.config.tau, prob.params,
                            m.constraints)
        assert rep.identity_ok
        assert rep.norm_inf <= rec.tol


def test_residual_at_equilibrium_is_zero(square):
    mesh = build_uniform_mesh(square, 4, 4)
    p = pm.MaterialParams(1e3, 1e3, 3e3, 0.0)
    cs = pm.build_constraints(mesh, "all_edges")
    z = pm.PlateState.zeros(mesh)
    rep = weak_residual(z, z, 1.0, p, cs)
    assert rep.norm_inf == 0.0


def test_residual_mesh_checks(square):
    a = pm.PlateState.zeros(build_uniform_mesh(square, 2, 2))
    b = pm.PlateState.zeros(build_uniform_mesh(square, 2, 2))
    cs = pm.build_constraints(b.mesh, "all_edges")
    with pytest.raises(pm.MeshMismatchError):
        weak_residual(a, b, 1.0, pm.MaterialParams(1, 1, 1), cs)
    cs4 = pm.build_constraints(build_uniform_mesh(square, 4, 4), "all_edges")
    with pytest.raises(pm.MeshMismatchError):
        weak_residual(b, b, 1.0, pm.MaterialParams(1, 1, 1), cs4)


def test_level_compared_with_itself(bench1):
    prob, trace = bench1
    st = prob.model.state(trace.states[-1])
    assert level_distance(st, st, prob.params) == 0.0


def test_refinement_study_small():
    rep = refinement_study("benchmark1", [(4, 1.0), (8, 0.5)], horizon=2.0)
    assert rep.sample_times == [0.5, 1.0, 2.0]
    assert rep.distances.shape == (1, 3) and rep.energies.shape == (2, 3)
    assert np.all(rep.distances > 0)
    assert len(rep.rows()) == 6


def test_refinement_ladder_validation():
    with pytest.raises(ValueError):
        refinement_study("benchmark1", [(4, 1.0)])
    with pytest.raises(ValueError):
        refinement_study("benchmark1", [(4, 1.0), (6, 0.5)])
