import numpy as np
import pytest

from vkplate.benchmarks import build_problem
from vkplate.config import preset_config
from vkplate.gradient_flow import (EvolutionConfig, NumericalFailure, QuadraticToySystem,
                                   energy_dissipation_report, incremental_value, interpolant,
                                   minimize_step, run_evolution)

B = np.array([1.0, 2.0])


def test_incremental_value_examples():
    sys = QuadraticToySystem(np.zeros(2))
    assert incremental_value(sys, 1.0, np.zeros(2), np.array([1.0, 0.0])) == 1.0
    z = np.array([0.3, -0.1])
    assert incremental_value(sys, 0.7, z, z) == sys.energy(z)
    vals = [incremental_value(sys, tau, np.zeros(2), z) for tau in (1, 10, 100, 1e6)]
    assert all(a > b for a, b in zip(vals, vals[1:])) and vals[-1] > sys.energy(z)


@pytest.mark.parametrize("bad", [dict(tau=0), dict(ls_shrink=1.0), dict(ls_slope=0.5),
                                 dict(memory=0), dict(n_max=-1)])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        EvolutionConfig(**bad)


def test_toy_step_halves_the_distance():
    sys = QuadraticToySystem(B)
    cfg = EvolutionConfig(tau=1.0)
    z, rec = minimize_step(sys, 1.0, np.zeros(2), cfg)
    assert np.allclose(z, B / 2, atol=10 * rec.tol, rtol=0)
    assert rec.converged and rec.descent_slack >= 0


def test_critical_point_is_returned_unchanged():
    sys = QuadraticToySystem(B)
    z, rec = minimize_step(sys, 1.0, B.copy(), EvolutionConfig())
    assert rec.iters == 0 and np.array_equal(z, B)


def test_toy_evolution_matches_implicit_euler():
    sys = QuadraticToySystem(B)
    for tau in (0.3, 1.0, 4.0):
        trace = run_evolution(sys, np.zeros(2), EvolutionConfig(tau=tau, n_max=6))
        z = np.zeros(2)
        for zn, rec in zip(trace.states, trace.records):
            z = (z + tau * B) / (1 + tau)
            assert np.linalg.norm(zn - z) <= 10 * rec.tol


def test_toy_report_slacks():
    sys = QuadraticToySystem(B)
    trace = run_evolution(sys, np.zeros(2), EvolutionConfig(tau=1.0, n_max=2, grad_tol=1e-12))
    rows = energy_dissipation_report(trace, 1.0)
    # |b|^2 = 5: slacks |b|^2/4 and |b|^2/16
    assert [r[0] for r in rows] == [1, 2]
    assert rows[0][3] == pytest.approx(1.25, rel=1e-9)
    assert rows[1][3] == pytest.approx(0.3125, rel=1e-9)


def test_constant_trace_report():
    sys = QuadraticToySystem(B)
    trace = run_evolution(sys, B.copy(), EvolutionConfig(n_max=3))
    for n, phi, d, slack in energy_dissipation_report(trace):
        assert d == 0 and slack == 0 and phi == 0


def test_empty_run_holds_initial_state():
    trace = run_evolution(QuadraticToySystem(B), np.zeros(2), EvolutionConfig(n_max=0))
    assert len(trace) == 0 and trace.states == []
    assert np.array_equal(interpolant(trace, 3.0), np.zeros(2))


def test_interpolant_is_right_continuous():
    trace = run_evolution(QuadraticToySystem(B), np.zeros(2), EvolutionConfig(tau=0.5, n_max=4))
    z0, z = trace.initial, trace.states
    assert interpolant(trace, 0.0) is z0
    assert interpolant(trace, 0.25) is z[0]
    assert interpolant(trace, 0.5) is z[0]
    assert interpolant(trace, 0.5 + 1e-9) is z[1]
    assert interpolant(trace, 1.5) is z[2]
    assert interpolant(trace, 10.0) is z[-1]
    with pytest.raises(ValueError):
        interpolant(trace, -0.1)


class _Exploding(QuadraticToySystem):
    def energy_gradient(self, z):
        return np.full_like(z, np.nan)


def test_non_finite_gradient_raises_with_step():
    with pytest.raises(NumericalFailure) as exc:
        run_evolution(_Exploding(B), np.zeros(2), EvolutionConfig(n_max=2))
    assert exc.value.step == 1


def test_iteration_cap_sets_warning_flag():
    # Rosenbrock-like valley with no preconditioner
    class Valley(QuadraticToySystem):
        def energy(self, z):
            return float(100 * (z[1] - z[0] ** 2) ** 2 + (1 - z[0]) ** 2)

        def energy_gradient(self, z):
            return np.array([-400 * z[0] * (z[1] - z[0] ** 2) - 2 * (1 - z[0]),
                             200 * (z[1] - z[0] ** 2)])
    sys = Valley(np.zeros(2))
    z, rec = minimize_step(sys, 100.0, np.array([-1.2, 1.0]), EvolutionConfig(max_iter=2))
    assert rec.iters == 2 and not rec.converged
    assert rec.incr_value <= sys.energy(np.array([-1.2, 1.0]))


@pytest.fixture(scope="module")
def bench1_short():
    prob = build_problem(preset_config("benchmark1", n_max=3))
    return prob, run_evolution(prob.model, prob.x0, prob.evolution)


def test_benchmark1_first_steps_descend(bench1_short):
    prob, trace = bench1_short
    phis = [trace.initial_energy] + [r.phi for r in trace.records]
    assert all(a > b for a, b in zip(phis, phis[1:]))
    for n, phi, d, slack in energy_dissipation_report(trace):
        assert slack >= -1e-9 * (1 + abs(phi)) and d > 0


def test_runs_are_deterministic(bench1_short):
    prob, trace = bench1_short
    again = run_evolution(prob.model, prob.x0, prob.evolution)
    assert all(np.array_equal(a, b) for a, b in zip(trace.states, again.states))
    assert trace.records == again.records
