# %% [markdown]
# # Checking the discrete variational structure
#
# Gradients against finite differences, the metric axioms of the dissipation
# distance, the weak form residual of each step, and a space-time refinement
# study.

# %%
import numpy as np

from vkplate import build_problem, preset_config, run_evolution
from vkplate.verification import (fd_gradient_check, metric_axioms_sample, refinement_study,
                                  weak_residual)

prob = build_problem(preset_config("benchmark1", nx=4, ny=4))
model = prob.model
rng = np.random.default_rng(1)
z, w = 0.3 * rng.standard_normal((2, model.dim))
print("energy gradient rel err:", fd_gradient_check(model, z))
print("D^2 gradient rel err:   ", fd_gradient_check(model, z, prev=w))
print(metric_axioms_sample(model, 100, seed=1))

# %%
trace = run_evolution(model, prob.x0, prob.evolution)
for prev, cur, rec in zip(trace.all_states, trace.states, trace.records):
    r = weak_residual(model.state(prev), model.state(cur), trace.tau, prob.params,
                      model.constraints)
    print(f"step {rec.n}: |residual|_inf = {r.norm_inf:.2e}  identity gap = {r.identity_gap:.1e}")

# %% [markdown]
# Doubling nx while halving tau: distances between consecutive levels at
# t = 1, 2, 4 should shrink.

# %%
rep = refinement_study("benchmark1", [(8, 1.0), (16, 0.5), (32, 0.25)], horizon=4.0)
for l, (nx, tau) in enumerate(rep.ladder[:-1]):
    print(f"{nx:2d}->{2 * nx:2d}:", np.round(rep.distances[l], 4))
print("energies:\n", np.round(rep.energies, 3))
