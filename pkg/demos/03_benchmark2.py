# %% [markdown]
# # Benchmark II: partial clamping
#
# Only the edges ``x2 = -1`` and ``x2 = 1`` are clamped and the load points
# up (``f = 1e2``). The free edges at ``x1 = +-1`` lift the most.

# %%
import numpy as np

from vkplate import build_problem, preset_config, run_evolution

prob = build_problem(preset_config("benchmark2", nx=16, ny=16))
trace = run_evolution(prob.model, prob.x0, prob.evolution)

# %%
mesh = prob.mesh
v = np.array([prob.model.state(z).v[:, 0].reshape(mesh.ny + 1, mesh.nx + 1)
              for z in trace.states])
mid = mesh.ny // 2
for n, vn in enumerate(v, 1):
    print(f"t={n}: v(free edge midpoint)={vn[mid, 0]:.5f}  v(center)={vn[mid, mid]:.5f}")

# %%
try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    x1 = mesh.node_coords[: mesh.nx + 1, 0]
    for n in (1, 4, 8):
        plt.plot(x1, v[n - 1, mid], label=f"t={n}")
    plt.xlabel("x1")
    plt.ylabel("v(x1, 0)")
    plt.legend()
    plt.savefig("benchmark2_section.png", dpi=100)
