"""Numerical checks of the discrete variational structure.

* finite-difference gradient checks,
* sampled metric axioms for the dissipation distance,
* the discrete weak form assembled element by element and compared with the
  gradient of the incremental functional,
* a combined space-time refinement study.
"""

from dataclasses import dataclass, field

import numpy as np

from . import plate_model as pm
from .benchmarks import build_problem
from .config import RunConfig, load_config, replace
from .elements import bfs_eval, q1_eval, sampling
from .gradient_flow import interpolant, run_evolution


def fd_gradient_check(system, state, step_scale=1e-6, *, prev=None, n_sample=50, seed=0):
    """Worst relative error of the analytic gradient against central differences.

    Checks ``system.energy`` or, when ``prev`` is given, ``z -> D(prev, z)**2``.
    The error on a random sample of components is measured relative to the
    largest analytic component of that sample.
    """
    x = np.asarray(state, dtype=float)
    if prev is None:
        fun, grad = system.energy, system.energy_gradient(x)
    else:
        fun = lambda z: system.metric(prev, z) ** 2  # noqa: E731
        grad = system.metric_sq_gradient(prev, x)
    rng = np.random.default_rng(seed)
    idx = np.arange(len(x)) if len(x) <= n_sample else np.sort(
        rng.choice(len(x), n_sample, replace=False))
    fd = np.empty(len(idx))
    for k, i in enumerate(idx):
        h = step_scale * (1 + abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        fd[k] = (fun(xp) - fun(xm)) / (2 * h)
    scale = np.max(np.abs(grad[idx]), initial=0.0)
    err = np.max(np.abs(grad[idx] - fd), initial=0.0)
    if scale == 0:
        return 0.0 if err == 0 else float("inf")
    return float(err / scale)


@dataclass
class MetricAxiomsReport:
    n_triples: int
    max_self_distance: float
    max_asymmetry: float
    worst_triangle_slack: float
    n_violations: int

    @property
    def ok(self):
        return self.n_violations == 0 and self.max_self_distance == 0 and self.max_asymmetry == 0


def metric_axioms_sample(system, n_triples, seed=0, sampler=None, rel_tol=1e-12):
    """Sample identity, symmetry and triangle inequality on random triples.

    ``worst_triangle_slack`` is ``min (D12 + D23 - D13) / scale`` with
    ``scale = max(1, D12 + D23)``; a violation is a slack below ``-rel_tol``.
    """
    if n_triples < 1:
        raise ValueError("n_triples must be >= 1")
    rng = np.random.default_rng(seed)
    if sampler is None:
        sampler = lambda r: 0.3 * r.standard_normal(system.dim)  # noqa: E731
    self_d = asym = 0.0
    worst = np.inf
    bad = 0
    for _ in range(n_triples):
        z1, z2, z3 = sampler(rng), sampler(rng), sampler(rng)
        d12, d23, d13 = system.metric(z1, z2), system.metric(z2, z3), system.metric(z1, z3)
        self_d = max(self_d, system.metric(z1, z1), system.metric(z2, z2))
        asym = max(asym, abs(d12 - system.metric(z2, z1)))
        slack = (d12 + d23 - d13) / max(1.0, d12 + d23)
        worst = min(worst, slack)
        bad += slack < -rel_tol
    return MetricAxiomsReport(n_triples, self_d, asym, float(worst), int(bad))


@dataclass
class ResidualReport:
    residual_vector: np.ndarray
    norm_inf: float
    identity_gap: float
    grad_norm: float

    @property
    def identity_ok(self):
        return self.identity_gap <= 1e-10 * (1 + self.grad_norm)


def assemble_weak_residual(prev, cur, tau, params, rule="gauss2"):
    """Discrete weak form over all DOFs, assembled element by element.

    The viscous stresses use difference quotients of the membrane strain and
    of the Hessian between ``prev`` and ``cur``.
    """
    mesh = cur.mesh
    if prev.mesh is not mesh:
        raise pm.MeshMismatchError("states discretize different meshes")
    qrule, u_pts = sampling(rule)
    hx, hy = mesh.hx, mesh.hy
    w = qrule.weights * hx * hy
    dN = q1_eval(u_pts[:, 0], u_pts[:, 1]).grads / np.array([hx, hy])  # (q, a, j)
    bfs = bfs_eval(qrule.points[:, 0], qrule.points[:, 1], hx, hy)
    N, el = mesh.n_nodes, mesh.elements
    udofs = np.stack([2 * el, 2 * el + 1], axis=-1)  # (E, a, c)
    vdofs = (2 * N + 4 * el[:, :, None] + np.arange(4)).reshape(-1, 16)

    def strains(z):
        grad_u = np.einsum("eac,qaj->eqcj", z[udofs], dN)
        gv = np.einsum("ek,qkj->eqj", z[vdofs], bfs.grads)
        H = np.einsum("ek,qkij->eqij", z[vdofs], bfs.hessians)
        G0 = 0.5 * (grad_u + np.swapaxes(grad_u, -1, -2)) + 0.5 * gv[..., :, None] * gv[..., None, :]
        return G0, H, gv

    def elastic(G):
        tr = np.trace(G, axis1=-2, axis2=-1)
        return params.lam * tr[..., None, None] * np.eye(2) + 2 * params.mu * G

    zc, zp = cur.vector, prev.vector
    G0, H, gv = strains(zc)
    G0p, Hp, _ = strains(zp)
    visc = 4 * params.c / tau
    sigma = elastic(G0) + visc * (G0 - G0p)
    moment = (elastic(H) + visc * (H - Hp)) / 12.0

    # test functions phi_u = N_a e_c: grad = e_c (x) grad N_a
    r_u = np.einsum("q,eqcj,qaj->eac", w, sigma, dN)
    # test functions phi_v: sigma : sym(grad v (x) grad phi), moment : hess phi, f phi
    f = params.f
    load = (np.asarray(f(*_sample_coords(mesh, qrule).T)).reshape(mesh.n_elements, -1)
            if callable(f) else np.full((mesh.n_elements, len(w)), float(f)))
    r_v = (np.einsum("q,eqi,eqij,qkj->ek", w, gv, sigma, bfs.grads)
           + np.einsum("q,eqij,qkij->ek", w, moment, bfs.hessians)
           - np.einsum("q,eq,qk->ek", w, load, bfs.values))

    out = np.zeros(6 * N)
    np.add.at(out, udofs.ravel(), r_u.ravel())
    np.add.at(out, vdofs.ravel(), r_v.ravel())
    return out


def _sample_coords(mesh, qrule):
    origins = mesh.node_coords[mesh.elements[:, 0]]
    return (origins[:, None, :] + qrule.points[None] * np.array([mesh.hx, mesh.hy])).reshape(-1, 2)


def weak_residual(prev, cur, tau, params, constraints, rule="gauss2"):
    """Weak residual on free DOFs, compared with the gradient of Phi at ``cur``."""
    if constraints.n_dofs != 6 * cur.mesh.n_nodes:
        raise pm.MeshMismatchError("constraint set does not match the mesh")
    res = assemble_weak_residual(prev, cur, tau, params, rule)[constraints.free]
    grad = (pm.energy_gradient(cur, params, constraints, rule)
            + pm.dissipation_sq_gradient(prev, cur, params, constraints, rule) / (2 * tau))
    gap = float(np.max(np.abs(res - grad), initial=0.0))
    return ResidualReport(res, float(np.max(np.abs(res), initial=0.0)), gap,
                          float(np.linalg.norm(grad)))


@dataclass
class RefinementReport:
    ladder: list
    sample_times: list
    distances: np.ndarray  # (levels - 1, times)
    energies: np.ndarray  # (levels, times)
    traces: list = field(default_factory=list, repr=False)

    def rows(self):
        """Flat rows ``(level, nx, tau, t, phi, D_to_next)``."""
        out = []
        for l, (nx, tau) in enumerate(self.ladder):
            for k, t in enumerate(self.sample_times):
                d = self.distances[l, k] if l < len(self.distances) else float("nan")
                out.append((l, nx, tau, t, self.energies[l, k], d))
        return out


def level_distance(coarse, fine, params, rule="gauss2"):
    """Dissipation distance after prolonging ``coarse`` onto ``fine.mesh``."""
    return pm.dissipation(pm.prolong(coarse, fine.mesh), fine, params, rule)


def refinement_study(preset, ladder, horizon=None, sample_fractions=(0.25, 0.5, 1.0)):
    """Run ``preset`` on each ``(nx, tau)`` level and compare consecutive levels.

    ``preset`` is a preset name or a RunConfig. Each level uses ``nx = ny``
    and ``n_max = horizon / tau`` steps.
    """
    base = preset if isinstance(preset, RunConfig) else load_config(overrides={"preset": preset})
    ladder = [(int(nx), float(tau)) for nx, tau in ladder]
    if len(ladder) < 2:
        raise ValueError("refinement ladder needs at least two levels")
    for (n0, t0), (n1, t1) in zip(ladder, ladder[1:]):
        if n1 != 2 * n0 or not np.isclose(t1, t0 / 2):
            raise ValueError(f"ladder must double nx and halve tau, got {ladder}")
    if horizon is None:
        horizon = base.n_max * ladder[0][1]
    times = [frac * horizon for frac in sample_fractions]

    levels = []
    for nx, tau in ladder:
        n_max = int(round(horizon / tau))
        cfg = replace(base, nx=nx, ny=nx, tau=tau, n_max=n_max)
        prob = build_problem(cfg)
        trace = run_evolution(prob.model, prob.x0, prob.evolution)
        levels.append((prob, trace))

    energies = np.empty((len(ladder), len(times)))
    snapshots = []
    for l, (prob, trace) in enumerate(levels):
        states = [prob.model.state(interpolant(trace, t)) for t in times]
        energies[l] = [pm.energy(s, prob.params, prob.model.mode) for s in states]
        snapshots.append(states)
    distances = np.empty((len(ladder) - 1, len(times)))
    for l in range(len(ladder) - 1):
        fine = levels[l + 1][0]
        for k in range(len(times)):
            distances[l, k] = level_distance(snapshots[l][k], snapshots[l + 1][k],
                                             fine.params, fine.model.mode)
    return RefinementReport(ladder, times, distances, energies, [t for _, t in levels])
