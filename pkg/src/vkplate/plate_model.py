"""Von Karman viscoelastic plate on a Q1 x BFS finite element space.

DOF layout of a state vector ``z`` on a mesh with ``N`` nodes::

    z[2*n + c]           u_c at node n          (c = 0, 1)
    z[2*N + 4*n + k]     BFS DOF k of v at node n (v, v_1, v_2, v_12)

Every integral is a sum over elements and quadrature samples. The sampled
fields are linear in ``z``; they are produced by one sparse operator so that
energy, dissipation and their gradients share the same discretization.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .elements import QuadratureMode, bfs_eval, q1_eval, sampling
from .mesh import boundary_nodes


class MeshMismatchError(ValueError):
    """States discretize different meshes."""


@dataclass(frozen=True)
class MaterialParams:
    lam: float
    mu: float
    c: float
    f: float = 0.0

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if not self.mu > 0:
            raise ValueError(f"mu must be > 0, got {self.mu}")
        if not self.c > 0:
            raise ValueError(f"c must be > 0, got {self.c}")

    def unloaded(self):
        return MaterialParams(self.lam, self.mu, self.c, 0.0)


@dataclass(eq=False)
class PlateState:
    mesh: object
    u_dofs: np.ndarray
    v_dofs: np.ndarray

    def __post_init__(self):
        self.u_dofs = np.asarray(self.u_dofs, dtype=float)
        self.v_dofs = np.asarray(self.v_dofs, dtype=float)
        n = self.mesh.n_nodes
        if self.u_dofs.shape != (2 * n,) or self.v_dofs.shape != (4 * n,):
            raise ValueError("DOF vector lengths do not match the mesh")
        if not (np.all(np.isfinite(self.u_dofs)) and np.all(np.isfinite(self.v_dofs))):
            raise ValueError("state contains non-finite entries")

    @classmethod
    def zeros(cls, mesh):
        return cls(mesh, np.zeros(2 * mesh.n_nodes), np.zeros(4 * mesh.n_nodes))

    @classmethod
    def from_vector(cls, mesh, z):
        n = mesh.n_nodes
        z = np.asarray(z, dtype=float)
        return cls(mesh, z[: 2 * n].copy(), z[2 * n:].copy())

    @property
    def vector(self):
        return np.concatenate([self.u_dofs, self.v_dofs])

    @property
    def u(self):
        """Nodal displacement, shape (N, 2)."""
        return self.u_dofs.reshape(-1, 2)

    @property
    def v(self):
        """Nodal BFS data, shape (N, 4)."""
        return self.v_dofs.reshape(-1, 4)


@dataclass(frozen=True)
class ConstraintSet:
    n_dofs: int
    fixed: frozenset
    free: np.ndarray = field(repr=False)

    def expand(self, x):
        """Full DOF vector from free values (fixed DOFs are zero)."""
        z = np.zeros(self.n_dofs)
        z[self.free] = x
        return z

    def restrict(self, z):
        return np.asarray(z)[self.free]


@dataclass(frozen=True)
class StrainSample:
    G0: np.ndarray
    H: np.ndarray


def n_dofs(mesh):
    return 6 * mesh.n_nodes


def u_dof(mesh, node, comp):
    return 2 * node + comp


def v_dof(mesh, node, kind):
    return 2 * mesh.n_nodes + 4 * node + kind


def qw2(G, lam, mu):
    G = np.asarray(G, dtype=float)
    tr = np.trace(G, axis1=-2, axis2=-1)
    return lam * tr**2 + 2 * mu * np.sum(G**2, axis=(-2, -1))


def qd2(G, c):
    return 4 * c * np.sum(np.asarray(G, dtype=float) ** 2, axis=(-2, -1))


def build_constraints(mesh, selector):
    nodes = np.array(sorted(boundary_nodes(mesh, selector)), dtype=int)
    N = mesh.n_nodes
    fixed = np.concatenate([
        2 * nodes, 2 * nodes + 1,
        *[2 * N + 4 * nodes + k for k in range(4)],
    ]) if len(nodes) else np.empty(0, dtype=int)
    mask = np.ones(6 * N, dtype=bool)
    mask[fixed] = False
    return ConstraintSet(6 * N, frozenset(fixed.tolist()), np.flatnonzero(mask))


def interpolate_initial(mesh, value_fn, grad_fn, mixed_fn):
    """Zero displacement and BFS nodal data sampled from analytic fields.

    ``grad_fn`` returns a pair ``(dv/dx1, dv/dx2)``; all callables take the
    node coordinate arrays ``(x1, x2)``.
    """
    x1, x2 = mesh.node_coords[:, 0], mesh.node_coords[:, 1]
    g1, g2 = grad_fn(x1, x2)
    v = np.column_stack([
        np.broadcast_to(value_fn(x1, x2), x1.shape),
        np.broadcast_to(g1, x1.shape),
        np.broadcast_to(g2, x1.shape),
        np.broadcast_to(mixed_fn(x1, x2), x1.shape),
    ]).astype(float)
    return PlateState(mesh, np.zeros(2 * mesh.n_nodes), v.ravel())


# Rows of the sampled-field operator, in this order.
FIELDS = ("u1_1", "u1_2", "u2_1", "u2_2", "v", "v_1", "v_2", "v_11", "v_12", "v_22")


@dataclass(frozen=True, eq=False)
class SampleOperator:
    """Linear map from a full DOF vector to fields at every quadrature sample.

    ``B @ z`` reshaped to ``(10, n_samples)`` gives the rows named in
    ``FIELDS``; ``weights`` are quadrature weights times element area.
    """

    B: sp.csr_matrix
    weights: np.ndarray
    coords: np.ndarray
    n_samples: int


def _element_dofs(mesh):
    N = mesh.n_nodes
    el = mesh.elements
    udofs = np.stack([2 * el, 2 * el + 1], axis=-1)  # (E, 4 corners, 2 comps)
    vdofs = (2 * N + 4 * el[:, :, None] + np.arange(4)).reshape(-1, 16)
    return udofs, vdofs


@lru_cache(maxsize=32)
def sample_operator(mesh, mode=QuadratureMode.GAUSS2):
    rule, u_pts = sampling(mode)
    nq = len(rule)
    E = mesh.n_elements
    ns = E * nq
    hx, hy = mesh.hx, mesh.hy
    udofs, vdofs = _element_dofs(mesh)

    q1 = q1_eval(u_pts[:, 0], u_pts[:, 1])
    dN = q1.grads / np.array([hx, hy])  # (nq, 4, 2)
    bfs = bfs_eval(rule.points[:, 0], rule.points[:, 1], hx, hy)

    sample = np.arange(ns).reshape(E, nq)
    rows, cols, vals = [], [], []

    def add(field_idx, local_vals, local_dofs):
        # local_vals: (nq, k); local_dofs: (E, k)
        r = field_idx * ns + np.broadcast_to(sample[:, :, None], (E, nq, local_vals.shape[1]))
        c = np.broadcast_to(local_dofs[:, None, :], r.shape)
        v = np.broadcast_to(local_vals[None], r.shape)
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(v.ravel())

    for comp in range(2):
        for d in range(2):
            add(2 * comp + d, dN[:, :, d], udofs[:, :, comp])
    add(4, bfs.values, vdofs)
    add(5, bfs.grads[..., 0], vdofs)
    add(6, bfs.grads[..., 1], vdofs)
    add(7, bfs.hessians[..., 0, 0], vdofs)
    add(8, bfs.hessians[..., 0, 1], vdofs)
    add(9, bfs.hessians[..., 1, 1], vdofs)

    B = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(FIELDS) * ns, n_dofs(mesh)),
    )
    B.sum_duplicates()
    weights = np.tile(rule.weights * hx * hy, E)
    origins = mesh.node_coords[mesh.elements[:, 0]]
    coords = (origins[:, None, :] + rule.points[None] * np.array([hx, hy])).reshape(-1, 2)
    return SampleOperator(B, weights, coords, ns)


def fields_from_samples(s):
    """Membrane strain G0 and Hessian H, symmetric arrays of shape (ns, 2, 2)."""
    u11, u12, u21, u22, _, v1, v2, v11, v12, v22 = s
    g12 = 0.5 * (u12 + u21) + 0.5 * v1 * v2
    G0 = np.stack([np.stack([u11 + 0.5 * v1**2, g12], -1),
                   np.stack([g12, u22 + 0.5 * v2**2], -1)], -2)
    H = np.stack([np.stack([v11, v12], -1), np.stack([v12, v22], -1)], -2)
    return G0, H


def _pullback(s, T, M):
    """Sample-wise coefficients of ``B`` rows for a variation of G0 and H.

    ``T`` and ``M`` are the derivatives of the integrand with respect to the
    (full, symmetric) tensors G0 and H.
    """
    v1, v2 = s[5], s[6]
    t11, t12, t22 = T[:, 0, 0], T[:, 0, 1], T[:, 1, 1]
    out = np.zeros_like(s)
    out[0], out[1], out[2], out[3] = t11, t12, t12, t22
    out[5] = t11 * v1 + t12 * v2
    out[6] = t12 * v1 + t22 * v2
    out[7], out[8], out[9] = M[:, 0, 0], 2 * M[:, 0, 1], M[:, 1, 1]
    return out


def _stress(G, lam, mu):
    tr = G[:, 0, 0] + G[:, 1, 1]
    return lam * tr[:, None, None] * np.eye(2) + 2 * mu * G


def _load_samples(op, f):
    if callable(f):
        return np.asarray(f(op.coords[:, 0], op.coords[:, 1]), dtype=float) * np.ones(op.n_samples)
    return float(f)


def _as_vector(state):
    return state.vector if isinstance(state, PlateState) else np.asarray(state, dtype=float)


def _samples(op, z):
    return (op.B @ z).reshape(len(FIELDS), op.n_samples)


def _check_same_mesh(a, b):
    if isinstance(a, PlateState) and isinstance(b, PlateState) and a.mesh is not b.mesh:
        raise MeshMismatchError("states discretize different meshes")


def strain_at(state, element, qp):
    """G0 and H at reference point ``qp`` of ``element``, evaluated directly."""
    mesh = state.mesh
    hx, hy = mesh.hx, mesh.hy
    udofs, vdofs = _element_dofs(mesh)
    xi, eta = qp
    q1 = q1_eval(xi, eta)
    bfs = bfs_eval(xi, eta, hx, hy)
    z = state.vector
    ue = z[udofs[element]]  # (4, 2)
    grad_u = ue.T @ (q1.grads / np.array([hx, hy]))  # (2 comps, 2 derivs)
    ve = z[vdofs[element]]
    gv = ve @ bfs.grads
    H = np.einsum("k,kij->ij", ve, bfs.hessians)
    G0 = 0.5 * (grad_u + grad_u.T) + 0.5 * np.outer(gv, gv)
    return StrainSample(G0, H)


def energy_density_terms(op, z, params):
    s = _samples(op, z)
    G0, H = fields_from_samples(s)
    membrane = 0.5 * qw2(G0, params.lam, params.mu)
    bending = qw2(H, params.lam, params.mu) / 24.0
    load = _load_samples(op, params.f) * s[4]
    return membrane, bending, load


def energy(state, params, rule=QuadratureMode.GAUSS2):
    """Total von Karman energy: membrane + bending - load work."""
    z = _as_vector(state)
    op = sample_operator(_mesh_of(state), QuadratureMode(rule))
    membrane, bending, load = energy_density_terms(op, z, params)
    return float(op.weights @ (membrane + bending - load))


def dissipation(state_a, state_b, params, rule=QuadratureMode.GAUSS2):
    _check_same_mesh(state_a, state_b)
    return float(np.sqrt(dissipation_sq(state_a, state_b, params, rule)))


def dissipation_sq(state_a, state_b, params, rule=QuadratureMode.GAUSS2):
    _check_same_mesh(state_a, state_b)
    op = sample_operator(_mesh_of(state_a), QuadratureMode(rule))
    Ga, Ha = fields_from_samples(_samples(op, _as_vector(state_a)))
    Gb, Hb = fields_from_samples(_samples(op, _as_vector(state_b)))
    dens = qd2(Gb - Ga, params.c) + qd2(Hb - Ha, params.c) / 12.0
    return float(op.weights @ dens)


def _full_energy_gradient(op, z, params):
    s = _samples(op, z)
    G0, H = fields_from_samples(s)
    T = _stress(G0, params.lam, params.mu)
    M = _stress(H, params.lam, params.mu) / 12.0
    coef = _pullback(s, T, M)
    coef[4] = -_load_samples(op, params.f)
    return op.B.T @ (coef * op.weights).ravel()


def _full_dissipation_sq_gradient(op, z_prev, z, params):
    s = _samples(op, z)
    G0, H = fields_from_samples(s)
    Gp, Hp = fields_from_samples(_samples(op, z_prev))
    T = 8 * params.c * (G0 - Gp)
    M = 8 * params.c * (H - Hp) / 12.0
    coef = _pullback(s, T, M)
    return op.B.T @ (coef * op.weights).ravel()


def energy_gradient(state, params, constraints, rule=QuadratureMode.GAUSS2):
    op = sample_operator(_mesh_of(state), QuadratureMode(rule))
    return _full_energy_gradient(op, _as_vector(state), params)[constraints.free]


def dissipation_sq_gradient(prev, state, params, constraints, rule=QuadratureMode.GAUSS2):
    """Gradient of ``z -> D(prev, z)**2`` over the free DOFs."""
    _check_same_mesh(prev, state)
    op = sample_operator(_mesh_of(state), QuadratureMode(rule))
    g = _full_dissipation_sq_gradient(op, _as_vector(prev), _as_vector(state), params)
    return g[constraints.free]


def load_vector(mesh, params, rule=QuadratureMode.GAUSS2):
    """Consistent load vector ``int f * phi`` over all DOFs."""
    op = sample_operator(mesh, QuadratureMode(rule))
    coef = np.zeros((len(FIELDS), op.n_samples))
    coef[4] = _load_samples(op, params.f)
    return op.B.T @ (coef * op.weights).ravel()


_X3_POINTS = np.array([-0.5, 0.5]) / np.sqrt(3.0)
_X3_WEIGHTS = np.array([0.5, 0.5])


def energy_via_thickness(state, params, rule=QuadratureMode.GAUSS2):
    """Unloaded energy as a through-thickness integral of the 3D strain.

    Integrates ``1/2 Q_W(G0 - x3 H)`` over ``x3 in (-1/2, 1/2)``.
    """
    op = sample_operator(_mesh_of(state), QuadratureMode(rule))
    G0, H = fields_from_samples(_samples(op, _as_vector(state)))
    dens = sum(w * 0.5 * qw2(G0 - x3 * H, params.lam, params.mu)
               for x3, w in zip(_X3_POINTS, _X3_WEIGHTS))
    return float(op.weights @ dens)


def dissipation_via_thickness(state_a, state_b, params, rule=QuadratureMode.GAUSS2):
    _check_same_mesh(state_a, state_b)
    op = sample_operator(_mesh_of(state_a), QuadratureMode(rule))
    Ga, Ha = fields_from_samples(_samples(op, _as_vector(state_a)))
    Gb, Hb = fields_from_samples(_samples(op, _as_vector(state_b)))
    dens = sum(w * qd2((Gb - x3 * Hb) - (Ga - x3 * Ha), params.c)
               for x3, w in zip(_X3_POINTS, _X3_WEIGHTS))
    return float(np.sqrt(op.weights @ dens))


def evaluate_fields(state, points):
    """Interpolated u, v, grad v and d2v/dx1dx2 at physical points."""
    mesh = state.mesh
    elem, ref = mesh.locate(points)
    udofs, vdofs = _element_dofs(mesh)
    z = state.vector
    q1 = q1_eval(ref[:, 0], ref[:, 1])
    bfs = bfs_eval(ref[:, 0], ref[:, 1], mesh.hx, mesh.hy)
    ue = z[udofs[elem]]  # (P, 4, 2)
    ve = z[vdofs[elem]]  # (P, 16)
    u = np.einsum("pk,pkc->pc", q1.values, ue)
    v = np.einsum("pk,pk->p", bfs.values, ve)
    gv = np.einsum("pkd,pk->pd", bfs.grads, ve)
    v12 = np.einsum("pk,pk->p", bfs.hessians[..., 0, 1], ve)
    return u, v, gv, v12


def prolong(state, fine_mesh):
    """Nodal re-interpolation of ``state`` onto ``fine_mesh``.

    Exact when the fine grid nests the coarse one.
    """
    u, v, gv, v12 = evaluate_fields(state, fine_mesh.node_coords)
    vd = np.column_stack([v, gv, v12]).ravel()
    return PlateState(fine_mesh, u.ravel(), vd)


def _mesh_of(state):
    if isinstance(state, PlateState):
        return state.mesh
    raise TypeError("expected a PlateState")


class PlateModel:
    """A plate problem on the free DOFs, usable as a metric-energy system.

    Vectors handed to the methods are reduced (free DOFs only); fixed DOFs
    are clamped to zero.
    """

    def __init__(self, mesh, params, constraints, mode=QuadratureMode.GAUSS2):
        self.mesh = mesh
        self.params = params
        self.constraints = constraints
        self.mode = QuadratureMode(mode)
        self.op = sample_operator(mesh, self.mode)
        self._B = self.op.B[:, constraints.free].tocsr()
        self._BT = self._B.T.tocsr()
        self._load = _load_samples(self.op, params.f)

    @property
    def dim(self):
        return len(self.constraints.free)

    def state(self, x):
        return PlateState.from_vector(self.mesh, self.constraints.expand(x))

    def reduce(self, state):
        return self.constraints.restrict(state.vector)

    def _s(self, x):
        return (self._B @ x).reshape(len(FIELDS), self.op.n_samples)

    def strains(self, x):
        return fields_from_samples(self._s(x))

    def energy(self, x):
        s = self._s(x)
        G0, H = fields_from_samples(s)
        p = self.params
        dens = 0.5 * qw2(G0, p.lam, p.mu) + qw2(H, p.lam, p.mu) / 24.0 - self._load * s[4]
        return float(self.op.weights @ dens)

    def energy_gradient(self, x):
        s = self._s(x)
        G0, H = fields_from_samples(s)
        p = self.params
        coef = _pullback(s, _stress(G0, p.lam, p.mu), _stress(H, p.lam, p.mu) / 12.0)
        coef[4] = -self._load
        return self._BT @ (coef * self.op.weights).ravel()

    def metric_sq(self, x1, x2):
        Ga, Ha = self.strains(x1)
        Gb, Hb = self.strains(x2)
        c = self.params.c
        return float(self.op.weights @ (qd2(Gb - Ga, c) + qd2(Hb - Ha, c) / 12.0))

    def metric(self, x1, x2):
        return float(np.sqrt(self.metric_sq(x1, x2)))

    def metric_sq_gradient(self, prev, x):
        s = self._s(x)
        G0, H = fields_from_samples(s)
        Gp, Hp = self.strains(prev)
        c8 = 8 * self.params.c
        coef = _pullback(s, c8 * (G0 - Gp), c8 * (H - Hp) / 12.0)
        return self._BT @ (coef * self.op.weights).ravel()

    def gauss_newton_matrix(self, x, tau):
        """SPD approximation of the Hessian of ``phi + D(prev, .)**2 / (2 tau)``.

        Both quadratic forms are isotropic, so their sum is one isotropic form
        with shear modulus ``mu + 2 c / tau``; the strain is linearized at ``x``.
        """
        ns = self.op.n_samples
        s = self._s(x)
        v1, v2 = s[5], s[6]
        rows = [self._B[k * ns:(k + 1) * ns] for k in range(len(FIELDS))]
        Dg = sp.diags
        e11 = rows[0] + Dg(v1) @ rows[5]
        e22 = rows[3] + Dg(v2) @ rows[6]
        e12 = 0.5 * (rows[1] + rows[2]) + 0.5 * (Dg(v2) @ rows[5] + Dg(v1) @ rows[6])
        lam = self.params.lam
        mu = self.params.mu + 2 * self.params.c / tau
        W = Dg(self.op.weights)

        def form(a11, a22, a12, scale):
            tr = a11 + a22
            K = lam * (tr.T @ W @ tr) + 2 * mu * (a11.T @ W @ a11 + a22.T @ W @ a22
                                                   + 2 * (a12.T @ W @ a12))
            return scale * K

        K = form(e11, e22, e12, 1.0) + form(rows[7], rows[9], rows[8], 1.0 / 12.0)
        return K.tocsc()

    def preconditioner(self, prev, tau):
        K = self.gauss_newton_matrix(prev, tau)
        K = K + sp.diags(np.full(K.shape[0], 1e-12 * abs(K.diagonal()).max()))
        return spla.factorized(K.tocsc())
