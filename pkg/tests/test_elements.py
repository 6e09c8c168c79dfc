import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vkplate.elements import (QuadratureKind, QuadratureMode, bfs_eval, q1_eval, quadrature,
                              sampling)

unit = st.floats(0.0, 1.0)


@pytest.mark.parametrize("kind", list(QuadratureKind))
def test_rules_are_normalized_and_interior(kind):
    r = quadrature(kind)
    assert abs(r.weights.sum() - 1) <= 1e-14
    assert np.all((r.points > 0) & (r.points < 1))


def test_midpoint_rule():
    r = quadrature("midpoint_1pt")
    assert r.points.tolist() == [[0.5, 0.5]] and r.weights.tolist() == [1.0]


def test_gauss2_nodes():
    r = quadrature("gauss_2x2")
    assert np.allclose(np.unique(r.points[:, 0]), [0.21132486540518713, 0.7886751345948129],
                       atol=1e-15, rtol=0)
    assert np.allclose(r.weights, 0.25)
    integral = r.weights @ (r.points[:, 0] ** 3 * r.points[:, 1] ** 3)
    assert abs(integral - 1 / 16) <= 1e-15


def test_gauss3_exact_to_degree_five():
    r = quadrature("gauss_3x3")
    integral = r.weights @ (r.points[:, 0] ** 5 * r.points[:, 1] ** 4)
    assert abs(integral - 1 / 30) <= 1e-15


def test_paper_sampling_uses_midpoint_for_q1():
    rule, u_pts = sampling(QuadratureMode.PAPER)
    assert len(rule) == 4 and np.all(u_pts == 0.5)


def test_q1_nodal_values():
    assert np.allclose(q1_eval(0.5, 0.5).values, 0.25)
    assert q1_eval(0.0, 0.0).values.tolist() == [1.0, 0.0, 0.0, 0.0]
    assert q1_eval(1.0, 1.0).values.tolist() == [0.0, 0.0, 1.0, 0.0]


@pytest.mark.parametrize("kind", list(QuadratureKind))
def test_q1_partition_of_unity_at_rule_points(kind):
    pts = quadrature(kind).points
    ev = q1_eval(pts[:, 0], pts[:, 1])
    assert np.allclose(ev.values.sum(-1), 1.0, atol=1e-13, rtol=0)
    assert np.allclose(ev.grads.sum(-2), 0.0, atol=1e-13, rtol=0)


def test_q1_gradient_matches_finite_differences(rng):
    xi, eta = rng.uniform(0.1, 0.9, 2)
    h = 1e-6
    g = q1_eval(xi, eta).grads
    fd_xi = (q1_eval(xi + h, eta).values - q1_eval(xi - h, eta).values) / (2 * h)
    fd_eta = (q1_eval(xi, eta + h).values - q1_eval(xi, eta - h).values) / (2 * h)
    fd = np.stack([fd_xi, fd_eta], -1)
    assert np.max(np.abs(g - fd)) / np.max(np.abs(g)) <= 1e-7


def test_bfs_kronecker_property():
    hx, hy = 0.3, 0.7
    for c, (a, b) in enumerate([(0, 0), (1, 0), (1, 1), (0, 1)]):
        ev = bfs_eval(float(a), float(b), hx, hy)
        expect = np.zeros(16)
        expect[4 * c] = 1.0
        assert np.array_equal(ev.values, expect)
        # derivative DOFs interpolate physical derivatives
        assert ev.grads[4 * c + 1, 0] == pytest.approx(1.0, abs=1e-15)
        assert ev.grads[4 * c + 2, 1] == pytest.approx(1.0, abs=1e-15)
        assert ev.hessians[4 * c + 3, 0, 1] == pytest.approx(1.0, abs=1e-14)


def test_bfs_rejects_bad_sizes():
    with pytest.raises(ValueError):
        bfs_eval(0.5, 0.5, 0.0, 1.0)


def _nodal_data(fun, x0, y0, hx, hy):
    """BFS element DOFs from callables returning (p, p_1, p_2, p_12)."""
    corners = [(x0, y0), (x0 + hx, y0), (x0 + hx, y0 + hy), (x0, y0 + hy)]
    return np.concatenate([fun(x, y) for x, y in corners])


def _bicubic(coef):
    """Value, gradient, Hessian and mixed derivative of sum coef[i,j] x^i y^j."""
    P = np.polynomial.polynomial

    def ev(x, y, dx=0, dy=0):
        c = P.polyder(P.polyder(coef, dx, axis=0), dy, axis=1) if (dx or dy) else coef
        return P.polyval2d(x, y, c)
    return ev


def test_bfs_reproduces_linear_field(rng):
    hx, hy = 0.25, 0.5
    dofs = _nodal_data(lambda x, y: np.array([x, 1.0, 0.0, 0.0]), 0.0, 0.0, hx, hy)
    xi, eta = rng.uniform(0, 1, (2, 20))
    ev = bfs_eval(xi, eta, hx, hy)
    assert np.allclose(ev.values @ dofs, xi * hx, atol=1e-12, rtol=0)
    assert np.allclose(ev.grads.transpose(0, 2, 1) @ dofs, [1.0, 0.0], atol=1e-12, rtol=0)
    assert np.allclose(np.einsum("pkij,k->pij", ev.hessians, dofs), 0.0, atol=1e-12)


def test_bfs_bicubic_reproduction(rng):
    coef = rng.uniform(-1, 1, (4, 4))
    ev_p = _bicubic(coef)
    x0, y0, hx, hy = -0.4, 0.3, 0.5, 0.25
    dofs = _nodal_data(lambda x, y: np.array([ev_p(x, y), ev_p(x, y, 1, 0), ev_p(x, y, 0, 1),
                                              ev_p(x, y, 1, 1)]), x0, y0, hx, hy)
    xi, eta = rng.uniform(0, 1, (2, 100))
    x, y = x0 + hx * xi, y0 + hy * eta
    ev = bfs_eval(xi, eta, hx, hy)

    def rel(a, b):
        return np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(b)))
    assert rel(ev.values @ dofs, ev_p(x, y)) <= 1e-11
    assert rel(ev.grads[..., 0] @ dofs, ev_p(x, y, 1, 0)) <= 1e-11
    assert rel(ev.grads[..., 1] @ dofs, ev_p(x, y, 0, 1)) <= 1e-11
    assert rel(ev.hessians[..., 0, 0] @ dofs, ev_p(x, y, 2, 0)) <= 1e-11
    assert rel(ev.hessians[..., 0, 1] @ dofs, ev_p(x, y, 1, 1)) <= 1e-11
    assert rel(ev.hessians[..., 1, 1] @ dofs, ev_p(x, y, 0, 2)) <= 1e-11


def test_bfs_hessian_matches_finite_differences(rng):
    hx, hy = 0.4, 0.3
    xi, eta = rng.uniform(0.2, 0.8, 2)
    d = 1e-4
    H = bfs_eval(xi, eta, hx, hy).hessians

    def val(a, b):
        return bfs_eval(a, b, hx, hy).values
    dxi, deta = d, d
    f_xx = (val(xi + dxi, eta) - 2 * val(xi, eta) + val(xi - dxi, eta)) / dxi**2 / hx**2
    f_yy = (val(xi, eta + deta) - 2 * val(xi, eta) + val(xi, eta - deta)) / deta**2 / hy**2
    f_xy = (val(xi + dxi, eta + deta) - val(xi + dxi, eta - deta)
            - val(xi - dxi, eta + deta) + val(xi - dxi, eta - deta)) / (4 * dxi * deta * hx * hy)
    for fd, an in [(f_xx, H[:, 0, 0]), (f_yy, H[:, 1, 1]), (f_xy, H[:, 0, 1])]:
        assert np.max(np.abs(fd - an)) / np.max(np.abs(an)) <= 1e-5


def test_bfs_c1_across_shared_edges(rng):
    hx, hy = 0.5, 0.25
    left, right, top = rng.uniform(-1, 1, (3, 16))
    # right element shares corners 1, 2 of the left element as its 0, 3
    right[0:4], right[12:16] = left[4:8], left[8:12]
    # top element shares corners 3, 2 of the left element as its 0, 1
    top[0:4], top[4:8] = left[12:16], left[8:12]
    t = np.linspace(0, 1, 10)
    a, b = bfs_eval(np.ones(10), t, hx, hy), bfs_eval(np.zeros(10), t, hx, hy)
    assert np.allclose(a.values @ left, b.values @ right, atol=1e-12, rtol=0)
    assert np.allclose(a.grads.transpose(0, 2, 1) @ left, b.grads.transpose(0, 2, 1) @ right,
                       atol=1e-12, rtol=0)
    a, b = bfs_eval(t, np.ones(10), hx, hy), bfs_eval(t, np.zeros(10), hx, hy)
    assert np.allclose(a.values @ left, b.values @ top, atol=1e-12, rtol=0)
    assert np.allclose(a.grads.transpose(0, 2, 1) @ left, b.grads.transpose(0, 2, 1) @ top,
                       atol=1e-12, rtol=0)


@settings(max_examples=50)
@given(unit, unit)
def test_bfs_value_basis_partition_of_unity(xi, eta):
    ev = bfs_eval(xi, eta, 0.2, 0.3)
    assert ev.values[::4].sum() == pytest.approx(1.0, abs=1e-13)
    assert np.allclose(ev.hessians, np.swapaxes(ev.hessians, -1, -2))
