"""Reference-square shape functions and quadrature rules.

The reference element is ``[0, 1]^2`` with corners numbered counterclockwise
from the origin: 0 = (0, 0), 1 = (1, 0), 2 = (1, 1), 3 = (0, 1).

Q1 carries one value per corner. The Bogner-Fox-Schmit (BFS) element carries
four values per corner, ordered ``(v, dv/dx1, dv/dx2, d2v/dx1dx2)``, so local
BFS DOF ``4 * corner + kind``. Derivative DOFs are physical derivatives, i.e.
the reference basis is scaled by ``hx``, ``hy`` and ``hx * hy``.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

CORNERS = np.array([(0, 0), (1, 0), (1, 1), (0, 1)])


class QuadratureKind(str, Enum):
    MIDPOINT_1PT = "midpoint_1pt"
    GAUSS_2X2 = "gauss_2x2"
    GAUSS_3X3 = "gauss_3x3"


class QuadratureMode(str, Enum):
    """How energy integrands are sampled on each element.

    ``gauss2``/``gauss3`` evaluate every field at the tensor Gauss points.
    ``paper`` evaluates the Q1 strain e(u) at the element midpoint and all BFS
    quantities at the 2x2 Gauss points.
    """

    PAPER = "paper"
    GAUSS2 = "gauss2"
    GAUSS3 = "gauss3"


@dataclass(frozen=True)
class QuadratureRule:
    kind: QuadratureKind
    points: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.weights)


def _tensor_rule(kind, nodes, weights):
    # nodes/weights given on [-1, 1]
    t = 0.5 * (np.asarray(nodes) + 1.0)
    w = 0.5 * np.asarray(weights)
    T1, T2 = np.meshgrid(t, t)  # eta outer, xi inner
    W1, W2 = np.meshgrid(w, w)
    pts = np.column_stack([T1.ravel(), T2.ravel()])
    return QuadratureRule(QuadratureKind(kind), pts, (W1 * W2).ravel())


def quadrature(kind):
    kind = QuadratureKind(kind)
    if kind is QuadratureKind.MIDPOINT_1PT:
        return QuadratureRule(kind, np.array([[0.5, 0.5]]), np.array([1.0]))
    n = 2 if kind is QuadratureKind.GAUSS_2X2 else 3
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return _tensor_rule(kind, nodes, weights)


def sampling(mode):
    """Return ``(rule, u_points)`` for a quadrature mode.

    ``rule`` integrates every term; ``u_points[q]`` is where the Q1 gradient
    feeding quadrature point ``q`` is evaluated.
    """
    mode = QuadratureMode(mode)
    if mode is QuadratureMode.GAUSS3:
        rule = quadrature(QuadratureKind.GAUSS_3X3)
        return rule, rule.points
    rule = quadrature(QuadratureKind.GAUSS_2X2)
    if mode is QuadratureMode.PAPER:
        return rule, np.full_like(rule.points, 0.5)
    return rule, rule.points


@dataclass(frozen=True)
class Q1Eval:
    values: np.ndarray  # (..., 4)
    grads: np.ndarray  # (..., 4, 2), reference coordinates


@dataclass(frozen=True)
class BFSEval:
    values: np.ndarray  # (..., 16)
    grads: np.ndarray  # (..., 16, 2), physical coordinates
    hessians: np.ndarray  # (..., 16, 2, 2), physical coordinates


def q1_eval(xi, eta):
    xi, eta = np.asarray(xi, dtype=float), np.asarray(eta, dtype=float)
    a, b = CORNERS[:, 0], CORNERS[:, 1]
    lx = np.where(a == 1, xi[..., None], 1.0 - xi[..., None])
    ly = np.where(b == 1, eta[..., None], 1.0 - eta[..., None])
    dlx = np.where(a == 1, 1.0, -1.0) * np.ones_like(lx)
    dly = np.where(b == 1, 1.0, -1.0) * np.ones_like(ly)
    grads = np.stack([dlx * ly, lx * dly], axis=-1)
    return Q1Eval(lx * ly, grads)


def hermite_cubics(t):
    """The four 1D Hermite cubics on [0, 1] and their first two derivatives.

    Order: value at 0, slope at 0, value at 1, slope at 1. Returns an array of
    shape ``(3, ..., 4)`` holding (h, h', h'').
    """
    t = np.asarray(t, dtype=float)[..., None]
    one = np.ones_like(t)
    h = np.concatenate([1 - 3 * t**2 + 2 * t**3, t - 2 * t**2 + t**3,
                        3 * t**2 - 2 * t**3, -t**2 + t**3], axis=-1)
    dh = np.concatenate([-6 * t + 6 * t**2, one - 4 * t + 3 * t**2,
                         6 * t - 6 * t**2, -2 * t + 3 * t**2], axis=-1)
    d2h = np.concatenate([-6 * one + 12 * t, -4 * one + 6 * t,
                          6 * one - 12 * t, -2 * one + 6 * t], axis=-1)
    return np.stack([h, dh, d2h])


# For local DOF (corner, kind): which 1D function in xi and eta, and the
# physical scaling exponents of hx, hy.
_XI_FN = np.empty(16, dtype=int)
_ETA_FN = np.empty(16, dtype=int)
_PX = np.empty(16, dtype=int)
_PY = np.empty(16, dtype=int)
for _c, (_a, _b) in enumerate(CORNERS):
    for _k, (_dx, _dy) in enumerate([(0, 0), (1, 0), (0, 1), (1, 1)]):
        _XI_FN[4 * _c + _k] = 2 * _a + _dx
        _ETA_FN[4 * _c + _k] = 2 * _b + _dy
        _PX[4 * _c + _k] = _dx
        _PY[4 * _c + _k] = _dy


def bfs_eval(xi, eta, hx, hy):
    if not (hx > 0 and hy > 0):
        raise ValueError(f"element sizes must be positive, got hx={hx}, hy={hy}")
    HX = hermite_cubics(xi)[..., _XI_FN]
    HY = hermite_cubics(eta)[..., _ETA_FN]
    scale = float(hx) ** _PX * float(hy) ** _PY
    values = scale * HX[0] * HY[0]
    g1 = scale / hx * HX[1] * HY[0]
    g2 = scale / hy * HX[0] * HY[1]
    h11 = scale / hx**2 * HX[2] * HY[0]
    h22 = scale / hy**2 * HX[0] * HY[2]
    h12 = scale / (hx * hy) * HX[1] * HY[1]
    grads = np.stack([g1, g2], axis=-1)
    hess = np.stack([np.stack([h11, h12], -1), np.stack([h12, h22], -1)], -2)
    return BFSEval(values, grads, hess)
