"""Uniform rectangular meshes of the plate midsurface."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class MeshError(ValueError):
    """Invalid domain or subdivision counts."""


class BoundarySelector(str, Enum):
    ALL_EDGES = "all_edges"
    TOP_AND_BOTTOM = "top_and_bottom"


@dataclass(frozen=True)
class DomainSpec:
    x1_min: float = -1.0
    x1_max: float = 1.0
    x2_min: float = -1.0
    x2_max: float = 1.0

    def __post_init__(self):
        if not (self.x1_min < self.x1_max and self.x2_min < self.x2_max):
            raise MeshError(f"degenerate domain {self}")

    @property
    def area(self):
        return (self.x1_max - self.x1_min) * (self.x2_max - self.x2_min)


@dataclass(frozen=True, eq=False)
class MeshGrid:
    """Structured grid with row-major node order (x2 outer, x1 inner).

    Element ``e = j * nx + i`` has corners listed counterclockwise from the
    lower-left node. Instances hash by identity so they can key caches.
    """

    domain: DomainSpec
    nx: int
    ny: int
    node_coords: np.ndarray = field(repr=False)
    elements: np.ndarray = field(repr=False)

    @property
    def hx(self):
        return (self.domain.x1_max - self.domain.x1_min) / self.nx

    @property
    def hy(self):
        return (self.domain.x2_max - self.domain.x2_min) / self.ny

    @property
    def n_nodes(self):
        return (self.nx + 1) * (self.ny + 1)

    @property
    def n_elements(self):
        return self.nx * self.ny

    def node_index(self, i, j):
        return j * (self.nx + 1) + i

    def element_origin(self, e):
        """Lower-left corner of element ``e``."""
        return self.node_coords[self.elements[e, 0]]

    def locate(self, points):
        """Element index and reference coordinates of each point.

        Points on shared edges are assigned to the element on the lower-left
        side, except at the upper/right domain boundary.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        d = self.domain
        s = (points[:, 0] - d.x1_min) / self.hx
        t = (points[:, 1] - d.x2_min) / self.hy
        i = np.clip(np.floor(s).astype(int), 0, self.nx - 1)
        j = np.clip(np.floor(t).astype(int), 0, self.ny - 1)
        return j * self.nx + i, np.column_stack([s - i, t - j])


def build_uniform_mesh(domain, nx, ny):
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise MeshError(f"subdivision counts must be positive integers, got nx={nx}, ny={ny}")
    nx, ny = int(nx), int(ny)
    x1 = domain.x1_min + (domain.x1_max - domain.x1_min) * np.arange(nx + 1) / nx
    x2 = domain.x2_min + (domain.x2_max - domain.x2_min) * np.arange(ny + 1) / ny
    # pin the far edge exactly
    x1[-1], x2[-1] = domain.x1_max, domain.x2_max
    X1, X2 = np.meshgrid(x1, x2)
    coords = np.column_stack([X1.ravel(), X2.ravel()])

    jj, ii = np.meshgrid(np.arange(ny), np.arange(nx), indexing="ij")
    ll = (jj * (nx + 1) + ii).ravel()
    elements = np.column_stack([ll, ll + 1, ll + nx + 2, ll + nx + 1])

    coords.setflags(write=False)
    elements.setflags(write=False)
    return MeshGrid(domain, nx, ny, coords, elements)


def boundary_nodes(mesh, sel):
    sel = BoundarySelector(sel)
    d = mesh.domain
    x1, x2 = mesh.node_coords[:, 0], mesh.node_coords[:, 1]
    on_tb = (x2 == d.x2_min) | (x2 == d.x2_max)
    if sel is BoundarySelector.TOP_AND_BOTTOM:
        mask = on_tb
    else:
        mask = on_tb | (x1 == d.x1_min) | (x1 == d.x1_max)
    return set(np.flatnonzero(mask).tolist())
