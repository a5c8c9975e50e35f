"""Uniform rectangular meshes of the unit square and the global C1 DOF map.

Entity numbering is lexicographic (x fastest):

* vertex ``(ix, iy)`` -> ``iy * (nx + 1) + ix``;
* horizontal edge from vertex ``(ix, iy)`` to ``(ix + 1, iy)`` ->
  ``iy * nx + ix``; vertical edge from ``(ix, iy)`` to ``(ix, iy + 1)`` ->
  ``nx * (ny + 1) + iy * (nx + 1) + ix``;
* cell ``(ix, iy)`` -> ``iy * nx + ix``.

Edges are oriented along +x or +y, which matches the local orientation of all
four edges of the reference element, so neighbouring cells list shared edge
nodes in the same order.  Because the mesh is axis-aligned, derivative DOFs are
global partial derivatives and need no sign flips.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ref_element import BFS, SERENDIPITY, DofKind, make_dofs, serendipity_interior_points

MAX_GRID_LEVEL = 12


@dataclass(frozen=True, eq=False)
class MeshTopology:
    nx: int
    ny: int
    cell_vertices: np.ndarray  # (ncells, 4): x1, x2, x3, x4
    cell_edges: np.ndarray  # (ncells, 4): bottom, right, top, left
    vertex_coords: np.ndarray  # (nvertices, 2)
    edge_vertices: np.ndarray  # (nedges, 2), oriented along +x or +y

    @property
    def n(self) -> int:
        if self.nx != self.ny:
            raise AttributeError("mesh is not square; use nx and ny")
        return self.nx

    @property
    def hx(self) -> float:
        return 1.0 / self.nx

    @property
    def hy(self) -> float:
        return 1.0 / self.ny

    @property
    def h(self) -> float:
        return max(self.hx, self.hy)

    @property
    def num_vertices(self) -> int:
        return (self.nx + 1) * (self.ny + 1)

    @property
    def num_edges(self) -> int:
        return self.nx * (self.ny + 1) + self.ny * (self.nx + 1)

    @property
    def num_cells(self) -> int:
        return self.nx * self.ny

    def cell_origin(self) -> np.ndarray:
        """Lower-left corner of every cell, shape ``(ncells, 2)``."""
        return self.vertex_coords[self.cell_vertices[:, 0]]

    def cell_rect(self, c: int) -> tuple[float, float, float, float]:
        x0, y0 = self.vertex_coords[self.cell_vertices[c, 0]]
        return float(x0), float(y0), self.hx, self.hy

    def boundary_vertices(self) -> np.ndarray:
        xy = self.vertex_coords
        ix = np.rint(xy[:, 0] * self.nx)
        iy = np.rint(xy[:, 1] * self.ny)
        return (ix == 0) | (ix == self.nx) | (iy == 0) | (iy == self.ny)

    def edge_cells(self) -> list[list[int]]:
        """Cells incident to each edge."""
        out: list[list[int]] = [[] for _ in range(self.num_edges)]
        for c, edges in enumerate(self.cell_edges):
            for e in edges:
                out[e].append(c)
        return out

    def boundary_edges(self) -> np.ndarray:
        return np.array([len(cs) == 1 for cs in self.edge_cells()])


def rectangular_mesh(nx: int, ny: int | None = None) -> MeshTopology:
    """``nx`` by ``ny`` uniform cells on the unit square."""
    ny = nx if ny is None else ny
    if nx < 1 or ny < 1:
        raise ValueError("need at least one cell per direction")
    vid = lambda ix, iy: iy * (nx + 1) + ix  # noqa: E731
    hid = lambda ix, iy: iy * nx + ix  # noqa: E731
    vert_off = nx * (ny + 1)
    vvid = lambda ix, iy: vert_off + iy * (nx + 1) + ix  # noqa: E731

    X, Y = np.meshgrid(np.arange(nx + 1) / nx, np.arange(ny + 1) / ny, indexing="xy")
    coords = np.column_stack([X.ravel(), Y.ravel()])

    edges = np.empty((vert_off + ny * (nx + 1), 2), dtype=np.int64)
    for iy in range(ny + 1):
        for ix in range(nx):
            edges[hid(ix, iy)] = (vid(ix, iy), vid(ix + 1, iy))
    for iy in range(ny):
        for ix in range(nx + 1):
            edges[vvid(ix, iy)] = (vid(ix, iy), vid(ix, iy + 1))

    cv = np.empty((nx * ny, 4), dtype=np.int64)
    ce = np.empty((nx * ny, 4), dtype=np.int64)
    for iy in range(ny):
        for ix in range(nx):
            c = iy * nx + ix
            cv[c] = (vid(ix, iy), vid(ix + 1, iy), vid(ix + 1, iy + 1), vid(ix, iy + 1))
            ce[c] = (hid(ix, iy), vvid(ix + 1, iy), hid(ix, iy + 1), vvid(ix, iy))
    return MeshTopology(nx, ny, cv, ce, coords, edges)


def build_mesh(grid_level: int) -> MeshTopology:
    """Grid ``G_level`` of the halving sequence: ``2**(level-1)`` cells per side."""
    if grid_level < 1:
        raise ValueError("grid levels start at 1")
    if grid_level > MAX_GRID_LEVEL:
        raise ValueError(f"grid level {grid_level} exceeds the desk-scale cap {MAX_GRID_LEVEL}")
    n = 2 ** (grid_level - 1)
    return rectangular_mesh(n, n)


def interior_dofs_per_cell(k: int, flavor: str) -> int:
    if flavor == BFS:
        return (k - 3) ** 2
    if flavor == SERENDIPITY:
        return len(serendipity_interior_points(k))
    raise ValueError(f"unknown element flavor {flavor!r}")


def expected_dimension(n: int, k: int, flavor: str) -> int:
    """Closed-form ``dim V_h`` on an ``n`` by ``n`` mesh, before boundary elimination."""
    return 4 * (n + 1) ** 2 + 4 * n * (n + 1) * (k - 3) + n * n * interior_dofs_per_cell(k, flavor)


@dataclass(frozen=True, eq=False)
class GlobalDofMap:
    """Global numbering of the C1 DOFs.

    ``cell_dofs[c]`` lists global ids in the canonical local order of the
    element; ``boundary`` flags DOFs fixed to zero by the clamped condition.
    """

    degree: int
    flavor: str
    ndofs: int
    cell_dofs: np.ndarray  # (ncells, nloc)
    boundary: np.ndarray  # (ndofs,) bool
    vertex_offset: int
    edge_offset: int
    interior_offset: int

    @property
    def dim(self) -> int:
        return self.ndofs

    def free_dofs(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary)


def build_dof_map(mesh: MeshTopology, k: int, flavor: str) -> GlobalDofMap:
    dofs = make_dofs(k, flavor)
    per_edge = 2 * (k - 3)
    per_cell = interior_dofs_per_cell(k, flavor)
    nv, ne, nc = mesh.num_vertices, mesh.num_edges, mesh.num_cells
    edge_off = 4 * nv
    int_off = edge_off + per_edge * ne
    ndofs = int_off + per_cell * nc

    kind_slot = {DofKind.VALUE: 0, DofKind.DX: 1, DofKind.DY: 2, DofKind.DXY: 3}
    interior_slot = {}
    for d in dofs:
        if d.entity[0] == "interior":
            interior_slot[d.entity] = len(interior_slot)

    cell_dofs = np.empty((nc, len(dofs)), dtype=np.int64)
    for m, d in enumerate(dofs):
        tag = d.entity[0]
        if tag == "vertex":
            cell_dofs[:, m] = 4 * mesh.cell_vertices[:, d.entity[1]] + kind_slot[d.kind]
        elif tag == "edge":
            _, e, j = d.entity
            # value first, then normal derivative
            slot = 2 * j + (0 if d.kind == DofKind.VALUE else 1)
            cell_dofs[:, m] = edge_off + per_edge * mesh.cell_edges[:, e] + slot
        else:
            cell_dofs[:, m] = int_off + per_cell * np.arange(nc) + interior_slot[d.entity]

    boundary = np.zeros(ndofs, dtype=bool)
    bv = np.flatnonzero(mesh.boundary_vertices())
    for s in range(4):
        boundary[4 * bv + s] = True
    be = np.flatnonzero(mesh.boundary_edges())
    for s in range(per_edge):
        boundary[edge_off + per_edge * be + s] = True
    return GlobalDofMap(k, flavor, ndofs, cell_dofs, boundary, 0, edge_off, int_off)


def boundary_dof_count(dofmap: GlobalDofMap) -> int:
    return int(dofmap.boundary.sum())
