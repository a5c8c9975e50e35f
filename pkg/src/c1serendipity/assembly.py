"""Stiffness and load for (lap u, lap v) = (f, v), global assembly, and the C1 audit.

A physical basis function on a cell of size ``hx x hy`` is the reference shape
function times ``hx**a * hy**b``, where ``(a, b)`` are the derivative orders of
its DOF.  All local matrices returned here are for the physical basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .linalg import ExtendedMatrix, as_csr
from .mesh import GlobalDofMap, MeshTopology
from .quadrature import QuadRule2D, gauss1d, tensor_rule
from .ref_element import ElementBasis


def default_rule(k: int, extra: int = 2) -> QuadRule2D:
    """``k + extra`` Gauss points per direction on the reference square."""
    return tensor_rule(gauss1d(k + extra))


def _points_per_direction(rule: QuadRule2D) -> int:
    n = int(round(np.sqrt(len(rule.weights))))
    if n * n != len(rule.weights):
        raise ValueError("expected a tensor-product rule")
    return n


def dof_scaling(element: ElementBasis, hx: float, hy: float) -> np.ndarray:
    orders = np.array([d.kind.orders for d in element.dofs])
    return hx ** orders[:, 0] * hy ** orders[:, 1]


def local_stiffness(element: ElementBasis, h, rule: QuadRule2D | None = None,
                    dtype=float) -> np.ndarray:
    """Element matrix of ``(lap phi_i, lap phi_j)`` on an ``hx x hy`` cell.

    ``h`` is a cell size or a pair ``(hx, hy)``; ``rule`` lives on the
    reference square and needs at least ``k + 1`` points per direction.
    The products are always summed in long double; ``dtype`` picks the
    returned precision.
    """
    hx, hy = (h, h) if np.isscalar(h) else h
    k = element.degree
    rule = default_rule(k) if rule is None else rule
    if _points_per_direction(rule) < k + 1:
        raise ValueError(
            f"rule with {_points_per_direction(rule)} points per direction cannot "
            f"integrate Q_{2 * k} integrands exactly; need at least {k + 1}"
        )
    ext = np.longdouble
    hx, hy = ext(hx), ext(hy)
    lap = (element.tabulate(rule.x, rule.y, 2, 0, dtype=ext) / hx**2
           + element.tabulate(rule.x, rule.y, 0, 2, dtype=ext) / hy**2)
    A = (lap * (rule.weights.astype(ext) * hx * hy)) @ lap.T
    s = dof_scaling(element, hx, hy)
    A = s[:, None] * A * s[None, :]
    return (0.5 * (A + A.T)).astype(dtype)


def local_load(element: ElementBasis, rect, f, rule: QuadRule2D | None = None) -> np.ndarray:
    """``b_i = int_cell f phi_i`` for one cell ``rect = (x0, y0, hx, hy)``."""
    return load_vectors(element, np.array([rect[:2]]), rect[2], rect[3], f, rule)[0]


def load_vectors(element, origins, hx, hy, f, rule=None, dtype=float) -> np.ndarray:
    """Load vectors of many equal cells at once, shape ``(ncells, ndofs)``."""
    rule = default_rule(element.degree) if rule is None else rule
    phi = element.tabulate(rule.x, rule.y, dtype=np.longdouble)
    X = origins[:, 0:1] + hx * rule.x[None, :]
    Y = origins[:, 1:2] + hy * rule.y[None, :]
    F = np.asarray(f(X, Y), dtype=float)
    F = np.broadcast_to(F, X.shape)
    bad = ~np.isfinite(F)
    if bad.any():
        c, p = np.argwhere(bad)[0]
        raise FloatingPointError(f"load function is not finite at ({X[c, p]!r}, {Y[c, p]!r})")
    b = (F.astype(np.longdouble) * (rule.weights * hx * hy)) @ phi.T
    return (b * dof_scaling(element, hx, hy)[None, :]).astype(dtype)


@dataclass(eq=False)
class LinearSystem:
    """Free-DOF system ``A x = b`` plus the full matrix for export."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    free: np.ndarray  # free position -> global id
    ndofs: int
    full_matrix: sp.csr_matrix
    full_rhs: np.ndarray
    matrix_ext: ExtendedMatrix | None = None  # free block, long double
    rhs_ext: np.ndarray | None = None

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def expand(self, x_free: np.ndarray) -> np.ndarray:
        """Global coefficient vector with zeros on constrained DOFs."""
        u = np.zeros(self.ndofs)
        u[self.free] = x_free
        return u


def _scatter(mesh, dofmap, element, rule):
    if (element.degree, element.flavor) != (dofmap.degree, dofmap.flavor):
        raise ValueError("element and DOF map disagree on degree or flavor")
    A_loc = local_stiffness(element, (mesh.hx, mesh.hy), rule, dtype=np.longdouble)
    cd = dofmap.cell_dofs
    nloc = cd.shape[1]
    rows = np.repeat(cd, nloc, axis=1).ravel()
    cols = np.tile(cd, (1, nloc)).ravel()
    vals = np.tile(A_loc.ravel(), mesh.num_cells)
    return ExtendedMatrix(rows, cols, vals, dofmap.ndofs)


def assemble_matrix(mesh: MeshTopology, dofmap: GlobalDofMap, element: ElementBasis, rule=None):
    """Global stiffness matrix in CSR form (summed in long double, then rounded)."""
    return _scatter(mesh, dofmap, element, rule).to_csr()


def assemble_load(mesh, dofmap, element, f, rule=None, dtype=float) -> np.ndarray:
    b_loc = load_vectors(element, mesh.cell_origin(), mesh.hx, mesh.hy, f, rule, dtype=np.longdouble)
    b = np.zeros(dofmap.ndofs, dtype=np.longdouble)
    np.add.at(b, dofmap.cell_dofs.ravel(), b_loc.ravel())
    return b.astype(dtype)


def assemble(mesh, dofmap, element, f, rule=None) -> LinearSystem:
    """Assemble and eliminate the clamped DOFs (homogeneous, so b is untouched).

    The free block is also kept in long double for residual checks.
    """
    A_ext = _scatter(mesh, dofmap, element, rule)
    b_ext = assemble_load(mesh, dofmap, element, f, rule, dtype=np.longdouble)
    free = dofmap.free_dofs()
    A_free_ext = A_ext.submatrix(free)
    A = A_ext.to_csr()
    return LinearSystem(A_free_ext.to_csr(), b_ext[free].astype(float), free, dofmap.ndofs, A,
                        b_ext.astype(float), A_free_ext, b_ext[free])


def cell_coefficients(mesh, dofmap, element, u: np.ndarray) -> np.ndarray:
    """Per-cell weights of the reference shape functions, shape ``(ncells, nloc)``."""
    return u[dofmap.cell_dofs] * dof_scaling(element, mesh.hx, mesh.hy)[None, :]


def c1_interface_audit(mesh, dofmap, element, coeffs, samples: int = 33) -> tuple[float, float]:
    """Largest jumps of ``u_h`` and of its normal derivative over interior edges."""
    w = cell_coefficients(mesh, dofmap, element, np.asarray(coeffs, dtype=float))
    t = np.linspace(0.0, 1.0, samples)
    one, zero = np.ones_like(t), np.zeros_like(t)
    hx, hy = mesh.hx, mesh.hy
    # vertical edges: left cell at xi=1, right cell at xi=0, normal d/dx
    v_left = element.tabulate(one, t)
    v_right = element.tabulate(zero, t)
    d_left = element.tabulate(one, t, 1, 0) / hx
    d_right = element.tabulate(zero, t, 1, 0) / hx
    # horizontal edges: lower cell at eta=1, upper cell at eta=0, normal d/dy
    h_low = element.tabulate(t, one)
    h_up = element.tabulate(t, zero)
    e_low = element.tabulate(t, one, 0, 1) / hy
    e_up = element.tabulate(t, zero, 0, 1) / hy

    jump_v = jump_n = 0.0
    nx, ny = mesh.nx, mesh.ny
    for iy in range(ny):
        for ix in range(nx - 1):
            a, b = iy * nx + ix, iy * nx + ix + 1
            jump_v = max(jump_v, np.abs(w[a] @ v_left - w[b] @ v_right).max())
            jump_n = max(jump_n, np.abs(w[a] @ d_left - w[b] @ d_right).max())
    for iy in range(ny - 1):
        for ix in range(nx):
            a, b = iy * nx + ix, (iy + 1) * nx + ix
            jump_v = max(jump_v, np.abs(w[a] @ h_low - w[b] @ h_up).max())
            jump_n = max(jump_n, np.abs(w[a] @ e_low - w[b] @ e_up).max())
    return float(jump_v), float(jump_n)


def export_coo(A, path) -> None:
    """Write ``row col value`` lines (0-based) for an external check."""
    m = sp.coo_matrix(A)
    order = np.lexsort((m.col, m.row))
    with Path(path).open("w") as fh:
        for r, c, v in zip(m.row[order], m.col[order], m.data[order]):
            fh.write(f"{r} {c} {v:.17g}\n")
