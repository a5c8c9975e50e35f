import dataclasses

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from c1serendipity.assembly import (
    assemble,
    assemble_load,
    assemble_matrix,
    c1_interface_audit,
    default_rule,
    export_coo,
    local_load,
    local_stiffness,
)
from c1serendipity.linalg import spd_solve
from c1serendipity.mesh import build_dof_map, build_mesh, rectangular_mesh
from c1serendipity.poly2d import Poly2D
from c1serendipity.quadrature import gauss1d, integrate, tensor_rule
from c1serendipity.ref_element import BFS, SERENDIPITY, DofKind, build_element, local_interpolate

ALL_ELEMENTS = [(BFS, k) for k in range(3, 9)] + [(SERENDIPITY, k) for k in range(4, 9)]
X2Y2 = Poly2D(np.diag([0.0, 0.0, 1.0]))


def physical_dofs(element, target, rect):
    return local_interpolate(element, target, rect)


class TestLocalStiffness:
    @pytest.mark.parametrize("flavor,k", ALL_ELEMENTS)
    def test_symmetric(self, flavor, k):
        A = local_stiffness(build_element(k, flavor), 0.5)
        assert np.abs(A - A.T).max() < 1e-12 * np.abs(A).max()

    @pytest.mark.parametrize("flavor,k", ALL_ELEMENTS)
    def test_linear_functions_have_no_energy(self, flavor, k):
        el = build_element(k, flavor)
        c = physical_dofs(el, Poly2D(np.array([[0.0, 1.0], [1.0, 0.0]])), (0, 0, 0.25, 0.25))
        A = local_stiffness(el, 0.25)
        assert np.abs(A @ c).max() < 1e-9 * np.abs(A).max()

    def test_bfs3_energy_of_x2y2(self):
        # int_0^1 int_0^1 (2 y^2 + 2 x^2)^2 = 4 (1/5 + 2/9 + 1/5) = 112/45
        oracle = integrate(lambda x, y: (2 * x**2 + 2 * y**2) ** 2, tensor_rule(gauss1d(10)))
        assert oracle == pytest.approx(112 / 45, rel=1e-14)
        el = build_element(3, BFS)
        c = physical_dofs(el, X2Y2, (0, 0, 1, 1))
        assert c @ local_stiffness(el, 1.0) @ c == pytest.approx(112 / 45, rel=1e-12)

    @pytest.mark.parametrize("hx,hy", [(0.5, 0.5), (0.25, 0.5)])
    def test_bfs3_energy_on_small_cells(self, hx, hy):
        el = build_element(3, BFS)
        c = physical_dofs(el, X2Y2, (0, 0, hx, hy))
        oracle = integrate(lambda x, y: (2 * x**2 + 2 * y**2) ** 2, tensor_rule(gauss1d(10), (0, 0, hx, hy)))
        assert c @ local_stiffness(el, (hx, hy)) @ c == pytest.approx(oracle, rel=1e-12)

    def test_positive_semidefinite(self):
        w = np.linalg.eigvalsh(local_stiffness(build_element(5, SERENDIPITY), 1.0))
        assert w.min() > -1e-10 * w.max()

    def test_underresolved_rule_rejected(self):
        with pytest.raises(ValueError, match="points per direction"):
            local_stiffness(build_element(4, BFS), 1.0, tensor_rule(gauss1d(3)))


class TestLocalLoad:
    def test_zero_source(self):
        b = local_load(build_element(4, BFS), (0, 0, 1, 1), lambda x, y: 0 * x)
        assert not np.any(b)

    def test_partition_of_unity(self):
        # the interpolant of 1 has weight 1 on each vertex Value DOF and 0 elsewhere
        el = build_element(3, BFS)
        b = local_load(el, (0, 0, 1, 1), lambda x, y: np.ones_like(x))
        vals = [i for i, d in enumerate(el.dofs) if d.kind == DofKind.VALUE]
        assert b[vals].sum() == pytest.approx(1.0, rel=1e-14)

    def test_self_projection_is_positive(self):
        el = build_element(4, SERENDIPITY)
        for j in (0, 9, 23):
            phi = el.shape_functions[j]
            b = local_load(el, (0, 0, 1, 1), lambda x, y: phi(x, y), default_rule(4, 6))
            norm2 = integrate(lambda x, y: phi(x, y) ** 2, tensor_rule(gauss1d(12)))
            assert b[j] == pytest.approx(norm2, rel=1e-10) and b[j] > 0

    def test_non_finite_source(self):
        with pytest.raises(FloatingPointError):
            local_load(build_element(4, BFS), (0, 0, 1, 1), lambda x, y: np.full_like(x, np.inf))


class TestAssemble:
    def test_grid1_fully_constrained(self):
        mesh = build_mesh(1)
        dm = build_dof_map(mesh, 4, SERENDIPITY)
        sys_ = assemble(mesh, dm, build_element(4, SERENDIPITY), lambda x, y: np.ones_like(x))
        assert sys_.size == 0
        assert spd_solve(sys_.matrix, sys_.rhs).x.size == 0

    def test_grid2_serendipity_spd(self):
        mesh = build_mesh(2)
        dm = build_dof_map(mesh, 4, SERENDIPITY)
        sys_ = assemble(mesh, dm, build_element(4, SERENDIPITY), lambda x, y: np.ones_like(x))
        assert sys_.size == 60 - 48
        assert np.linalg.eigvalsh(sys_.matrix.toarray()).min() > 0
        np.linalg.cholesky(sys_.matrix.toarray())

    def test_shared_edge_couples_both_cells(self):
        mesh = rectangular_mesh(2, 1)
        el = build_element(4, BFS)
        dm = build_dof_map(mesh, 4, BFS)
        A = assemble_matrix(mesh, dm, el)
        shared = mesh.cell_edges[0, 1]
        assert shared == mesh.cell_edges[1, 3]
        g = dm.edge_offset + 2 * (4 - 3) * shared  # value DOF at the edge midpoint
        cols = set(A[g].indices)
        only_left = set(dm.cell_dofs[0]) - set(dm.cell_dofs[1])
        only_right = set(dm.cell_dofs[1]) - set(dm.cell_dofs[0])
        assert cols & only_left and cols & only_right

    def test_global_matrix_symmetric(self):
        mesh = build_mesh(3)
        A = assemble_matrix(mesh, build_dof_map(mesh, 6, SERENDIPITY), build_element(6, SERENDIPITY))
        assert abs(A - A.T).max() <= 1e-12 * abs(A).max()

    def test_element_map_mismatch(self):
        mesh = build_mesh(2)
        with pytest.raises(ValueError):
            assemble_matrix(mesh, build_dof_map(mesh, 4, BFS), build_element(5, BFS))

    def test_expand_and_export(self, tmp_path):
        mesh = build_mesh(2)
        dm = build_dof_map(mesh, 4, BFS)
        sys_ = assemble(mesh, dm, build_element(4, BFS), lambda x, y: np.ones_like(x))
        u = sys_.expand(np.arange(sys_.size, dtype=float) + 1)
        assert u.shape == (dm.ndofs,) and not np.any(u[dm.boundary])
        path = tmp_path / "A.coo"
        export_coo(sys_.matrix, path)
        r, c, v = np.loadtxt(path, unpack=True)
        back = sp.coo_matrix((v, (r.astype(int), c.astype(int))), shape=sys_.matrix.shape)
        assert abs(back - sys_.matrix).max() == 0

    def test_load_sums_to_integral_of_partition(self):
        # the global interpolant of 1 is 1 on all Value DOFs at vertices and edges; with
        # f = 1 the matching load entries sum to the area
        mesh = build_mesh(3)
        el = build_element(5, SERENDIPITY)
        dm = build_dof_map(mesh, 5, SERENDIPITY)
        b = assemble_load(mesh, dm, el, lambda x, y: np.ones_like(x))
        one = np.zeros(dm.ndofs)
        for c in range(mesh.num_cells):
            one[dm.cell_dofs[c]] = local_interpolate(el, lambda x, y, dx=0, dy=0: float(dx == dy == 0),
                                                     mesh.cell_rect(c))
        assert one @ b == pytest.approx(1.0, rel=1e-13)


def scrambled(dm):
    """Negative control: cell 0 lists two of its vertex Value DOFs in swapped order."""
    cd = dm.cell_dofs.copy()
    cd[0, [0, 4]] = cd[0, [4, 0]]
    return dataclasses.replace(dm, cell_dofs=cd)


class TestInterfaceAudit:
    def test_random_coefficients(self):
        mesh = build_mesh(2)
        el = build_element(4, SERENDIPITY)
        dm = build_dof_map(mesh, 4, SERENDIPITY)
        u = np.random.default_rng(0).uniform(-1, 1, dm.ndofs)
        jv, jn = c1_interface_audit(mesh, dm, el, u, samples=33)
        assert max(jv, jn) < 1e-9 * np.abs(u).max()

    def test_zero(self):
        mesh = build_mesh(2)
        dm = build_dof_map(mesh, 4, BFS)
        assert c1_interface_audit(mesh, dm, build_element(4, BFS), np.zeros(dm.ndofs)) == (0.0, 0.0)

    def test_scrambled_map_fails(self):
        mesh = build_mesh(2)
        el = build_element(4, SERENDIPITY)
        dm = scrambled(build_dof_map(mesh, 4, SERENDIPITY))
        u = np.random.default_rng(1).uniform(-1, 1, dm.ndofs)
        jv, jn = c1_interface_audit(mesh, dm, el, u)
        assert max(jv, jn) > 1e-2


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(ALL_ELEMENTS), st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**31 - 1))
def test_audit_on_rectangular_meshes(elem, nx, ny, seed):
    flavor, k = elem
    mesh = rectangular_mesh(nx, ny)
    dm = build_dof_map(mesh, k, flavor)
    u = np.random.default_rng(seed).uniform(-1, 1, dm.ndofs)
    jv, jn = c1_interface_audit(mesh, dm, build_element(k, flavor), u, samples=9)
    assert max(jv, jn) < 1e-9 * max(1.0, 1 / mesh.hx, 1 / mesh.hy)
