"""C1 Bogner-Fox-Schmit and C1 serendipity elements on the reference square.

Canonical DOF ordering (shared with the global DOF map):

* vertices x1=(0,0), x2=(1,0), x3=(1,1), x4=(0,1), each with
  (Value, DX, DY, DXY);
* edges bottom x1x2, right x2x3, top x4x3, left x1x4; on each edge the
  points ``j/(k-2)``, ``j = 1..k-3``, counted from the edge's first vertex, each
  with (Value, normal derivative);
* interior Lagrange points, row by row (y outer, x inner).

Bubble indices returned by :func:`bubble_ids` are 0-based positions in the
BFS ordering, so ``bubble_ids(4)`` is ``[4, 5, 6, 7, 11, 13, 16, 17, 19]``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np

from .linalg import SingularMatrixError, condition_estimate, lu_factor, lu_solve_factored
from .poly2d import (
    CENTERED_FRAME,
    EXTENDED,
    BasisList,
    Poly2D,
    monomial_basis,
    pk_exponents,
    stack_coeffs,
    tabulate,
)

COND_LIMIT = 1e12
MIN_BFS_DEGREE = 3
MIN_SERENDIPITY_DEGREE = 4
MAX_ELEMENT_DEGREE = 12

BFS = "bfs"
SERENDIPITY = "serendipity"
FLAVORS = (BFS, SERENDIPITY)


class DofKind(enum.Enum):
    VALUE = (0, 0)
    DX = (1, 0)
    DY = (0, 1)
    DXY = (1, 1)

    @property
    def orders(self) -> tuple[int, int]:
        return self.value


VERTICES = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0))
# (first vertex, last vertex, normal-derivative kind)
EDGES = (
    (0, 1, DofKind.DY),  # bottom
    (1, 2, DofKind.DX),  # right
    (3, 2, DofKind.DY),  # top
    (0, 3, DofKind.DX),  # left
)
EDGE_NAMES = ("bottom", "right", "top", "left")


class UnisolvenceError(np.linalg.LinAlgError):
    """The DOF matrix of an element is singular or too ill-conditioned."""

    def __init__(self, message, cond=float("inf"), bubbles=None):
        super().__init__(message)
        self.cond = cond
        self.bubbles = bubbles


@dataclass(frozen=True)
class DofFunctional:
    """Point evaluation of a value or a derivative on the reference square.

    ``entity`` is ``("vertex", v)``, ``("edge", e, j)`` or
    ``("interior", i, j)``; ``j`` counts edge points from 0.
    """

    kind: DofKind
    point: tuple[float, float]
    entity: tuple


@dataclass(frozen=True)
class DofSet:
    dofs: tuple[DofFunctional, ...]
    degree: int
    flavor: str

    def __len__(self):
        return len(self.dofs)

    def __iter__(self):
        return iter(self.dofs)

    def __getitem__(self, i):
        return self.dofs[i]


def _boundary_dofs(k: int) -> list[DofFunctional]:
    dofs = []
    for v, pt in enumerate(VERTICES):
        for kind in DofKind:
            dofs.append(DofFunctional(kind, pt, ("vertex", v)))
    for e, (a, b, normal) in enumerate(EDGES):
        pa, pb = np.array(VERTICES[a]), np.array(VERTICES[b])
        for j in range(1, k - 2):
            t = j / (k - 2)
            pt = tuple(float(c) for c in (1 - t) * pa + t * pb)
            dofs.append(DofFunctional(DofKind.VALUE, pt, ("edge", e, j - 1)))
            dofs.append(DofFunctional(normal, pt, ("edge", e, j - 1)))
    return dofs


def bfs_dofs(k: int) -> DofSet:
    """The (k+1)^2 DOFs of the C1-Q_k BFS element."""
    if k < MIN_BFS_DEGREE:
        raise ValueError(f"BFS elements need k >= {MIN_BFS_DEGREE}, got {k}")
    dofs = _boundary_dofs(k)
    for j in range(1, k - 2):
        for i in range(1, k - 2):
            dofs.append(
                DofFunctional(DofKind.VALUE, (i / (k - 2), j / (k - 2)), ("interior", i, j))
            )
    return DofSet(tuple(dofs), k, BFS)


def serendipity_interior_points(k: int) -> list[tuple[int, int]]:
    """Lattice indices ``(i, j)``, ``1 <= j <= i <= k-7``, of the kept interior nodes.

    The point is ``(i/(k-2), j/(k-2))``; the set is empty for ``k < 8``.
    """
    return [(i, j) for i in range(1, k - 6) for j in range(1, i + 1)]


def serendipity_dofs(k: int) -> DofSet:
    """Boundary BFS DOFs plus the dim P_{k-8} interior nodes when ``k >= 8``."""
    if k < MIN_SERENDIPITY_DEGREE:
        raise ValueError(
            f"serendipity elements need k >= {MIN_SERENDIPITY_DEGREE}, got {k}"
        )
    dofs = _boundary_dofs(k)
    for i, j in serendipity_interior_points(k):
        dofs.append(
            DofFunctional(DofKind.VALUE, (i / (k - 2), j / (k - 2)), ("interior", i, j))
        )
    return DofSet(tuple(dofs), k, SERENDIPITY)


def make_dofs(k: int, flavor: str) -> DofSet:
    if flavor == BFS:
        return bfs_dofs(k)
    if flavor == SERENDIPITY:
        return serendipity_dofs(k)
    raise ValueError(f"unknown element flavor {flavor!r}")


def dof_count(k: int, flavor: str) -> int:
    if flavor == BFS:
        return (k + 1) ** 2
    n = 16 + 8 * (k - 3)
    if k >= 8:
        n += (k - 7) * (k - 6) // 2
    return n


def _bfs_index(k: int, entity: tuple, kind: DofKind) -> int:
    for m, d in enumerate(bfs_dofs(k)):
        if d.entity == entity and d.kind == kind:
            return m
    raise KeyError((entity, kind))


BUBBLE_VARIANTS = ("text", "figure")


def bubble_ids(k: int, variant: str = "text") -> list[int]:
    """0-based BFS DOF indices whose dual functions enrich P_k.

    ``variant`` only matters for ``k == 5``: ``"text"`` follows the index list
    {5,6,7,8,12,14,18,19,20,21,22}; ``"figure"`` swaps DY at the first bottom
    point for the Value there.
    """
    if k < MIN_SERENDIPITY_DEGREE:
        raise ValueError(f"bubbles are defined for k >= {MIN_SERENDIPITY_DEGREE}")
    if variant not in BUBBLE_VARIANTS:
        raise ValueError(f"unknown bubble variant {variant!r}")
    V, DX, DY, DXY = DofKind.VALUE, DofKind.DX, DofKind.DY, DofKind.DXY
    picks = [(("vertex", 1), kind) for kind in DofKind]
    picks += [(("vertex", 2), DXY), (("vertex", 3), DX)]
    bottom = lambda j: ("edge", 0, j)  # noqa: E731
    right = lambda j: ("edge", 1, j)  # noqa: E731
    if k == 4:
        picks += [(bottom(0), V), (bottom(0), DY), (right(0), DX)]
    elif k == 5:
        first = (bottom(0), DY) if variant == "text" else (bottom(0), V)
        picks += [first, (bottom(1), V), (bottom(1), DY), (right(0), V), (right(0), DX)]
    else:
        picks += [
            (bottom(0), V),
            (bottom(0), DY),
            (bottom(1), V),
            (bottom(1), DY),
            (bottom(2), DY),
            (right(0), DX),
        ]
    return sorted(_bfs_index(k, ent, kind) for ent, kind in picks)


def apply_dof(F: DofFunctional, p: Poly2D, scale=(1.0, 1.0)) -> float:
    """Evaluate ``F`` on a reference polynomial seen on a cell of size ``scale``.

    Derivatives pick up ``hx**-a * hy**-b`` from the pullback.
    """
    hx, hy = scale
    if hx <= 0 or hy <= 0:
        raise ValueError("cell sizes must be positive")
    a, b = F.kind.orders
    return p.eval(F.point[0], F.point[1], a, b) / (hx**a * hy**b)


def dof_matrix(dofs, stack: np.ndarray, frame, dtype=float) -> np.ndarray:
    """``M[i, j] = F_i(p_j)`` for polynomials given as a coefficient stack."""
    dofs = list(dofs)
    M = np.empty((len(dofs), stack.shape[0]), dtype=dtype)
    for kind in DofKind:
        rows = [i for i, d in enumerate(dofs) if d.kind == kind]
        if not rows:
            continue
        pts = np.array([dofs[i].point for i in rows])
        M[rows] = tabulate(stack, frame, pts[:, 0], pts[:, 1], *kind.orders, dtype=dtype).T
    return M


@dataclass(frozen=True, eq=False)
class ElementBasis:
    """Nodal basis of a reference element.

    ``coeffs`` stacks the shape-function coefficient grids in the element's
    frame; ``scale_exponents[i]`` is the total derivative order of DOF ``i``
    (a physical basis function on a cell of size h is ``h**e_i`` times the
    reference one).
    """

    dofs: DofSet
    shape_functions: BasisList
    span_basis: BasisList
    bubble_ids: tuple[int, ...]
    cond: float
    bubble_variant: str | None = None
    coeffs: np.ndarray = field(repr=False, default=None)
    frame: tuple = CENTERED_FRAME
    coeffs_ext: np.ndarray = field(repr=False, default=None)  # long-double originals

    @property
    def degree(self) -> int:
        return self.dofs.degree

    @property
    def flavor(self) -> str:
        return self.dofs.flavor

    @property
    def ndofs(self) -> int:
        return len(self.dofs)

    @property
    def derivative_orders(self) -> np.ndarray:
        return np.array([sum(d.kind.orders) for d in self.dofs])

    def tabulate(self, x, y, dx: int = 0, dy: int = 0, dtype=float) -> np.ndarray:
        """Reference shape-function derivatives at points, shape ``(ndofs, npts)``.

        Evaluated from the unrounded long-double coefficients; ``dtype`` picks
        the precision of the result.
        """
        return tabulate(self._stack, self.frame, x, y, dx, dy, dtype=dtype)

    @property
    def _stack(self) -> np.ndarray:
        return self.coeffs if self.coeffs_ext is None else self.coeffs_ext

    def duality_matrix(self) -> np.ndarray:
        return dof_matrix(self.dofs, self._stack, self.frame)


def _invert(M: np.ndarray, what: str, bubbles=None):
    """Inverse of an extended-precision DOF matrix plus a 1-norm condition estimate."""
    try:
        f = lu_factor(M)
    except SingularMatrixError as exc:
        raise UnisolvenceError(f"{what}: singular DOF matrix", bubbles=bubbles) from exc
    cond = condition_estimate(M.astype(float))
    if not cond < COND_LIMIT:
        raise UnisolvenceError(
            f"{what}: DOF matrix condition {cond:.3e} exceeds {COND_LIMIT:.0e}",
            cond=cond,
            bubbles=bubbles,
        )
    return lu_solve_factored(f, np.eye(M.shape[0], dtype=M.dtype)), cond


def _check_degree(k: int, lo: int):
    if not lo <= k <= MAX_ELEMENT_DEGREE:
        raise ValueError(f"degree must lie in [{lo}, {MAX_ELEMENT_DEGREE}], got {k}")


@lru_cache(maxsize=None)
def build_bfs_element(k: int) -> ElementBasis:
    """Dual basis of Q_k for the BFS DOFs, via the generalized Vandermonde matrix."""
    _check_degree(k, MIN_BFS_DEGREE)
    dofs = bfs_dofs(k)
    span = monomial_basis("Qk", k, CENTERED_FRAME)
    span_stack = stack_coeffs(span, k)
    M = dof_matrix(dofs, span_stack, CENTERED_FRAME, dtype=EXTENDED)
    X, cond = _invert(M, f"BFS k={k}")
    coeffs = np.einsum("mj,mab->jab", X, span_stack.astype(EXTENDED))
    return _make_element(dofs, span, coeffs, (), cond, None, "Qk")


def _serendipity_span(k: int, variant: str) -> tuple[BasisList, tuple[int, ...]]:
    ids = tuple(bubble_ids(k, variant))
    bfs = build_bfs_element(k)
    pk = monomial_basis("Pk", k, CENTERED_FRAME)
    polys = tuple(pk) + tuple(bfs.shape_functions[i] for i in ids)
    return BasisList(polys, "Vk", k), ids


def _build_serendipity(k: int, variant: str) -> ElementBasis:
    dofs = serendipity_dofs(k)
    span, ids = _serendipity_span(k, variant)
    span_stack = stack_coeffs(span, k).astype(EXTENDED)
    # replace the rounded BFS bubbles by their extended-precision coefficients
    span_stack[len(span) - len(ids):] = build_bfs_element(k).coeffs_ext[list(ids)]
    M = dof_matrix(dofs, span_stack, CENTERED_FRAME, dtype=EXTENDED)
    X, cond = _invert(M, f"serendipity k={k} ({variant} bubbles)", bubbles=ids)
    coeffs = np.einsum("mj,mab->jab", X, span_stack)
    return _make_element(dofs, span, coeffs, ids, cond, variant, "Vk")


@lru_cache(maxsize=None)
def build_serendipity_element(k: int, variant: str = "text") -> ElementBasis:
    """C1 serendipity element: P_k enriched by selected BFS dual functions.

    For ``k == 5`` a failing ``"text"`` bubble set falls back to ``"figure"``;
    the variant actually used is stored on the element.
    """
    _check_degree(k, MIN_SERENDIPITY_DEGREE)
    if k != 5:
        variant = "text"
    try:
        return _build_serendipity(k, variant)
    except UnisolvenceError:
        if k == 5 and variant == "text":
            return _build_serendipity(k, "figure")
        raise


def _make_element(dofs, span, coeffs_ext, ids, cond, variant, label) -> ElementBasis:
    origin, scale = CENTERED_FRAME
    coeffs_ext = np.ascontiguousarray(coeffs_ext, dtype=EXTENDED)
    coeffs_ext.setflags(write=False)
    coeffs = coeffs_ext.astype(float)
    coeffs.setflags(write=False)
    shapes = BasisList(tuple(Poly2D(c, origin, scale) for c in coeffs), label, dofs.degree)
    return ElementBasis(dofs, shapes, span, tuple(ids), float(cond), variant, coeffs,
                        CENTERED_FRAME, coeffs_ext)


def build_element(k: int, flavor: str) -> ElementBasis:
    if flavor == BFS:
        return build_bfs_element(k)
    if flavor == SERENDIPITY:
        return build_serendipity_element(k)
    raise ValueError(f"unknown element flavor {flavor!r}")


Target = Callable[..., float]


def local_interpolate(element: ElementBasis, target: Target, rect=(0.0, 0.0, 1.0, 1.0)) -> np.ndarray:
    """DOF values ``F_i(target)`` on the cell ``rect = (x0, y0, hx, hy)``.

    ``target(x, y, dx, dy)`` returns the requested partial derivative; a
    :class:`Poly2D` qualifies.  Derivative DOFs are raw physical derivatives,
    so on a non-unit cell the interpolant is ``sum(c_i * h**e_i * phi_i)``.
    """
    x0, y0, hx, hy = rect
    out = np.empty(element.ndofs)
    for i, d in enumerate(element.dofs):
        a, b = d.kind.orders
        out[i] = target(x0 + hx * d.point[0], y0 + hy * d.point[1], a, b)
    return out


def interpolant(element: ElementBasis, values: np.ndarray) -> Poly2D:
    """Reference-square polynomial with the given DOF values (unit cell)."""
    origin, scale = element.frame
    c = np.tensordot(np.asarray(values, dtype=EXTENDED), element._stack, axes=1)
    return Poly2D(c.astype(float), origin, scale)


@dataclass(frozen=True)
class UnisolvenceReport:
    degree: int
    flavor: str
    dim: int
    cond: float
    passed: bool
    duality_error: float = float("nan")
    bubble_variant: str | None = None

    def as_dict(self):
        return {
            "degree": self.degree,
            "flavor": self.flavor,
            "dim": self.dim,
            "cond": self.cond,
            "pass": self.passed,
            "duality_error": self.duality_error,
            "bubble_variant": self.bubble_variant,
        }


def unisolvence_report(k: int, flavor: str) -> UnisolvenceReport:
    """Numerical unisolvence certificate: DOF-matrix condition below 1e12."""
    dim = dof_count(k, flavor)
    try:
        el = build_element(k, flavor)
    except UnisolvenceError as exc:
        return UnisolvenceReport(k, flavor, dim, exc.cond, False)
    dual = np.abs(el.duality_matrix() - np.eye(el.ndofs)).max()
    return UnisolvenceReport(
        k, flavor, el.ndofs, el.cond, el.cond < COND_LIMIT, float(dual), el.bubble_variant
    )


def dump_element(element: ElementBasis, path) -> None:
    """Write every shape function's coefficient grid as a plain-text matrix."""
    (x0, y0), (sx, sy) = element.frame
    lines = [
        f"# {element.flavor} k={element.degree} ndofs={element.ndofs}",
        f"# coeffs[i, j] multiplies ((x - {x0})/{sx})**i * ((y - {y0})/{sy})**j",
    ]
    for m, (d, c) in enumerate(zip(element.dofs, element.coeffs)):
        lines.append(f"# shape {m}: {d.kind.name} at {d.point} {d.entity}")
        for row in c:
            lines.append(" ".join(f"{v:.16e}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n")
