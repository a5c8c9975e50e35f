"""Bivariate polynomials stored as dense monomial coefficient grids.

A :class:`Poly2D` holds ``coeffs[i, j]`` multiplying ``xi**i * eta**j`` where
``xi = (x - x0) / sx`` and ``eta = (y - y0) / sy``.  The default frame
(origin 0, scale 1) gives plain ``x**i * y**j``.  Reference elements use the
centered frame ``origin=(0.5, 0.5), scale=(0.5, 0.5)`` so that the monomials
live on [-1, 1]^2; on [0, 1]^2 the raw monomials become too ill-conditioned
for degree 9 and up.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Sequence

import numpy as np

MAX_DEGREE = 12
MAX_DERIVATIVE = 4

IDENTITY_FRAME = ((0.0, 0.0), (1.0, 1.0))
CENTERED_FRAME = ((0.5, 0.5), (0.5, 0.5))

# Sums of monomials are accumulated in extended precision (80-bit on x86-64)
# so that evaluation error stays at the level of the stored coefficients.
EXTENDED = np.longdouble


def _falling(n: int, d: int) -> float:
    return factorial(n) / factorial(n - d)


def _derivative_grid(c: np.ndarray, d: int, axis: int, scale: float) -> np.ndarray:
    """Coefficient grid of the ``d``-th derivative along ``axis``."""
    n = c.shape[axis]
    if d == 0:
        return c
    if d >= n:
        shape = list(c.shape)
        shape[axis] = 1
        return np.zeros(shape)
    factors = np.array([_falling(i + d, d) for i in range(n - d)]) / scale**d
    sl = [slice(None), slice(None)]
    sl[axis] = slice(d, None)
    out = c[tuple(sl)]
    if axis == 0:
        return out * factors[:, None]
    return out * factors[None, :]


@dataclass(frozen=True, eq=False)
class Poly2D:
    """Immutable polynomial in two variables.

    Args:
        coeffs: array of shape ``(nx + 1, ny + 1)``.
        origin: frame origin ``(x0, y0)``.
        scale: frame scale ``(sx, sy)``.
    """

    coeffs: np.ndarray
    origin: tuple[float, float] = (0.0, 0.0)
    scale: tuple[float, float] = (1.0, 1.0)
    _frame: tuple = field(init=False, repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float, copy=True)
        if c.ndim != 2:
            raise ValueError(f"coefficient grid must be 2D, got shape {c.shape}")
        if max(c.shape) - 1 > MAX_DEGREE:
            raise ValueError(
                f"degree {max(c.shape) - 1} exceeds the supported cap {MAX_DEGREE}"
            )
        c.setflags(write=False)
        origin = (float(self.origin[0]), float(self.origin[1]))
        scale = (float(self.scale[0]), float(self.scale[1]))
        if scale[0] <= 0 or scale[1] <= 0:
            raise ValueError("frame scale must be positive")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "_frame", (origin, scale))

    @property
    def nx(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def ny(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def frame(self):
        return self._frame

    def eval(self, x, y, dx: int = 0, dy: int = 0):
        """Evaluate ``d^dx/dx^dx d^dy/dy^dy p`` at ``(x, y)``.

        ``x`` and ``y`` may be scalars or broadcastable arrays.
        """
        if not (0 <= dx <= MAX_DERIVATIVE and 0 <= dy <= MAX_DERIVATIVE):
            raise ValueError(
                f"derivative orders must lie in [0, {MAX_DERIVATIVE}], got ({dx}, {dy})"
            )
        c = _derivative_grid(self.coeffs, dx, 0, self.scale[0])
        c = _derivative_grid(c, dy, 1, self.scale[1])
        c = c.astype(EXTENDED)
        xi = (np.asarray(x, dtype=EXTENDED) - self.origin[0]) / self.scale[0]
        eta = (np.asarray(y, dtype=EXTENDED) - self.origin[1]) / self.scale[1]
        xi, eta = np.broadcast_arrays(xi, eta)
        vx = xi[..., None] ** np.arange(c.shape[0])
        vy = eta[..., None] ** np.arange(c.shape[1])
        out = np.einsum("...i,ij,...j->...", vx, c, vy).astype(float)
        return float(out) if out.ndim == 0 else out

    __call__ = eval

    def in_qk(self, k: int, tol: float = 0.0) -> bool:
        """True when every coefficient with an exponent above ``k`` is negligible."""
        c = np.abs(self.coeffs)
        return bool(c[k + 1 :, :].max(initial=0.0) <= tol and c[:, k + 1 :].max(initial=0.0) <= tol)

    def in_pk(self, k: int, tol: float = 0.0) -> bool:
        """True when every coefficient with total degree above ``k`` is negligible."""
        i, j = np.indices(self.coeffs.shape)
        return bool(np.abs(self.coeffs[i + j > k]).max(initial=0.0) <= tol)

    def _check_frame(self, other: Poly2D):
        if self._frame != other._frame:
            raise ValueError("polynomials live in different frames")

    def __add__(self, other: Poly2D) -> Poly2D:
        self._check_frame(other)
        shape = np.maximum(self.coeffs.shape, other.coeffs.shape)
        c = np.zeros(shape)
        c[: self.nx + 1, : self.ny + 1] += self.coeffs
        c[: other.nx + 1, : other.ny + 1] += other.coeffs
        return Poly2D(c, self.origin, self.scale)

    def __mul__(self, a: float) -> Poly2D:
        return Poly2D(self.coeffs * float(a), self.origin, self.scale)

    __rmul__ = __mul__

    def __repr__(self):
        return f"Poly2D(nx={self.nx}, ny={self.ny}, origin={self.origin}, scale={self.scale})"


def evaluate(p: Poly2D, x, y, dx_order: int = 0, dy_order: int = 0):
    return p.eval(x, y, dx_order, dy_order)


@dataclass(frozen=True)
class BasisList:
    """Ordered polynomials spanning a space labelled ``Pk``, ``Qk`` or ``Vk``."""

    polys: tuple[Poly2D, ...]
    label: str
    degree: int

    def __len__(self):
        return len(self.polys)

    def __getitem__(self, i):
        return self.polys[i]

    def __iter__(self):
        return iter(self.polys)


def pk_exponents(k: int) -> list[tuple[int, int]]:
    """Graded lexicographic exponents of P_k: degree by degree, x-power descending."""
    return [(d - j, j) for d in range(k + 1) for j in range(d + 1)]


def qk_exponents(k: int) -> list[tuple[int, int]]:
    """Row-major exponents ``(i, j)`` of Q_k."""
    return [(i, j) for i in range(k + 1) for j in range(k + 1)]


def monomial_basis(space: str, k: int, frame=IDENTITY_FRAME) -> BasisList:
    """Monomial basis of ``P_k`` or ``Q_k``, zero-padded to a ``(k+1, k+1)`` grid.

    >>> [p.coeffs.nonzero() for p in monomial_basis("Qk", 1)][3]
    (array([1]), array([1]))
    """
    if k < 0:
        raise ValueError("degree must be non-negative")
    if space == "Pk":
        exps = pk_exponents(k)
    elif space == "Qk":
        exps = qk_exponents(k)
    else:
        raise ValueError(f"unknown space {space!r}; expected 'Pk' or 'Qk'")
    origin, scale = frame
    polys = []
    for i, j in exps:
        c = np.zeros((k + 1, k + 1))
        c[i, j] = 1.0
        polys.append(Poly2D(c, origin, scale))
    return BasisList(tuple(polys), space, k)


def linear_combination(coeffs: Sequence[float], basis) -> Poly2D:
    """Return ``sum(coeffs[m] * basis[m])`` as a single coefficient grid."""
    polys = list(basis)
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (len(polys),):
        raise ValueError(
            f"got {coeffs.size} coefficients for a basis of length {len(polys)}"
        )
    if not polys:
        raise ValueError("empty basis")
    first = polys[0]
    shape = np.max([p.coeffs.shape for p in polys], axis=0)
    c = np.zeros(shape)
    for a, p in zip(coeffs, polys):
        first._check_frame(p)
        c[: p.nx + 1, : p.ny + 1] += a * p.coeffs
    return Poly2D(c, first.origin, first.scale)


def stack_coeffs(polys: Sequence[Poly2D], k: int) -> np.ndarray:
    """Pack polynomials into an array of shape ``(len(polys), k+1, k+1)``."""
    out = np.zeros((len(polys), k + 1, k + 1))
    for m, p in enumerate(polys):
        out[m, : p.nx + 1, : p.ny + 1] = p.coeffs
    return out


def tabulate(stack: np.ndarray, frame, x, y, dx: int = 0, dy: int = 0, dtype=float) -> np.ndarray:
    """Evaluate many polynomials sharing one frame at many points.

    Args:
        stack: coefficient grids, shape ``(m, a, b)``.
        frame: ``((x0, y0), (sx, sy))``.
        x, y: 1D point coordinates of equal length ``npts``.
        dtype: result type; the sums are always formed in extended precision.

    Returns:
        Array of shape ``(m, npts)``.
    """
    (x0, y0), (sx, sy) = frame
    c = np.asarray(stack).astype(EXTENDED)
    npts = np.size(x)
    a, b = c.shape[1], c.shape[2]
    if dx:
        if dx >= a:
            return np.zeros((c.shape[0], npts), dtype=dtype)
        f = np.array([_falling(i + dx, dx) for i in range(a - dx)]) / sx**dx
        c = c[:, dx:, :] * f.astype(EXTENDED)[None, :, None]
    if dy:
        if dy >= b:
            return np.zeros((c.shape[0], npts), dtype=dtype)
        f = np.array([_falling(j + dy, dy) for j in range(b - dy)]) / sy**dy
        c = c[:, :, dy:] * f.astype(EXTENDED)[None, None, :]
    xi = (np.ravel(np.asarray(x)).astype(EXTENDED) - x0) / sx
    eta = (np.ravel(np.asarray(y)).astype(EXTENDED) - y0) / sy
    vx = xi[:, None] ** np.arange(c.shape[1])
    vy = eta[:, None] ** np.arange(c.shape[2])
    out = np.einsum("mij,pj->mip", c, vy)
    out = np.einsum("pi,mip->mp", vx, out)
    return out.astype(dtype)
