"""Manufactured solutions, error norms, convergence studies and reports."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import assembly
from .linalg import spd_solve
from .mesh import GlobalDofMap, MeshTopology, build_dof_map, build_mesh, rectangular_mesh
from .poly2d import Poly2D
from .quadrature import gauss1d, tensor_rule
from .ref_element import (
    BFS,
    EDGES,
    SERENDIPITY,
    VERTICES,
    ElementBasis,
    build_element,
    interpolant,
    local_interpolate,
    unisolvence_report,
)

log = logging.getLogger(__name__)

PI = math.pi


@dataclass(frozen=True)
class ManufacturedSolution:
    """Separable ``u(x, y) = g(x) g(y)`` with ``g`` given with derivatives up to 4.

    ``profile(t, d)`` returns the ``d``-th derivative of ``g``.
    """

    name: str
    profile: Callable[[np.ndarray, int], np.ndarray]

    def derivative(self, x, y, dx: int = 0, dy: int = 0):
        return self.profile(np.asarray(x, dtype=float), dx) * self.profile(np.asarray(y, dtype=float), dy)

    __call__ = derivative

    def u(self, x, y):
        return self.derivative(x, y)

    def f(self, x, y):
        """``lap^2 u = u_xxxx + 2 u_xxyy + u_yyyy``."""
        g = self.profile
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return g(x, 4) * g(y, 0) + 2.0 * g(x, 2) * g(y, 2) + g(x, 0) * g(y, 4)


def _sin2(t, d):
    # g = sin^2(pi t) = (1 - cos(2 pi t)) / 2
    w = 2.0 * PI * t
    if d == 0:
        return np.sin(PI * t) ** 2
    c = 0.5 * (2.0 * PI) ** d
    return c * [np.sin(w), np.cos(w), -np.sin(w), -np.cos(w)][(d - 1) % 4]


def _quartic_bubble(t, d):
    # g = t^2 (1 - t)^2 = t^2 - 2 t^3 + t^4
    return [
        t**2 - 2 * t**3 + t**4,
        2 * t - 6 * t**2 + 4 * t**3,
        2 - 12 * t + 12 * t**2,
        -12 + 24 * t,
        np.full_like(t, 24.0),
    ][d] if d <= 4 else np.zeros_like(t)


def manufactured() -> ManufacturedSolution:
    """``u = sin^2(pi x) sin^2(pi y)``, clamped on the unit square."""
    return ManufacturedSolution("sin2", _sin2)


def polynomial_solution() -> ManufacturedSolution:
    """``u = x^2 (1-x)^2 y^2 (1-y)^2``, which lies in Q_4 and in P_8."""
    return ManufacturedSolution("quartic-bubble", _quartic_bubble)


def norm_rule(k: int):
    return tensor_rule(gauss1d(k + 6))


def error_norms(u_h, exact, mesh: MeshTopology, dofmap: GlobalDofMap, element: ElementBasis, rule=None):
    """L2 norm and H2 seminorm of ``exact - u_h``.

    The H2 seminorm counts the mixed derivative twice.  ``exact`` may be a
    :class:`ManufacturedSolution` or any ``callable(x, y, dx, dy)``.
    """
    rule = norm_rule(element.degree) if rule is None else rule
    w = assembly.cell_coefficients(mesh, dofmap, element, np.asarray(u_h, dtype=float))
    hx, hy = mesh.hx, mesh.hy
    org = mesh.cell_origin()
    X = org[:, 0:1] + hx * rule.x[None, :]
    Y = org[:, 1:2] + hy * rule.y[None, :]
    wts = rule.weights * hx * hy
    deriv = exact.derivative if hasattr(exact, "derivative") else exact

    def err(dx, dy):
        tab = element.tabulate(rule.x, rule.y, dx, dy) / (hx**dx * hy**dy)
        return np.asarray(deriv(X, Y, dx, dy), dtype=float) - w @ tab

    l2 = np.sum(err(0, 0) ** 2 * wts)
    h2 = np.sum((err(2, 0) ** 2 + 2.0 * err(1, 1) ** 2 + err(0, 2) ** 2) * wts)
    return float(np.sqrt(l2)), float(np.sqrt(h2))


def interpolate_global(mesh, dofmap, element, target) -> np.ndarray:
    """Global nodal interpolant: every DOF evaluated on ``target(x, y, dx, dy)``."""
    u = np.zeros(dofmap.ndofs)
    for c in range(mesh.num_cells):
        u[dofmap.cell_dofs[c]] = local_interpolate(element, target, mesh.cell_rect(c))
    return u


@dataclass
class StudyRow:
    grid: int
    n: int
    dim: int
    l2_error: float = float("nan")
    l2_order: float | None = None
    h2_error: float = float("nan")
    h2_order: float | None = None
    residual: float = float("nan")
    free: int = 0
    seconds: float = 0.0
    error: str | None = None

    def as_dict(self):
        def num(v):
            return None if v is None or (isinstance(v, float) and not math.isfinite(v)) else v

        d = {
            "grid": self.grid,
            "n": self.n,
            "dim": self.dim,
            "l2_error": num(self.l2_error),
            "l2_order": num(self.l2_order),
            "h2_error": num(self.h2_error),
            "h2_order": num(self.h2_order),
            "residual": num(self.residual),
        }
        if self.error:
            d["error"] = self.error
        return d


@dataclass
class ConvergenceReport:
    element: str
    degree: int
    quad_order: int
    solver: str
    rows: list[StudyRow] = field(default_factory=list)
    solution: str = "sin2"

    def fill_orders(self):
        prev = None
        for row in self.rows:
            if prev is None or prev.grid != row.grid - 1:
                row.l2_order = row.h2_order = None
            else:
                row.l2_order = _order(prev.l2_error, row.l2_error)
                row.h2_order = _order(prev.h2_error, row.h2_error)
            prev = row

    def as_dict(self):
        return {
            "element": self.element,
            "degree": self.degree,
            "quad_order": self.quad_order,
            "solver": self.solver,
            "rows": [r.as_dict() for r in self.rows],
        }


def _order(e_prev, e_cur):
    if not (e_prev > 0 and e_cur > 0):
        return None
    return math.log2(e_prev / e_cur)


def solve_grid(flavor, k, mesh, solution, quad=None, solver="cholesky"):
    """Assemble, solve and measure one mesh; returns ``(u, dofmap, element, system, result)``."""
    element = build_element(k, flavor)
    dofmap = build_dof_map(mesh, k, flavor)
    rule = tensor_rule(gauss1d(quad)) if quad else None
    system = assembly.assemble(mesh, dofmap, element, solution.f, rule)
    result = spd_solve(system.matrix, system.rhs, solver, system.matrix_ext, system.rhs_ext)
    return system.expand(result.x), dofmap, element, system, result


def run_study(flavor: str, k: int, grids, quad: int | None = None, solver: str = "cholesky",
              solution: ManufacturedSolution | None = None) -> ConvergenceReport:
    """Solve on each grid level and tabulate errors, orders and dimensions."""
    solution = manufactured() if solution is None else solution
    report = ConvergenceReport(flavor, k, quad or k + 2, solver, solution=solution.name)
    for g in grids:
        mesh = build_mesh(g)
        row = StudyRow(g, mesh.nx, build_dof_map(mesh, k, flavor).ndofs)
        t0 = time.perf_counter()
        try:
            u, dofmap, element, system, result = solve_grid(flavor, k, mesh, solution, quad, solver)
            row.free = system.size
            row.residual = result.residual
            row.l2_error, row.h2_error = error_norms(u, solution, mesh, dofmap, element)
        except (np.linalg.LinAlgError, RuntimeError, ValueError) as exc:
            log.warning("%s k=%d grid %d failed: %s", flavor, k, g, exc)
            row.error = f"{type(exc).__name__}: {exc}"
        row.seconds = time.perf_counter() - t0
        report.rows.append(row)
        log.info("%s k=%d grid %d: dim %d, L2 %.3e, H2 %.3e (%.2fs)", flavor, k, g,
                 row.dim, row.l2_error, row.h2_error, row.seconds)
    report.fill_orders()
    return report


DEFAULT_GRIDS = {4: (1, 5), 5: (1, 5), 6: (1, 5), 7: (1, 5), 8: (1, 4)}


def default_grids(k: int) -> range:
    lo, hi = DEFAULT_GRIDS.get(k, (1, 4))
    return range(lo, hi + 1)


def _sci3(v: float) -> str:
    """``0.375E+00`` style: three significant digits, mantissa in [0.1, 1)."""
    if v is None or not math.isfinite(v):
        return "        -"
    if v == 0:
        return "0.000E+00"
    e = math.floor(math.log10(abs(v))) + 1
    m = v / 10**e
    if round(abs(m), 3) >= 1.0:
        m /= 10
        e += 1
    return f"{m:.3f}E{e:+03d}".replace("0.", "0.", 1)


TITLES = {BFS: "C1-Q{k} BFS element", SERENDIPITY: "C1-P{k} serendipity element"}


def format_table(report: ConvergenceReport) -> str:
    lines = [
        f"# {TITLES.get(report.element, report.element).format(k=report.degree)}",
        f"{'grid':>4} | {'L2 error':>10} {'order':>5} | {'H2 error':>10} {'order':>5} | {'dim':>8}",
    ]
    for r in report.rows:
        l2o = 0.0 if r.l2_order is None else r.l2_order
        h2o = 0.0 if r.h2_order is None else r.h2_order
        lines.append(
            f"{r.grid:>4} | {_sci3(r.l2_error):>10} {l2o:5.1f} | "
            f"{_sci3(r.h2_error):>10} {h2o:5.1f} | {r.dim:>8}"
        )
    return "\n".join(lines) + "\n"


CSV_FIELDS = ["grid", "n", "dim", "l2_error", "l2_order", "h2_error", "h2_order", "residual"]


def format_csv(report: ConvergenceReport) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in report.rows:
        d = r.as_dict()
        w.writerow({k: ("" if d[k] is None else repr(d[k]) if isinstance(d[k], float) else d[k])
                    for k in CSV_FIELDS})
    return buf.getvalue()


def format_json(report: ConvergenceReport) -> str:
    return json.dumps(report.as_dict(), indent=2) + "\n"


FORMATTERS = {"table": format_table, "csv": format_csv, "json": format_json}


def emit_report(report: ConvergenceReport, fmt: str = "table", destination=None) -> str:
    """Render ``report`` and write it to ``destination`` (path, file or stdout)."""
    try:
        text = FORMATTERS[fmt](report)
    except KeyError:
        raise ValueError(f"unknown report format {fmt!r}") from None
    if destination is None:
        sys.stdout.write(text)
    elif hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w") as fh:
            fh.write(text)
    return text


# -- element certificates -----------------------------------------------------

DUALITY_TOL = 1e-8
REPRODUCTION_TOL = 1e-8
TRACE_TOL = 1e-8
AUDIT_TOL = 1e-9


@dataclass
class Check:
    name: str
    flavor: str
    degree: int
    passed: bool
    value: float
    limit: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.flavor:<11} k={self.degree:<2} {self.name:<22} {self.value:.3e} (limit {self.limit:.0e})"


def reproduction_error(element: ElementBasis, rng: np.random.Generator, trials: int = 20, npts: int = 50) -> float:
    """Worst relative sup error when interpolating random members of P_k (or Q_k)."""
    k = element.degree
    worst = 0.0
    x, y = rng.random(npts), rng.random(npts)
    for _ in range(trials):
        c = rng.uniform(-1, 1, (k + 1, k + 1))
        if element.flavor == SERENDIPITY:
            c[np.add.outer(np.arange(k + 1), np.arange(k + 1)) > k] = 0.0
        p = Poly2D(c)
        q = interpolant(element, local_interpolate(element, p))
        ref = p(x, y)
        worst = max(worst, np.abs(q(x, y) - ref).max() / np.abs(ref).max())
    return worst


def edge_trace_error(element: ElementBasis, samples: int = 41) -> float:
    """Largest value or normal-derivative trace of a shape function on an edge
    whose closed edge carries none of its DOF."""
    t = np.linspace(0.0, 1.0, samples)
    worst = 0.0
    for e, (a, b, normal) in enumerate(EDGES):
        pa, pb = np.array(VERTICES[a]), np.array(VERTICES[b])
        pts = (1 - t)[:, None] * pa + t[:, None] * pb
        on_edge = [
            (d.entity == ("vertex", a)) or (d.entity == ("vertex", b))
            or (d.entity[0] == "edge" and d.entity[1] == e)
            for d in element.dofs
        ]
        off = ~np.array(on_edge)
        val = element.tabulate(pts[:, 0], pts[:, 1])[off]
        nd = element.tabulate(pts[:, 0], pts[:, 1], *normal.orders)[off]
        worst = max(worst, np.abs(val).max(), np.abs(nd).max())
    return float(worst)


def audit_random(flavor, k, n=2, trials=10, seed=0) -> float:
    """Worst relative C1 jump over random global coefficient vectors."""
    rng = np.random.default_rng(seed)
    mesh = rectangular_mesh(n, n)
    el = build_element(k, flavor)
    dm = build_dof_map(mesh, k, flavor)
    worst = 0.0
    for _ in range(trials):
        u = rng.uniform(-1, 1, dm.ndofs)
        jv, jn = assembly.c1_interface_audit(mesh, dm, el, u)
        worst = max(worst, max(jv, jn) / np.abs(u).max())
    return worst


def verify(degrees, flavors=(BFS, SERENDIPITY), seed: int = 0) -> list[Check]:
    """Run every element certificate; each check carries its measured value."""
    rng = np.random.default_rng(seed)
    checks: list[Check] = []
    for flavor in flavors:
        for k in degrees:
            if flavor == SERENDIPITY and k < 4:
                continue
            rep = unisolvence_report(k, flavor)
            checks.append(Check("unisolvence cond", flavor, k, rep.passed, rep.cond, 1e12))
            if not rep.passed:
                continue
            checks.append(Check("duality", flavor, k, rep.duality_error < DUALITY_TOL,
                                rep.duality_error, DUALITY_TOL))
            el = build_element(k, flavor)
            err = reproduction_error(el, rng)
            checks.append(Check("reproduction", flavor, k, err < REPRODUCTION_TOL, err, REPRODUCTION_TOL))
            tr = edge_trace_error(el)
            checks.append(Check("edge trace", flavor, k, tr < TRACE_TOL, tr, TRACE_TOL))
            jump = audit_random(flavor, k, seed=seed)
            checks.append(Check("C1 audit 2x2", flavor, k, jump < AUDIT_TOL, jump, AUDIT_TOL))
    return checks


def duality_error(element: ElementBasis) -> float:
    return float(np.abs(element.duality_matrix() - np.eye(element.ndofs)).max())
