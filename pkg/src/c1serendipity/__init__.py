"""C1 conforming BFS and serendipity finite elements on rectangular meshes.

The package builds the reference elements from their degrees of freedom,
assembles the clamped biharmonic problem on uniform meshes of the unit square
and measures convergence against a manufactured solution.
"""

from .mesh import build_dof_map, build_mesh, rectangular_mesh
from .ref_element import BFS, SERENDIPITY, build_element, unisolvence_report
from .study import manufactured, run_study, verify

__all__ = [
    "BFS",
    "SERENDIPITY",
    "build_dof_map",
    "build_element",
    "build_mesh",
    "manufactured",
    "rectangular_mesh",
    "run_study",
    "unisolvence_report",
    "verify",
]

__version__ = "0.1.0"
