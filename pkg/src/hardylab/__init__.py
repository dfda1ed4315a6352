"""Numerical laboratory for projection bundles, weighted Carleson embeddings,
a Hankel-type bilinear form and Bezout equations on the unit disk."""

__version__ = "0.1.0"

from .kernels import BACKEND
from .disk_core import (PolyVecField, ScalarPoly, build_boundary_quadrature, build_disk_quadrature,
                        boundary_integral, disk_integral, green_residual)
from .projection import curvature, node_geometry, projection
from .correcting import build_correcting_factor, eval_M, make_psi, phi
from .embedding import Workspace, weighted_section_checks, size_condition
from .hankel import estimate_form_norm, eval_form
from .bezout import BezoutProblem, solve, solve_exact, minimize_sup, verify_R
