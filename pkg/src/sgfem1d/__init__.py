"""Generalized and stable generalized finite elements on the unit interval.

Hat-function partition of unity, locally enriched trial spaces, banded
no-pivot elimination and extreme-eigenvalue estimates for conditioning
studies.
"""

from .assembly import GlobalSpace, GlobalSystem, LoadSpec, assemble, build_space, element_stiffness
from .coefficient import CoefficientFn, constant, piecewise
from .enrichment import (EnrichmentFunction, LocalSpace, heaviside_space, interface_space, modify,
                         polynomial_space, power_space, singular_space)
from .linalg import (EPS, BandedSymMatrix, band_lu_nopivot, bauer_binary_solve, extreme_eigs, scaled_matrix,
                     solve)
from .mesh import Mesh, hat_eval, patch, uniform_mesh
from .problems import KINDS, Problem, energy_error, make_problem
from .quadrature import QuadRule, integrate
from .studies import (build_system, condition_study, convergence_study, emit_csv, emit_svg_loglog, eta_study,
                      solve_problem)

__all__ = [
    "EPS", "KINDS", "BandedSymMatrix", "CoefficientFn", "EnrichmentFunction", "GlobalSpace", "GlobalSystem",
    "LoadSpec", "LocalSpace", "Mesh", "Problem", "QuadRule", "assemble", "band_lu_nopivot",
    "bauer_binary_solve", "build_space", "build_system", "condition_study", "constant", "convergence_study",
    "element_stiffness", "emit_csv", "emit_svg_loglog", "energy_error", "eta_study", "extreme_eigs",
    "hat_eval", "heaviside_space", "integrate", "interface_space", "make_problem", "modify", "patch",
    "piecewise", "polynomial_space", "power_space", "scaled_matrix", "singular_space", "solve",
    "solve_problem", "uniform_mesh",
]
