"""Two-stage least-squares finite elements for 2D elliptic equations in
non-divergence form A : D2u = f.

Stage 1 approximates the gradient in a piecewise-irrotational
discontinuous space; stage 2 recovers the scalar unknown in a continuous
Lagrange space.  The stage-1 residual doubles as an a-posteriori error
estimator driving adaptive longest-edge bisection.
"""

from ._kernels import BACKEND, HAVE_COMPILED
from .adapt import AdaptConfig, EstimatorField, adapt_loop, dorfler_mark, estimate
from .assembly import (
    ErrorNorms,
    SolverConfig,
    SparseSpdSystem,
    assemble_p,
    assemble_u,
    error_norms,
    functional_p,
    functional_u,
    solve_two_stage,
)
from .errors import (
    IllConditionedBasisError,
    NdfemError,
    NonConvergenceError,
    NotEllipticError,
    RefinementError,
)
from .linsolve import SolveStats, cg_solve
from .mesh import Mesh, bisect, boundary_edges, build_rect_mesh, interior_edges
from .problems import CordesReport, ProblemCase, case, cordes_check
from .quadrature import QuadratureRule, edge_rule, triangle_rule
from .spaces import (
    DiscreteGradientField,
    DiscreteScalarField,
    IrrotationalBasis,
    LagrangeSpace,
    basis_dimension,
    irrot_eval,
    irrotational_basis,
    l2_project,
    lagrange_eval,
    lagrange_space,
)
from .vtkio import write_vtk

__version__ = "0.1.0"

__all__ = [
    "AdaptConfig",
    "BACKEND",
    "CordesReport",
    "DiscreteGradientField",
    "DiscreteScalarField",
    "ErrorNorms",
    "EstimatorField",
    "HAVE_COMPILED",
    "IllConditionedBasisError",
    "IrrotationalBasis",
    "LagrangeSpace",
    "Mesh",
    "NdfemError",
    "NonConvergenceError",
    "NotEllipticError",
    "ProblemCase",
    "QuadratureRule",
    "RefinementError",
    "SolveStats",
    "SolverConfig",
    "SparseSpdSystem",
    "adapt_loop",
    "assemble_p",
    "assemble_u",
    "basis_dimension",
    "bisect",
    "boundary_edges",
    "build_rect_mesh",
    "case",
    "cg_solve",
    "cordes_check",
    "dorfler_mark",
    "edge_rule",
    "error_norms",
    "estimate",
    "functional_p",
    "functional_u",
    "interior_edges",
    "irrot_eval",
    "irrotational_basis",
    "l2_project",
    "lagrange_eval",
    "lagrange_space",
    "solve_two_stage",
    "triangle_rule",
    "write_vtk",
]
