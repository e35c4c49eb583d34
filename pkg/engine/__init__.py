"""
FermiSplit - Engine Module
Numerical core for reducibility of bilayer periodic quantum graphs
"""

from .errors import (FermiSplitError, ValidationError, DomainError, SchemaError, PreconditionError,
                     NotSameClassError, NotABranchPointError, RamificationError, ShapeError,
                     DimensionError, LaurentError, PoleError, NumericalError,
                     NumericalOverflowError, ContinuationError)
from .potential import Potential, PotentialKind, builtin_potential, BUILTIN_POTENTIAL_NAMES
from .roots import ComplexRegion, find_roots
from .edge_spectral import (EdgeSpectral, edge_data, transfer_matrix, dtn_matrix, a_function,
                            b_function, dirichlet_eigenvalues, same_asymmetry_class)
from .riemann import BranchPoint, branch_points, continue_mu, eigenprojection, mu_branches
from .laurent import LaurentPoly, LaurentMatrix, lp_add, lp_mul, lp_eval, lp_det, lp_residual
from .graph_model import (PeriodicGraph, BilayerSpec, Vertex, Edge, DanglingEdge, EndCondition,
                          build_bilayer, build_decorated_layer, builtin_graph, BUILTIN_GRAPHS,
                          dirichlet_guard_check)
from .floquet import FloquetMatrix, reduced_matrix, dispersion_poly, fermi_slice
from .reducibility import (FactorReport, factor_same_class, DecoratedReport, decorated_equivalence,
                           GrapheneReport, graphene_reduction, f_zeta_points, f_zero_intersection,
                           composite_partner, Square7Report, square7_discriminant)
from .sweep_engine import SweepEngine, SweepPoint, PointStatus, calculate_optimal_workers

__all__ = [
    'FermiSplitError', 'ValidationError', 'DomainError', 'SchemaError', 'PreconditionError',
    'NotSameClassError', 'NotABranchPointError', 'RamificationError', 'ShapeError',
    'DimensionError', 'LaurentError', 'PoleError', 'NumericalError', 'NumericalOverflowError',
    'ContinuationError',
    'Potential', 'PotentialKind', 'builtin_potential', 'BUILTIN_POTENTIAL_NAMES',
    'ComplexRegion', 'find_roots',
    'EdgeSpectral', 'edge_data', 'transfer_matrix', 'dtn_matrix', 'a_function', 'b_function',
    'dirichlet_eigenvalues', 'same_asymmetry_class',
    'BranchPoint', 'branch_points', 'continue_mu', 'eigenprojection', 'mu_branches',
    'LaurentPoly', 'LaurentMatrix', 'lp_add', 'lp_mul', 'lp_eval', 'lp_det', 'lp_residual',
    'PeriodicGraph', 'BilayerSpec', 'Vertex', 'Edge', 'DanglingEdge', 'EndCondition',
    'build_bilayer', 'build_decorated_layer', 'builtin_graph', 'BUILTIN_GRAPHS',
    'dirichlet_guard_check',
    'FloquetMatrix', 'reduced_matrix', 'dispersion_poly', 'fermi_slice',
    'FactorReport', 'factor_same_class', 'DecoratedReport', 'decorated_equivalence',
    'GrapheneReport', 'graphene_reduction', 'f_zeta_points', 'f_zero_intersection',
    'composite_partner', 'Square7Report', 'square7_discriminant',
    'SweepEngine', 'SweepPoint', 'PointStatus', 'calculate_optimal_workers',
]
