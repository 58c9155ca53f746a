"""Sparse Gauss-Laguerre quadrature on step hyperbolic crosses.

Half-line weight x^alpha e^(-x), its Laplace counterpart on the full line,
tensor/sparse grids built from truncated rules, and fooling-function lower
bounds for the worst-case error.
"""
from hypquad.orthopoly import EigenSolverError, Rule1D, RuleKind, gauss_rule, jacobi_matrix
from hypquad.quad1d import LevelFamily, TruncationPolicy, symmetrized_rule, truncated_rule, truncation_index
from hypquad.smolyak import (
    BudgetExceededError,
    IntegrandEvaluationError,
    SparseGrid,
    apply,
    build_grid,
    count_points,
    idealized_count,
    select_xi,
)
from hypquad.testbed import CertificationError, FoolingCertificate, Integrand, make_fooling, registry
from hypquad.weight_core import Domain, UnboundedEstimateError, WeightParams, eval_weight, sobolev_norm_estimate

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError",
    "CertificationError",
    "Domain",
    "EigenSolverError",
    "FoolingCertificate",
    "Integrand",
    "IntegrandEvaluationError",
    "LevelFamily",
    "Rule1D",
    "RuleKind",
    "SparseGrid",
    "TruncationPolicy",
    "UnboundedEstimateError",
    "WeightParams",
    "apply",
    "build_grid",
    "count_points",
    "eval_weight",
    "gauss_rule",
    "idealized_count",
    "jacobi_matrix",
    "make_fooling",
    "registry",
    "select_xi",
    "sobolev_norm_estimate",
    "symmetrized_rule",
    "truncated_rule",
    "truncation_index",
]
