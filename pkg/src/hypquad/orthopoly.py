"""Orthonormal generalized Laguerre polynomials and Gauss-Laguerre rules.

All quantities refer to the canonical weight x^alpha e^{-x} on (0, inf).
The monic recurrence has diagonal 2k + alpha + 1 and off-diagonal
sqrt(k (k + alpha)); zeros of p_m are the eigenvalues of the m x m Jacobi
matrix built from it.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma

from hypquad import _kernels
from hypquad.weight_core import Domain

MAX_ORDER = 32768
NEWTON_ITERATIONS = 5


class EigenSolverError(ArithmeticError):
    """The tridiagonal QL iteration hit its iteration cap."""


class RuleKind(str, enum.Enum):
    FULL = "full"
    TRUNCATED = "truncated"
    SYMMETRIZED = "symmetrized"


@dataclass(frozen=True)
class JacobiMatrix:
    m: int
    diag: np.ndarray
    offdiag: np.ndarray
    alpha: float

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def pairwise_sum(values) -> float:
    """Sum with a fixed binary tree over the given order.

    The tree shape depends only on the length, so the result is reproducible
    regardless of how the values were produced.
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        return 0.0
    while v.size > 1:
        if v.size % 2:
            v = np.append(v, 0.0)
        v = v[0::2] + v[1::2]
    return float(v[0])


@dataclass(frozen=True)
class Rule1D:
    """A one-dimensional rule: ascending nodes with positive Cotes numbers.

    For the symmetrized kind the nodes are +-x_{m,k}, negatives first, and
    :meth:`apply` evaluates the two half-line sums separately so that
    ``Q2TL f == QTL f(+x) + QTL f(-x)`` holds bit for bit.
    """

    m: int
    nodes: np.ndarray
    weights: np.ndarray
    kind: RuleKind = RuleKind.FULL
    theta: float | None = None
    alpha: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "nodes", _readonly(self.nodes))
        object.__setattr__(self, "weights", _readonly(self.weights))
        if self.nodes.shape != self.weights.shape:
            raise ValueError("nodes and weights differ in length")

    def __len__(self) -> int:
        return self.nodes.size

    @property
    def domain(self) -> Domain:
        return Domain.FULL_LINE if self.kind is RuleKind.SYMMETRIZED else Domain.HALF_LINE

    @property
    def half_nodes(self) -> np.ndarray:
        if self.kind is not RuleKind.SYMMETRIZED:
            return self.nodes
        return self.nodes[self.nodes.size // 2:]

    @property
    def half_weights(self) -> np.ndarray:
        if self.kind is not RuleKind.SYMMETRIZED:
            return self.weights
        return self.weights[self.weights.size // 2:]

    def apply(self, f) -> float:
        """Apply the rule to a vectorized univariate callable."""
        if self.kind is RuleKind.SYMMETRIZED:
            x, lam = self.half_nodes, self.half_weights
            plus = pairwise_sum(lam * np.asarray(f(x), dtype=float))
            minus = pairwise_sum(lam * np.asarray(f(-x), dtype=float))
            return plus + minus
        return pairwise_sum(self.weights * np.asarray(f(self.nodes), dtype=float))

    def mass(self) -> float:
        return self.apply(np.ones_like)


def _check_params(m: int, alpha: float) -> None:
    if int(m) != m or m < 1:
        raise ValueError(f"order m must be a positive integer, got {m}")
    if m > MAX_ORDER:
        raise ValueError(f"order m={m} exceeds the cap {MAX_ORDER}")
    if not alpha > -1:
        raise ValueError(f"alpha must be > -1, got {alpha}")


def jacobi_matrix(m: int, alpha: float) -> JacobiMatrix:
    _check_params(m, alpha)
    k = np.arange(m, dtype=float)
    diag = 2 * k + alpha + 1
    kk = np.arange(1, m, dtype=float)
    offdiag = np.sqrt(kk * (kk + alpha))
    return JacobiMatrix(m=m, diag=_readonly(diag), offdiag=_readonly(offdiag), alpha=alpha)


def _p0(alpha: float) -> float:
    return 1.0 / math.sqrt(gamma(alpha + 1))


def eval_orthonormal(m: int, alpha: float, x: float) -> float:
    """p_m(x) for the canonical weight; raises OverflowError past double range."""
    if int(m) != m or m < 0:
        raise ValueError(f"degree must be a non-negative integer, got {m}")
    if not alpha > -1:
        raise ValueError(f"alpha must be > -1, got {alpha}")
    val = _kernels.orthonormal_value(int(m), float(alpha), float(x), _p0(alpha))
    if not math.isfinite(val):
        raise OverflowError(f"p_{m}({x}) overflows; clamp x to (0, 4m + 2alpha + 2)")
    return val


def eigen_rule(m: int, alpha: float):
    """Raw Golub-Welsch output: QL eigenvalues and moment0 * v_1^2, ascending."""
    jm = jacobi_matrix(m, alpha)
    vals, z, ok = _kernels.tridiag_ql(np.array(jm.diag), np.array(jm.offdiag))
    if not ok:
        raise EigenSolverError(f"QL iteration did not converge for m={m}, alpha={alpha}")
    order = np.argsort(vals, kind="stable")
    return vals[order], gamma(alpha + 1) * z[order] ** 2


@functools.lru_cache(maxsize=256)
def gauss_rule(m: int, alpha: float = 0.0) -> Rule1D:
    """m-point Gauss rule for x^alpha e^{-x} on the half-line.

    Nodes come from the QL eigenvalues followed by at most five Newton steps
    on the orthonormal recurrence; Cotes numbers are the Christoffel numbers
    1 / sum_j p_j(x_k)^2 at the refined nodes.
    """
    _check_params(m, alpha)
    nodes, _ = eigen_rule(m, alpha)
    nodes, weights = _kernels.refine_nodes(nodes, float(alpha), _p0(alpha), NEWTON_ITERATIONS)
    if np.any(np.diff(nodes) <= 0):
        raise EigenSolverError(f"refined nodes are not strictly increasing (m={m})")
    return Rule1D(m=m, nodes=nodes, weights=weights, kind=RuleKind.FULL, alpha=alpha)


def count_zeros_below(m: int, alpha: float, threshold: float) -> int:
    """Number of zeros of p_m not exceeding ``threshold`` (Sturm count, O(m))."""
    jm = jacobi_matrix(m, alpha)
    return int(_kernels.sturm_count(np.array(jm.diag), np.array(jm.offdiag), float(threshold)))
