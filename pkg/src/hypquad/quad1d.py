"""Truncated Gauss-Laguerre rules and the dyadic level family.

For a fixed 0 < theta < 1, j(m) is the number of zeros x_{m,k} <= 4 theta m.
The truncated rule keeps those j(m) nodes with their Gauss weights; the
symmetrized rule mirrors them onto the negative axis for the Laplace weight.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from hypquad.orthopoly import (
    MAX_ORDER,
    Rule1D,
    RuleKind,
    count_zeros_below,
    gauss_rule,
)
from hypquad.weight_core import Domain

DEFAULT_THETA = 0.25
THETA_RANGE = (0.05, 0.95)

# Sturm counts are trusted unless a zero sits this close (relatively) to the
# threshold; then the refined nodes decide
_TIE_BAND = 1e-9


class EmptyRuleError(ValueError):
    """No zero of p_m lies below the truncation threshold."""


@dataclass(frozen=True)
class TruncationPolicy:
    theta: float = DEFAULT_THETA

    def __post_init__(self):
        lo, hi = THETA_RANGE
        if not lo < self.theta < hi:
            raise ValueError(f"theta must lie in ({lo}, {hi}), got {self.theta}")

    def threshold(self, m: int) -> float:
        return 4.0 * self.theta * m


def _threshold(m: int, theta: float) -> float:
    if not 0 < theta < 1:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    return 4.0 * theta * m


def truncation_index(m: int, theta: float = DEFAULT_THETA, alpha: float = 0.0) -> int:
    """j(m) = max{j : x_{m,j} <= 4 theta m}, 0 if no zero qualifies."""
    t = _threshold(m, theta)
    lo = count_zeros_below(m, alpha, t * (1 - _TIE_BAND))
    hi = count_zeros_below(m, alpha, t * (1 + _TIE_BAND))
    if lo == hi:
        return lo
    nodes = gauss_rule(m, alpha).nodes
    return int(np.searchsorted(nodes, t, side="right"))


def truncated_rule(m: int, alpha: float = 0.0, theta: float = DEFAULT_THETA) -> Rule1D:
    j = truncation_index(m, theta, alpha)
    if j == 0:
        raise EmptyRuleError(f"no zero of p_{m} (alpha={alpha}) lies below {4 * theta * m}")
    full = gauss_rule(m, alpha)
    return Rule1D(
        m=m,
        nodes=full.nodes[:j],
        weights=full.weights[:j],
        kind=RuleKind.TRUNCATED,
        theta=theta,
        alpha=alpha,
    )


def symmetrize(half: Rule1D) -> Rule1D:
    x, lam = half.nodes, half.weights
    return Rule1D(
        m=half.m,
        nodes=np.concatenate([-x[::-1], x]),
        weights=np.concatenate([lam[::-1], lam]),
        kind=RuleKind.SYMMETRIZED,
        theta=half.theta,
        alpha=half.alpha,
    )


def symmetrized_rule(m: int, alpha: float = 0.0, theta: float = DEFAULT_THETA) -> Rule1D:
    return symmetrize(truncated_rule(m, alpha, theta))


@dataclass
class LevelFamily:
    """Level k holds the truncated rule of the largest order m_k with j(m_k) <= 2^k.

    On the full line level k is the mirror image of the half-line level k, so
    it carries 2 j(m_k) <= 2^(k+1) nodes.  Rules are memoized per level.
    """

    policy: TruncationPolicy = field(default_factory=TruncationPolicy)
    alpha: float = 0.0
    domain: Domain = Domain.HALF_LINE
    _orders: dict = field(default_factory=dict, init=False, repr=False)
    _rules: dict = field(default_factory=dict, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def __post_init__(self):
        self.domain = Domain(self.domain)
        if not self.alpha > -1:
            raise ValueError(f"alpha must be > -1, got {self.alpha}")

    @property
    def theta(self) -> float:
        return self.policy.theta

    def j(self, m: int) -> int:
        return truncation_index(m, self.theta, self.alpha)

    def budget(self, k: int) -> int:
        """Maximal node count of level k."""
        return 2**k if self.domain is Domain.HALF_LINE else 2 ** (k + 1)

    def order(self, k: int) -> int:
        """m_k, found by doubling, bisection and a short upward scan."""
        if k < 0:
            raise ValueError("level must be non-negative")
        with self._lock:
            if k in self._orders:
                return self._orders[k]
        cap = 2**k
        lo = 1
        if k - 1 in self._orders:
            lo = self._orders[k - 1]
        hi = min(max(2 * lo, 2), MAX_ORDER)
        while self.j(hi) <= cap:
            if hi == MAX_ORDER:
                raise ValueError(f"level {k} needs an order beyond the cap {MAX_ORDER}")
            lo = hi
            hi = min(2 * hi, MAX_ORDER)
        # invariant: j(lo) <= cap < j(hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.j(mid) <= cap:
                lo = mid
            else:
                hi = mid
        # j(m) is not proven monotone; look a little further up
        for m in range(lo + 1, min(lo + 3, MAX_ORDER + 1)):
            if self.j(m) <= cap:
                lo = m
        if self.j(lo) == 0:
            raise EmptyRuleError(f"level {k} would be empty for theta={self.theta}")
        with self._lock:
            self._orders.setdefault(k, lo)
            return self._orders[k]

    def rule(self, k: int) -> Rule1D:
        with self._lock:
            cached = self._rules.get(k)
        if cached is not None:
            return cached
        m = self.order(k)
        half = truncated_rule(m, self.alpha, self.theta)
        rule = half if self.domain is Domain.HALF_LINE else symmetrize(half)
        with self._lock:
            return self._rules.setdefault(k, rule)

    def size(self, k: int) -> int:
        n = self.j(self.order(k))
        return n if self.domain is Domain.HALF_LINE else 2 * n


def level_rule(family: LevelFamily, k: int) -> Rule1D:
    return family.rule(k)
