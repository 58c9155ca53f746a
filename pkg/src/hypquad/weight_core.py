"""Generalized Laguerre / Laplace weights and weighted Sobolev norms.

The univariate weight is

    w_r(x) = |x|^(alpha + r/2) * exp(-a|x| + b)

on the half-line (Laguerre) or the whole line (Laplace), and the d-variate
weight is the tensor product over coordinates.  Rules and polynomials are
always built for the canonical case a=1, b=0; :class:`CanonicalMap` carries
general (a, b) back.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.special import gamma

if TYPE_CHECKING:
    from hypquad.testbed import Integrand


class Domain(str, enum.Enum):
    HALF_LINE = "half"
    FULL_LINE = "full"


class UnboundedEstimateError(ArithmeticError):
    """The tail of a weighted norm integral did not decay within the cut-off."""


@dataclass(frozen=True)
class WeightParams:
    alpha: float = 0.0
    a: float = 1.0
    b: float = 0.0
    r: int = 0
    domain: Domain = Domain.HALF_LINE
    d: int = 1

    def __post_init__(self):
        if not self.alpha > -1:
            raise ValueError(f"alpha must be > -1, got {self.alpha}")
        if not self.a > 0:
            raise ValueError(f"a must be > 0, got {self.a}")
        if int(self.r) != self.r or self.r < 0:
            raise ValueError(f"r must be a non-negative integer, got {self.r}")
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d}")
        object.__setattr__(self, "domain", Domain(self.domain))

    @property
    def canonical(self) -> bool:
        return self.a == 1.0 and self.b == 0.0

    def canonical_map(self) -> CanonicalMap:
        return CanonicalMap.for_weight(self)


@dataclass(frozen=True)
class CanonicalMap:
    """Substitution t = scale * x reducing (a, b) to (1, 0), per coordinate."""

    scale: float
    integral_factor: float

    @classmethod
    def for_weight(cls, p: WeightParams) -> CanonicalMap:
        expo = p.alpha + p.r / 2 + 1
        return cls(scale=p.a, integral_factor=math.exp(p.b) / p.a**expo)

    def to_canonical(self, x):
        return np.asarray(x, dtype=float) * self.scale

    def from_canonical(self, t):
        return np.asarray(t, dtype=float) / self.scale


def _as_points(x, d: int):
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 0 or (arr.ndim == 1 and d > 1)
    pts = arr.reshape(-1, d)
    if arr.ndim == 1 and d > 1 and arr.shape[0] != d:
        raise ValueError(f"a point must have {d} coordinates, got {arr.shape[0]}")
    return pts, single


def eval_weight(p: WeightParams, x, use_r: bool = False):
    """Evaluate the tensor weight at one point or a batch of points.

    ``x`` may be a scalar (d=1), a length-d vector (one point), a 1-D array of
    abscissae (d=1) or an (N, d) array.  A single point returns a float.
    """
    pts, single = _as_points(x, p.d)
    expo = p.alpha + (p.r / 2 if use_r else 0.0)
    if p.domain is Domain.HALF_LINE and np.any(pts < 0):
        raise ValueError("negative coordinate on the half-line domain")
    ax = np.abs(pts)
    if expo < 0 and np.any(ax == 0):
        raise ZeroDivisionError(f"weight has a pole at zero (exponent {expo})")
    with np.errstate(divide="ignore"):
        logpow = expo * np.log(ax) if expo != 0 else np.zeros_like(ax)
    logw = (logpow - p.a * ax + p.b).sum(axis=1)
    vals = np.exp(logw)
    return float(vals[0]) if single else vals


def moment0(p: WeightParams) -> float:
    """Total mass of the univariate weight w (r = 0)."""
    m = math.exp(p.b) * gamma(p.alpha + 1) / p.a ** (p.alpha + 1)
    return 2 * m if p.domain is Domain.FULL_LINE else m


# -- numerical weighted Sobolev norms ---------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(32)


def _panel_rule(breaks: np.ndarray):
    a, b = breaks[:-1], breaks[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return x, w


def _halfline_breaks(p: WeightParams, resolution: int):
    cutoff = 4 * resolution + 50 * max(1.0, p.alpha)
    # geometric grading towards the algebraic endpoint singularity, then
    # uniform panels; the kink of max(0, x-1)^r sits on a breakpoint
    graded = 2.0 ** np.arange(-40, 1)
    uniform = np.linspace(1.0, cutoff, max(resolution, 1) * 8 + 1)
    return np.concatenate([[0.0], graded, uniform[1:]]) / p.a, cutoff / p.a


def _axis_rule(p: WeightParams, resolution: int, support=None):
    """Quadrature on one axis for integrals against w_r (weight folded in)."""
    if support is not None:
        lo, hi = support
        breaks = np.linspace(lo, hi, resolution + 1)
        x, w = _panel_rule(breaks)
        tail_mask = np.zeros(x.shape, dtype=bool)
    else:
        breaks, cutoff = _halfline_breaks(p, resolution)
        x, w = _panel_rule(breaks)
        tail_mask = x >= breaks[-2]
        if p.domain is Domain.FULL_LINE:
            x = np.concatenate([-x[::-1], x])
            w = np.concatenate([w[::-1], w])
            tail_mask = np.concatenate([tail_mask[::-1], tail_mask])
    one = WeightParams(alpha=p.alpha, a=p.a, b=p.b, r=p.r, domain=p.domain, d=1)
    ww = w * eval_weight(one, x.reshape(-1, 1), use_r=True)
    return x, ww, tail_mask


def sobolev_norm_estimate(f: Integrand, p: WeightParams, resolution: int = 8) -> float:
    """Sum over |k|_inf <= r of the L_{1,w_r} norms of D^k f.

    Separable integrands are handled one axis at a time (the d-dimensional
    sum factorizes); others use a dense tensor rule, practical for d <= 2.
    Integrands carrying a bounded ``support`` box are integrated over that box
    with ``resolution`` Gauss-Legendre panels per axis.
    """
    if resolution < 1:
        raise ValueError("resolution must be positive")
    if f.arity != p.d:
        raise ValueError(f"integrand arity {f.arity} does not match d={p.d}")
    support = getattr(f, "support", None)

    if f.factors is not None:
        total = 1.0
        one = WeightParams(alpha=p.alpha, a=p.a, b=p.b, r=p.r, domain=p.domain, d=1)
        for i, fac in enumerate(f.factors):
            x, ww, tail = _axis_rule(one, resolution, None if support is None else support[i])
            axis_sum = 0.0
            for k in range(p.r + 1):
                vals = np.abs(fac.derivative(k, x)) * ww
                _check_tail(vals, tail)
                axis_sum += float(np.sum(vals))
            total *= axis_sum
        return total

    rules = [
        _axis_rule(p, resolution, None if support is None else support[i]) for i in range(p.d)
    ]
    grids = np.meshgrid(*[r_[0] for r_ in rules], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    wts = np.ones(pts.shape[0])
    tail = np.zeros(pts.shape[0], dtype=bool)
    for g in np.meshgrid(*[r_[1] for r_ in rules], indexing="ij"):
        wts *= g.ravel()
    for g in np.meshgrid(*[r_[2] for r_ in rules], indexing="ij"):
        tail |= g.ravel()
    total = 0.0
    for k in itertools.product(range(p.r + 1), repeat=p.d):
        vals = np.abs(f.derivative(k, pts)) * wts
        _check_tail(vals, tail)
        total += float(np.sum(vals))
    return total


def _check_tail(vals: np.ndarray, tail: np.ndarray) -> None:
    body = float(np.sum(vals))
    if not math.isfinite(body):
        raise UnboundedEstimateError("non-finite weighted norm")
    tail_part = float(np.sum(vals[tail]))
    if tail_part > 1e-8 * max(body, 1e-300):
        raise UnboundedEstimateError(
            f"tail contribution {tail_part:.3e} has not decayed (total {body:.3e})"
        )
