"""Test integrands and fooling functions.

The registry holds separable integrands with closed-form derivatives and
weighted integrals.  The fooling constructions build, for an arbitrary node
set, a bump-based function of unit weighted Sobolev norm that vanishes at
every node; its weighted integral is a lower bound on the worst-case error of
any quadrature using those nodes.
"""
from __future__ import annotations

import functools
import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy.special import comb, gamma, hyperu

from hypquad.weight_core import Domain, WeightParams, sobolev_norm_estimate

NORM_RESOLUTION = 64


class CertificationError(ArithmeticError):
    """The norm of a fooling function could not be certified."""


# -- integrands ---------------------------------------------------------------


@dataclass(frozen=True)
class Factor1D:
    """A univariate factor: values and derivatives of every order up to r_max."""

    name: str
    derivative: Callable[[int, np.ndarray], np.ndarray]
    exact: float | None = None
    r_max: int = 8

    def __call__(self, x):
        return self.derivative(0, np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Integrand:
    name: str
    arity: int
    factors: tuple[Factor1D, ...] | None = None
    smoothness_class: int = 0
    exact_integral: float | None = None
    provenance: str = ""
    support: tuple[tuple[float, float], ...] | None = None
    _evaluate: Callable | None = field(default=None, repr=False)
    _derivative: Callable | None = field(default=None, repr=False)

    def _points(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float).reshape(-1, self.arity)

    def evaluate(self, x) -> np.ndarray:
        return self.derivative((0,) * self.arity, x)

    __call__ = evaluate

    def derivative(self, k, x) -> np.ndarray:
        k = (k,) if np.isscalar(k) else tuple(k)
        if len(k) != self.arity:
            raise ValueError(f"multi-index {k} does not match arity {self.arity}")
        pts = self._points(x)
        if self.factors is None:
            return np.asarray(self._derivative(k, pts), dtype=float)
        out = np.ones(pts.shape[0])
        for i, (ki, fac) in enumerate(zip(k, self.factors)):
            if ki > fac.r_max:
                raise ValueError(f"{self.name}: derivative order {ki} beyond {fac.r_max}")
            out = out * fac.derivative(ki, pts[:, i])
        return out


def tensor(name: str, factors: Sequence[Factor1D], smoothness: int, provenance: str) -> Integrand:
    exact = None
    if all(f.exact is not None for f in factors):
        exact = math.prod(f.exact for f in factors)
    return Integrand(
        name=name,
        arity=len(factors),
        factors=tuple(factors),
        smoothness_class=smoothness,
        exact_integral=exact,
        provenance=provenance,
    )


def _falling(x: float, j: int) -> float:
    return math.prod(x - i for i in range(j))


def _monomial(deg: int) -> Callable:
    def der(k, x):
        if k > deg:
            return np.zeros_like(x)
        return _falling(deg, k) * x ** (deg - k)

    return der


def _shifted_power(r: int) -> Callable:
    def der(k, x):
        if k > r:
            return np.zeros_like(x)
        return _falling(r, k) * np.maximum(0.0, x - 1.0) ** (r - k) * (x > 1.0)

    return der


def _rational(k, x):
    return (-1.0) ** k * math.factorial(k) / (1.0 + x) ** (k + 1)


def _exponential(k, x):
    return (-1.0) ** k * np.exp(-x)


def _sine(k, x):
    return np.sin(x + k * math.pi / 2)


def _even(der: Callable) -> Callable:
    """f(|x|) on the full line, differentiated piecewise."""

    def wrapped(k, x):
        return np.sign(x) ** k * der(k, np.abs(x))

    return wrapped


def _half_exacts(alpha: float) -> dict:
    g = gamma(alpha + 1)
    ex = {f"monomial{p}": gamma(p + alpha + 1) for p in range(4)}
    for r in (1, 2, 3):
        ex[f"shifted{r}"] = math.exp(-1) * gamma(r + 1) * hyperu(r + 1, r + alpha + 2, 1.0)
    ex["rational"] = g * hyperu(alpha + 1, alpha + 1, 1.0)
    ex["exponential"] = g / 2 ** (alpha + 1)
    return ex


_PROVENANCE = {
    "monomial": "Gamma(p + alpha + 1) per axis",
    "shifted": "e^-1 r! U(r+1, r+alpha+2, 1) per axis (Tricomi U)",
    "rational": "Gamma(alpha+1) U(alpha+1, alpha+1, 1) per axis; e E1(1) at alpha=0",
    "exponential": "Gamma(alpha+1) / 2^(alpha+1) per axis",
    "sine": "odd on the full line, integral 0",
    "cubic": "odd on the full line, integral 0",
}


def _factors_1d(alpha: float, domain: Domain) -> dict[str, tuple[Factor1D, int]]:
    ex = _half_exacts(alpha)
    half = {f"monomial{p}": (_monomial(p), 8) for p in range(4)}
    half.update({f"shifted{r}": (_shifted_power(r), r) for r in (1, 2, 3)})
    half["rational"] = (_rational, 8)
    half["exponential"] = (_exponential, 8)
    out = {}
    if domain is Domain.HALF_LINE:
        for name, (der, smooth) in half.items():
            out[name] = (Factor1D(name, der, ex[name]), smooth)
        return out
    for name, (der, smooth) in half.items():
        if name.startswith("monomial"):
            p = int(name[-1])
            exact = 2 * ex[name] if p % 2 == 0 else 0.0
            out[name] = (Factor1D(name, der, exact), smooth)
        else:
            # |x| has a kink at 0, so these are only claimed in W^0..W^r away
            # from the origin; the even extension keeps the registry symmetric
            out[name] = (Factor1D(name, _even(der), 2 * ex[name]), smooth)
    out["sine"] = (Factor1D("sine", _sine, 0.0), 8)
    out["cubic"] = (Factor1D("cubic", _monomial(3), 0.0), 8)
    return out


def registry(alpha: float = 0.0, domain=Domain.HALF_LINE, dims=(1, 2, 3)) -> list[Integrand]:
    """Separable test integrands x -> prod_i f(x_i) for each dimension in ``dims``."""
    domain = Domain(domain)
    out = []
    for d in dims:
        for name, (fac, smooth) in _factors_1d(alpha, domain).items():
            stem = name.rstrip("0123456789")
            out.append(tensor(name, [fac] * d, smooth, _PROVENANCE[stem]))
    return out


def lookup(name: str, d: int = 1, alpha: float = 0.0, domain=Domain.HALF_LINE) -> Integrand:
    for f in registry(alpha, domain, dims=(d,)):
        if f.name == name:
            return f
    known = sorted({f.name for f in registry(alpha, domain, dims=(1,))})
    raise KeyError(f"unknown integrand {name!r}; known: {', '.join(known)}")


# -- bump function ------------------------------------------------------------


class Bump:
    """phi(y) = c exp(-1/(y(1-y))) on (0, 1), scaled so that its integral is 1.

    Derivatives are exact: phi^(n) = phi * P_n(y) / q(y)^(2n) with q = y(1-y)
    and P_{n+1} = q (P_n' q - 2n q' P_n) + q' P_n.
    """

    def __init__(self, max_order: int = 12):
        q = Polynomial([0.0, 1.0, -1.0])
        dq = q.deriv()
        polys = [Polynomial([1.0])]
        for n in range(max_order):
            p = polys[-1]
            polys.append(q * (p.deriv() * q - 2 * n * dq * p) + dq * p)
        self._polys = polys
        self.scale = 1.0
        self.scale = 1.0 / _integrate_unit(lambda y: self.derivative(0, y))

    @property
    def max_order(self) -> int:
        return len(self._polys) - 1

    def derivative(self, n: int, y) -> np.ndarray:
        if n > self.max_order:
            raise ValueError(f"bump derivatives only up to order {self.max_order}")
        y = np.asarray(y, dtype=float)
        inside = (y > 0.0) & (y < 1.0)
        yy = np.where(inside, y, 0.5)
        q = yy * (1.0 - yy)
        logmag = -1.0 / q - 2 * n * np.log(q)
        val = self.scale * self._polys[n](yy) * np.exp(logmag)
        return np.where(inside, val, 0.0)

    def __call__(self, y):
        return self.derivative(0, y)

    def sign_changes(self, n: int) -> np.ndarray:
        """Zeros of phi^(n) inside (0, 1): the real roots of P_n there."""
        roots = self._polys[n].roots()
        real = roots[np.abs(roots.imag) < 1e-9].real
        return np.sort(real[(real > 0.0) & (real < 1.0)])

    def norms(self, r: int) -> np.ndarray:
        """b_0 .. b_r with b_s the integral of |phi^(s)| over [0, 1].

        Each |phi^(s)| is integrated piecewise between its sign changes so
        that no panel straddles a kink.
        """
        out = []
        for s in range(r + 1):
            edges = np.concatenate([[0.0], self.sign_changes(s), [1.0]])
            out.append(sum(abs(_integrate_unit(lambda y, s=s: self.derivative(s, y), a, b))
                           for a, b in zip(edges[:-1], edges[1:])))
        return np.array(out)


_UX, _UW = np.polynomial.legendre.leggauss(32)


def _integrate_unit(f, lo: float = 0.0, hi: float = 1.0, panels: int = 512) -> float:
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * _UX).ravel()
    w = (half[:, None] * _UW).ravel()
    return float(np.sum(w * f(x)))


@functools.lru_cache(maxsize=1)
def default_bump() -> Bump:
    return Bump()


# -- fooling functions --------------------------------------------------------


def inverse_weight_derivative(s: int, x, alpha: float) -> np.ndarray:
    """d^s/dx^s of x^-alpha e^x.

    Leibniz over the two factors gives e^x sum_j C(s, j) (-alpha)_j x^(-alpha-j)
    with the falling factorial (-alpha)_j = prod_{i<j} (-alpha - i).
    """
    x = np.asarray(x, dtype=float)
    base = x ** (-alpha) * np.exp(x)
    total = np.zeros_like(x)
    for j in range(s + 1):
        total = total + comb(s, j) * _falling(-alpha, j) * x ** (-j)
    return base * total


def _fooling_factor(lo: float, delta: float, alpha: float, bump: Bump, r: int) -> Factor1D:
    def der(k, x):
        x = np.asarray(x, dtype=float)
        y = (x - lo) / delta
        inside = (y > 0.0) & (y < 1.0)
        xs = np.where(inside, x, lo + 0.5 * delta)
        total = np.zeros_like(xs)
        for s in range(k + 1):
            g = bump.derivative(k - s, (xs - lo) / delta) * delta ** (-(k - s))
            total = total + comb(k, s) * g * inverse_weight_derivative(s, xs, alpha)
        return np.where(inside, total, 0.0)

    return Factor1D(f"bump[{lo:.6g},{lo + delta:.6g}]", der, exact=None, r_max=bump.max_order)


@dataclass(frozen=True)
class FoolingCertificate:
    function: Integrand
    norm_bound: float
    integral: float
    vanish_checked: bool
    n: int
    d: int
    r: int
    alpha: float
    delta: float
    cell: tuple[int, ...]
    nodes_hash: str
    M: int | None = None
    norm_unnormalized: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "r": self.r,
            "alpha": self.alpha,
            "nodes_hash": self.nodes_hash,
            "delta": self.delta,
            "cell": list(self.cell),
            "M": self.M,
            "norm_bound": self.norm_bound,
            "integral": self.integral,
            "vanish_checked": self.vanish_checked,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def nodes_hash(nodes: np.ndarray) -> str:
    arr = np.ascontiguousarray(np.asarray(nodes, dtype="<f8"))
    return hashlib.sha256(arr.tobytes()).hexdigest()


def _check_weight(weight: WeightParams, r: int) -> None:
    if not weight.canonical:
        raise ValueError("fooling functions are built for the canonical weight (a=1, b=0)")
    if weight.domain is not Domain.HALF_LINE:
        raise ValueError("fooling functions are built on the half-line / positive orthant")
    if r < 0:
        raise ValueError("r must be non-negative")


def _certify(nodes, lows, delta, r, weight, bump, *, cell, M) -> FoolingCertificate:
    d = len(lows)
    alpha = weight.alpha
    factors = [_fooling_factor(lo, delta, alpha, bump, r) for lo in lows]
    support = tuple((lo, lo + delta) for lo in lows)
    raw = Integrand(
        name="fooling-raw",
        arity=d,
        factors=tuple(factors),
        smoothness_class=r,
        support=support,
    )
    p = WeightParams(alpha=alpha, r=r, domain=Domain.HALF_LINE, d=d)
    coarse = sobolev_norm_estimate(raw, p, resolution=NORM_RESOLUTION)
    fine = sobolev_norm_estimate(raw, p, resolution=2 * NORM_RESOLUTION)
    top = max(coarse, fine)
    spread = abs(coarse - fine) / top
    if not (math.isfinite(top) and top > 0) or spread > 0.01:
        raise CertificationError(f"norm estimate unstable under refinement ({coarse} vs {fine})")
    # inflate by the observed refinement spread so the bound stays an upper bound
    scale = top * (1.0 + spread + 1e-12)
    c = scale ** (-1.0 / d)

    def scaled(fac):
        return Factor1D(fac.name, lambda k, x, fac=fac: c * fac.derivative(k, x), None, fac.r_max)

    fn = Integrand(
        name="fooling",
        arity=d,
        factors=tuple(scaled(f) for f in factors),
        smoothness_class=r,
        exact_integral=float(bump.norms(0)[0] * delta) ** d / scale,
        provenance="product of bump integrals b_0 delta over the cell, divided by the norm",
        support=support,
    )
    pts = np.asarray(nodes, dtype=float).reshape(-1, d)
    vanish = bool(np.all(fn(pts) == 0.0)) if pts.size else True
    if not vanish:
        raise CertificationError("fooling function does not vanish at every node")
    return FoolingCertificate(
        function=fn,
        norm_bound=top / scale,
        integral=fn.exact_integral,
        vanish_checked=vanish,
        n=pts.shape[0],
        d=d,
        r=r,
        alpha=alpha,
        delta=delta,
        cell=tuple(int(s) for s in cell),
        nodes_hash=nodes_hash(pts),
        M=M,
        norm_unnormalized=top,
    )


def _occupied(nodes: np.ndarray, delta: float, closed: bool) -> set:
    """Cells (1-based per axis, cell s = (delta(s-1), delta s)) touched by nodes."""
    cells = set()
    for p in nodes:
        q = p / delta
        per_axis = []
        for qi in q:
            fl = math.floor(qi)
            if qi == fl:
                per_axis.append((fl, fl + 1) if closed else ())
            else:
                per_axis.append((fl + 1,))
        for c in itertools.product(*per_axis):
            cells.add(c)
    return cells


def make_fooling_1d(nodes, r: int, weight: WeightParams | None = None, bump: Bump | None = None):
    """Bump in the first node-free interval (t_{i-1}, t_i), n+1 <= i <= 2n+2, t_j = j/sqrt(n)."""
    weight = weight or WeightParams()
    _check_weight(weight, r)
    bump = bump or default_bump()
    pts = np.asarray(nodes, dtype=float).reshape(-1)
    n = max(pts.size, 1)
    if np.any(pts < 0):
        raise ValueError("nodes must lie on the half-line")
    delta = n ** -0.5
    candidates = range(n + 1, 2 * n + 3)
    pick = None
    for closed in (True, False):
        occ = _occupied(pts.reshape(-1, 1), delta, closed)
        pick = next((i for i in candidates if (i,) not in occ), None)
        if pick is not None:
            break
    return _certify(pts, [delta * (pick - 1)], delta, r, weight, bump, cell=(pick,), M=None)


def _int_root_ceil(M: int, d: int) -> int:
    """Smallest integer L with L^d >= M."""
    L = max(1, int(round(M ** (1.0 / d))))
    while L**d < M:
        L += 1
    while L > 1 and (L - 1) ** d >= M:
        L -= 1
    return L


def _gamma_count(d: int, P: int, L: int) -> int:
    if d == 1:
        return max(0, P - L + 1)
    total = 0
    s = L
    while s * L ** (d - 1) <= P:
        total += _gamma_count(d - 1, P // s, L)
        s += 1
    return total


def gamma_set_size(M: int, d: int) -> int:
    """|Gamma_d(M)|: s in N^d with prod s_i <= 2M and every s_i >= M^(1/d)."""
    return _gamma_count(d, 2 * M, _int_root_ceil(M, d))


def gamma_set(M: int, d: int):
    """Gamma_d(M) in lexicographic order."""
    L = _int_root_ceil(M, d)

    def rec(prefix, P, left):
        if left == 1:
            for s in range(L, P + 1):
                yield prefix + (s,)
            return
        s = L
        while s * L ** (left - 1) <= P:
            yield from rec(prefix + (s,), P // s, left - 1)
            s += 1

    yield from rec((), 2 * M, d)


def smallest_M(n: int, d: int) -> int:
    """Smallest integer M >= 1 with |Gamma_d(M)| >= n + 1 (scanned upward)."""
    M = 1
    while gamma_set_size(M, d) < n + 1:
        M += 1
    return M


def make_fooling_dd(nodes, r: int, d: int, weight: WeightParams | None = None, bump: Bump | None = None):
    """Tensor bump on a node-free cell K_s, s in Gamma_d(M_n), delta = M_n^(-1/(2d))."""
    if d < 2:
        raise ValueError("use make_fooling_1d for d = 1")
    weight = weight or WeightParams(d=d)
    _check_weight(weight, r)
    bump = bump or default_bump()
    pts = np.asarray(nodes, dtype=float).reshape(-1, d)
    if np.any(pts < 0):
        raise ValueError("nodes must lie in the positive orthant")
    n = max(pts.shape[0], 1)
    M = smallest_M(n, d)
    delta = M ** (-1.0 / (2 * d))
    pick = None
    for closed in (True, False):
        occ = _occupied(pts, delta, closed)
        pick = next((s for s in gamma_set(M, d) if s not in occ), None)
        if pick is not None:
            break
    lows = [delta * (s - 1) for s in pick]
    return _certify(pts, lows, delta, r, weight, bump, cell=pick, M=M)


def make_fooling(nodes, r: int, d: int = 1, weight: WeightParams | None = None) -> FoolingCertificate:
    if d == 1:
        return make_fooling_1d(nodes, r, weight)
    return make_fooling_dd(nodes, r, d, weight)


def lower_bound_estimate(grid_nodes, r: int, d: int = 1, weight: WeightParams | None = None) -> float:
    """Certified lower bound on the worst-case error of any rule on these nodes."""
    return make_fooling(grid_nodes, r, d, weight).integral
