"""Smolyak sparse quadrature on step hyperbolic corners and crosses.

    Q_xi f = sum_{|k|_1 <= xi} sum_{e subset {1..d}} (-1)^(d-|e|) Q_{2^k(e)} f

with k(e)_i = k_i for i in e and k_i - 1 otherwise.  A coordinate with
k_i = 0 outside e would call for the level -1 rule, which is the zero
operator (so that Delta_0 = Q_1); such (k, e) pairs contribute no terms.
"""
from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from hypquad.orthopoly import pairwise_sum
from hypquad.quad1d import LevelFamily
from hypquad.weight_core import Domain, WeightParams

DEFAULT_EVAL_CAP = 10**8


class BudgetExceededError(RuntimeError):
    """The grid would have more terms than the configured evaluation cap."""


class BudgetTooSmallError(ValueError):
    """Even the xi = 0 grid needs more nodes than the given budget."""


class IntegrandEvaluationError(RuntimeError):
    def __init__(self, node, cause):
        super().__init__(f"integrand evaluation failed at node {tuple(node)}: {cause}")
        self.node = np.asarray(node)
        self.cause = cause


def eval_cap() -> int:
    raw = os.environ.get("HQ_EVAL_CAP")
    return int(float(raw)) if raw else DEFAULT_EVAL_CAP


def k_of_e(k, e) -> tuple[int, ...]:
    """k(e): keep k_i for i in e, lower the rest by one (floored at 0).

    ``e`` holds 1-based coordinate indices.
    """
    members = set(e)
    return tuple(ki if i + 1 in members else max(ki - 1, 0) for i, ki in enumerate(k))


def multi_indices(xi: int, d: int):
    """All k in N_0^d with |k|_1 <= xi, ordered by (|k|_1, k)."""
    for total in range(xi + 1):
        for cut in itertools.combinations(range(total + d - 1), d - 1):
            bounds = (-1,) + cut + (total + d - 1,)
            yield tuple(bounds[i + 1] - bounds[i] - 1 for i in range(d))


def _blocks(xi: int, d: int):
    # yields (k, e-bitmask, sign, k(e)) for every contributing pair
    for k in multi_indices(xi, d):
        for mask in range(2**d):
            inside = [(mask >> i) & 1 == 1 for i in range(d)]
            if any(not inside[i] and k[i] == 0 for i in range(d)):
                continue
            ke = tuple(k[i] if inside[i] else k[i] - 1 for i in range(d))
            sign = -1.0 if (d - sum(inside)) % 2 else 1.0
            yield k, mask, sign, ke


def idealized_count(xi: int, d: int) -> int:
    """|G(xi)| = sum_{|k|_1<=xi} sum_e 2^{|k(e)|_1}, every e counted."""
    total = 0
    for k in multi_indices(int(xi), d):
        for mask in range(2**d):
            e = [i + 1 for i in range(d) if (mask >> i) & 1]
            total += 2 ** sum(k_of_e(k, e))
    return total


def count_points(xi, d: int, family: LevelFamily, idealized: bool = False) -> int:
    """Number of grid terms before merging.

    With ``idealized`` the level sizes are taken as 2^k and every (k, e) pair
    is counted; otherwise actual level sizes are used and zero-operator pairs
    are skipped, matching :func:`build_grid` exactly.
    """
    xi = _check_xi(xi)
    if idealized:
        return idealized_count(xi, d)
    sizes = [family.size(k) for k in range(xi + 1)]
    return sum(int(np.prod([sizes[l] for l in ke])) for _, _, _, ke in _blocks(xi, d))


def select_xi(n: int, d: int, family: LevelFamily) -> int:
    """Largest xi whose grid has at most n terms."""
    if count_points(0, d, family) > n:
        raise BudgetTooSmallError(f"budget {n} is below the xi=0 grid size")
    xi = 0
    while count_points(xi + 1, d, family) <= n:
        xi += 1
    return xi


def _check_xi(xi) -> int:
    if xi < 0 or int(xi) != xi:
        raise ValueError(f"xi must be a non-negative integer, got {xi}")
    return int(xi)


@dataclass(frozen=True)
class MergedTerms:
    nodes: np.ndarray
    coefficients: np.ndarray
    multiplicity: np.ndarray


@dataclass(frozen=True)
class SparseGrid:
    """All terms (k, e, s) of Q_xi in canonical order.

    ``levels``/``index`` give, per axis, the level k(e)_i and 0-based node
    index s_i - 1; ``k`` and ``e_mask`` record the provenance.
    """

    d: int
    xi: int
    family: LevelFamily
    k: np.ndarray
    e_mask: np.ndarray
    levels: np.ndarray
    index: np.ndarray
    coefficients: np.ndarray
    scale: float = 1.0
    _merged: list = field(default_factory=list, repr=False, compare=False)

    @property
    def eval_count(self) -> int:
        return int(self.coefficients.size)

    @property
    def idealized_count(self) -> int:
        return idealized_count(self.xi, self.d)

    @property
    def domain(self) -> Domain:
        return self.family.domain

    def _coordinates(self, levels: np.ndarray, index: np.ndarray) -> np.ndarray:
        out = np.empty(levels.shape, dtype=float)
        for lvl in np.unique(levels):
            nodes = self.family.rule(int(lvl)).nodes
            mask = levels == lvl
            out[mask] = nodes[index[mask]]
        return out / self.scale

    @property
    def nodes(self) -> np.ndarray:
        return self._coordinates(self.levels, self.index)

    def merged(self) -> MergedTerms:
        """Coincident terms summed, zero coefficients dropped, first-seen order."""
        if self._merged:
            return self._merged[0]
        keys = np.hstack([self.levels, self.index])
        _, first, inverse, counts = np.unique(
            keys, axis=0, return_index=True, return_inverse=True, return_counts=True
        )
        inverse = inverse.ravel()
        sums = np.zeros(first.size)
        np.add.at(sums, inverse, self.coefficients)
        order = np.argsort(first, kind="stable")
        keep = order[sums[order] != 0.0]
        rows = first[keep]
        merged = MergedTerms(
            nodes=self._coordinates(self.levels[rows], self.index[rows]),
            coefficients=sums[keep],
            multiplicity=counts[keep],
        )
        self._merged.append(merged)
        return merged

    def is_sign_symmetric(self) -> bool:
        """Node set closed under x_i -> -x_i for every axis."""
        pts = self.merged().nodes
        present = {tuple(p) for p in pts}
        for i in range(self.d):
            flipped = pts.copy()
            flipped[:, i] = -flipped[:, i]
            if any(tuple(p) not in present for p in flipped):
                return False
        return True


def build_grid(
    xi,
    d: int,
    family: LevelFamily,
    weight: WeightParams | None = None,
    cap: int | None = None,
) -> SparseGrid:
    """Enumerate G(xi) in order (|k|_1, k, e-bitmask, s).

    Without ``weight`` the grid integrates against the canonical weight
    (a=1, b=0); otherwise nodes are scaled by 1/a and coefficients by the
    per-axis factor e^b / a^(alpha+1).
    """
    xi = _check_xi(xi)
    if d < 1:
        raise ValueError("d must be positive")
    cap = eval_cap() if cap is None else cap
    total = count_points(xi, d, family)
    if total > cap:
        raise BudgetExceededError(f"grid has {total} terms, above the cap {cap}")

    rules = [family.rule(k) for k in range(xi + 1)]
    ks, masks, lvls, idxs, coefs = [], [], [], [], []
    for k, mask, sign, ke in _blocks(xi, d):
        shape = tuple(len(rules[l]) for l in ke)
        idx = np.indices(shape).reshape(d, -1).T
        coef = np.full(idx.shape[0], sign)
        for i, l in enumerate(ke):
            coef = coef * rules[l].weights[idx[:, i]]
        n = idx.shape[0]
        ks.append(np.broadcast_to(np.array(k), (n, d)))
        masks.append(np.full(n, mask))
        lvls.append(np.broadcast_to(np.array(ke), (n, d)))
        idxs.append(idx)
        coefs.append(coef)

    scale = 1.0
    if weight is not None:
        if weight.alpha != family.alpha or weight.domain is not family.domain:
            raise ValueError("weight and level family disagree on alpha or domain")
        scale = weight.a
        factor = (np.exp(weight.b) / weight.a ** (weight.alpha + 1)) ** d
        coefs = [c * factor for c in coefs]

    return SparseGrid(
        d=d,
        xi=xi,
        family=family,
        k=np.concatenate(ks).astype(np.int64),
        e_mask=np.concatenate(masks).astype(np.int64),
        levels=np.concatenate(lvls).astype(np.int64),
        index=np.concatenate(idxs).astype(np.int64),
        coefficients=np.concatenate(coefs),
        scale=scale,
    )


def _evaluate(f, pts: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(f(pts), dtype=float).reshape(-1)
    except Exception as exc:  # locate the first failing node
        for p in pts:
            try:
                f(p[None, :])
            except Exception as inner:
                raise IntegrandEvaluationError(p, inner) from inner
        raise IntegrandEvaluationError(pts[0], exc) from exc
    bad = ~np.isfinite(vals)
    if bad.any():
        raise IntegrandEvaluationError(pts[np.argmax(bad)], "non-finite value")
    return vals


def apply(grid: SparseGrid, f, workers: int = 1, chunk: int = 65536) -> float:
    """Q_xi f for a vectorized f taking an (N, d) array.

    Evaluation may be split over threads; the reduction is always the same
    pairwise tree over the canonical term order.
    """
    terms = grid.merged()
    pts = terms.nodes
    # chunking is independent of the worker count
    parts = [pts[i:i + chunk] for i in range(0, pts.shape[0], chunk)]
    if workers <= 1 or len(parts) == 1:
        vals = np.concatenate([_evaluate(f, p) for p in parts])
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            vals = np.concatenate(list(pool.map(lambda p: _evaluate(f, p), parts)))
    return pairwise_sum(terms.coefficients * vals)
