"""Compiled inner loops for the Laguerre Jacobi matrix.

Everything here works on the canonical weight x^alpha e^{-x} and plain float64
arrays; the public wrappers live in :mod:`hypquad.orthopoly`.
"""
import math

import numba
import numpy as np

_RESCALE = 1e150
_MAX_QL_ITER = 60


@numba.njit(cache=True)
def tridiag_ql(diag, offdiag):
    """Implicit-shift QL on a symmetric tridiagonal matrix.

    Returns ``(eigenvalues, first_components, ok)``; the eigenvector first
    components are accumulated from the same rotations (Golub-Welsch).
    Eigenvalues come back unsorted.
    """
    n = diag.shape[0]
    d = diag.copy()
    e = np.zeros(n)
    for i in range(n - 1):
        e[i] = offdiag[i]
    z = np.zeros(n)
    z[0] = 1.0
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= 2.220446049250313e-16 * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > _MAX_QL_ITER:
                return d, z, False
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.sqrt(g * g + 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.sqrt(f * f + g * g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                f = z[i + 1]
                z[i + 1] = s * z[i] + c * f
                z[i] = c * z[i] - s * f
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return d, z, True


@numba.njit(cache=True)
def sturm_count(diag, offdiag, sigma):
    """Number of eigenvalues <= sigma (zero pivots count as <=)."""
    n = diag.shape[0]
    count = 0
    q = diag[0] - sigma
    if q <= 0.0:
        count += 1
        if q == 0.0:
            q = -1e-300
    for i in range(1, n):
        q = diag[i] - sigma - offdiag[i - 1] * offdiag[i - 1] / q
        if q <= 0.0:
            count += 1
            if q == 0.0:
                q = -1e-300
    return count


@numba.njit(cache=True)
def recurrence_coefficients(m, alpha):
    """Diagonal a_k, sqrt(b_k) and 1/sqrt(b_k) for k = 0..m (b_0 = 0)."""
    a = np.empty(m + 1)
    sb = np.empty(m + 1)
    inv_sb = np.zeros(m + 1)
    for k in range(m + 1):
        a[k] = 2.0 * k + alpha + 1.0
        sb[k] = math.sqrt(k * (k + alpha))
        if k > 0:
            inv_sb[k] = 1.0 / sb[k]
    return a, sb, inv_sb


@numba.njit(cache=True)
def _recurrence(m, a, sb, inv_sb, x, p0):
    # returns (p_m, p_m', p_{m-1}, log of the accumulated rescaling,
    #          sum_{j<m} p_j^2 in rescaled units)
    pm1 = 0.0
    dpm1 = 0.0
    p = p0
    dp = 0.0
    logscale = 0.0
    sumsq = 0.0
    for k in range(m):
        sumsq += p * p
        ak = a[k]
        bk = sb[k]
        bk1 = inv_sb[k + 1]
        pn = ((x - ak) * p - bk * pm1) * bk1
        dpn = ((x - ak) * dp + p - bk * dpm1) * bk1
        pm1 = p
        dpm1 = dp
        p = pn
        dp = dpn
        big = max(abs(p), abs(dp), abs(pm1))
        if big > _RESCALE:
            p /= _RESCALE
            dp /= _RESCALE
            pm1 /= _RESCALE
            dpm1 /= _RESCALE
            sumsq /= _RESCALE * _RESCALE
            logscale += math.log(_RESCALE)
    return p, dp, pm1, logscale, sumsq


@numba.njit(cache=True)
def orthonormal_value(m, alpha, x, p0):
    """p_m(x) by the forward recurrence; inf signals overflow."""
    a, sb, inv_sb = recurrence_coefficients(m, alpha)
    p, _, _, logscale, _ = _recurrence(m, a, sb, inv_sb, x, p0)
    if logscale == 0.0:
        return p
    if p == 0.0:
        return 0.0
    lv = math.log(abs(p)) + logscale
    if lv > 709.0:
        return math.copysign(math.inf, p)
    return math.copysign(math.exp(lv), p)


@numba.njit(cache=True)
def refine_nodes(nodes, alpha, p0, max_iter):
    """Newton-polish the zeros of p_m and return Christoffel numbers.

    The weights are 1 / sum_{j<m} p_j(x)^2, which keeps full relative
    accuracy for the tiny Cotes numbers far out on the half-line.
    """
    m = nodes.shape[0]
    a, sb, inv_sb = recurrence_coefficients(m, alpha)
    out = np.empty(m)
    weights = np.empty(m)
    # each node is bracketed by its unrefined neighbours
    for k in range(m):
        x = nodes[k]
        lo = nodes[k - 1] if k > 0 else 0.0
        hi = nodes[k + 1] if k < m - 1 else math.inf
        sumsq = 0.0
        logscale = 0.0
        fresh = False
        for _ in range(max_iter):
            p, dp, _, logscale, sumsq = _recurrence(m, a, sb, inv_sb, x, p0)
            fresh = True
            if dp == 0.0:
                break
            step = p / dp
            # a step below rounding level is not taken, so sumsq stays exact
            if abs(step) <= 4.0 * 2.220446049250313e-16 * abs(x):
                break
            xn = x - step
            if not (lo < xn < hi) or abs(step) > 0.5 * (hi - lo):
                break
            x = xn
            fresh = False
        if not fresh:
            _, _, _, logscale, sumsq = _recurrence(m, a, sb, inv_sb, x, p0)
        out[k] = x
        weights[k] = math.exp(-math.log(sumsq) - 2.0 * logscale)
    return out, weights
