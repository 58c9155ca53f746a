"""Least-squares convergence-rate fits on log n versus log error."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ERROR_FLOOR = 1e-13


@dataclass(frozen=True)
class RateFit:
    samples: tuple[tuple[int, float], ...]
    slope: float
    intercept: float
    log_correction_exponent: float | None = None
    used: int = 0


def fit_rate(
    samples,
    skip: int = 2,
    log_correction_exponent: float | None = None,
    floor: float = ERROR_FLOOR,
) -> RateFit:
    """Fit log(err / (log n)^c) = intercept + slope * log n.

    The first ``skip`` samples (smallest levels) are dropped as pre-asymptotic
    and errors at or below ``floor`` are ignored as rounding-dominated.
    """
    pairs = tuple((int(n), float(e)) for n, e in samples)
    kept = [(n, e) for n, e in pairs[skip:] if e > floor and n > 1]
    if len(kept) < 2:
        raise ValueError(f"need at least two usable samples to fit a rate, got {len(kept)}")
    n = np.array([p[0] for p in kept], dtype=float)
    err = np.array([p[1] for p in kept])
    y = np.log(err)
    if log_correction_exponent:
        y = y - log_correction_exponent * np.log(np.log(n))
    slope, intercept = np.polyfit(np.log(n), y, 1)
    return RateFit(
        samples=pairs,
        slope=float(slope),
        intercept=float(intercept),
        log_correction_exponent=log_correction_exponent,
        used=len(kept),
    )


def upper_log_exponent(r: int, d: int) -> float:
    """Exponent of log n in the sparse-grid upper bound: (r/2 + 1)(d - 1)."""
    return (r / 2 + 1) * (d - 1)


def lower_log_exponent(r: int, d: int) -> float:
    """Exponent of log n in the lower bound: 3r(d - 1)/4."""
    return 3 * r * (d - 1) / 4


def predicted(fit: RateFit, n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    base = np.exp(fit.intercept) * n**fit.slope
    if fit.log_correction_exponent:
        base = base * np.log(n) ** fit.log_correction_exponent
    return base


def fmt(x) -> str:
    """Float formatting shared by every CSV/JSON writer (17 significant digits)."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.17g}"
