"""Shared least-squares helper for degree-2 fits."""

from __future__ import annotations

import logging

import numpy as np

from .errors import DegenerateData

log = logging.getLogger(__name__)

COND_WARN_THRESHOLD = 1e12


def quadratic_lsq(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Degree-2 OLS via column-equilibrated normal equations.

    Returns (c2, c1, c0) for y = c2*x**2 + c1*x + c0. The Vandermonde columns
    are rescaled to unit RMS before forming the normal equations: the raw x**2
    column can reach ~2e11 for pixel areas, which makes the unscaled normal
    matrix numerically useless (condition number ~1e22). The solve uses an
    LU factorization with partial pivoting; a condition warning is logged
    above 1e12.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError("x and y must be 1-D arrays of equal length")
    if x.size < 3:
        raise DegenerateData("a quadratic fit needs at least 3 samples")

    vand = np.column_stack([x * x, x, np.ones_like(x)])
    scale = np.sqrt(np.mean(vand * vand, axis=0))
    if not np.all(np.isfinite(scale)) or np.any(scale == 0.0):
        raise DegenerateData("degenerate design matrix (zero or non-finite column)")
    scaled = vand / scale

    normal = scaled.T @ scaled
    cond = float(np.linalg.cond(normal))
    if cond > COND_WARN_THRESHOLD:
        log.warning("quadratic normal equations badly conditioned (cond=%.3g)", cond)
    try:
        solution = np.linalg.solve(normal, scaled.T @ y)
    except np.linalg.LinAlgError as exc:
        raise DegenerateData("singular normal equations; samples cannot identify a quadratic") from exc

    c2, c1, c0 = solution / scale
    return float(c2), float(c1), float(c0)
