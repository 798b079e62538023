"""Adaptive Simpson quadrature.

Integrands appearing in this package are smooth on each curve segment,
so recursive Simpson with Richardson correction converges fast and is
fully deterministic.  ``composite_simpson_cumulative`` is the vectorized
companion used to re-verify lift integrals on dense grids.
"""

from __future__ import annotations

import numpy as np

__all__ = ["QuadratureError", "adaptive_simpson", "composite_simpson_cumulative"]

DEFAULT_TOL = 1e-10
MAX_DEPTH = 40


class QuadratureError(RuntimeError):
    """Raised when the adaptive subdivision exceeds the depth limit,
    which signals a non-smooth integrand or an unreachable tolerance."""


def _simpson(fa: float, fm: float, fb: float, width: float) -> float:
    return width * (fa + 4.0 * fm + fb) / 6.0


def _recurse(f, a, m, b, fa, fm, fb, whole, tol, depth):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = _simpson(fa, flm, fm, m - a)
    right = _simpson(fm, frm, fb, b - m)
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    if depth >= MAX_DEPTH:
        raise QuadratureError(
            f"adaptive Simpson failed to converge on [{a}, {b}] "
            f"(remaining error estimate {abs(delta) / 15.0:.3e})"
        )
    half = 0.5 * tol
    return _recurse(f, a, lm, m, fa, flm, fm, left, half, depth + 1) + _recurse(
        f, m, rm, b, fm, frm, fb, right, half, depth + 1
    )


def adaptive_simpson(f, a: float, b: float, tol: float = DEFAULT_TOL) -> float:
    """Integrate the scalar function f over [a, b] to absolute tolerance tol."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = float(a)
    b = float(b)
    if a == b:
        return 0.0
    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    if not np.all(np.isfinite([fa, fm, fb])):
        raise QuadratureError("integrand is not finite on the interval")
    whole = _simpson(fa, fm, fb, b - a)
    return _recurse(f, a, m, b, fa, fm, fb, whole, tol, 0)


def composite_simpson_cumulative(values: np.ndarray, step: float) -> np.ndarray:
    """Cumulative composite Simpson integral from uniformly spaced samples.

    values has shape (2n+1, ...) sampled at spacing ``step``; returns the
    integral from node 0 to nodes 0, 2, 4, ..., 2n, shape (n+1, ...).
    """
    values = np.asarray(values, dtype=float)
    if values.shape[0] % 2 != 1 or values.shape[0] < 3:
        raise ValueError("need an odd number (>= 3) of uniformly spaced samples")
    f0 = values[0:-2:2]
    f1 = values[1::2]
    f2 = values[2::2]
    panels = (step / 3.0) * (f0 + 4.0 * f1 + f2)
    out = np.zeros((panels.shape[0] + 1,) + values.shape[1:])
    np.cumsum(panels, axis=0, out=out[1:])
    return out
