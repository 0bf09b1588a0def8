"""Adaptive Gauss-Legendre quadrature for piecewise-smooth integrands.

Integrands are called with 1-d numpy arrays of abscissae and must return an
array of the same shape.
"""

from __future__ import annotations

import numpy as np

ORDER = 15
_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(ORDER)
MAX_DEPTH = 48


def _panel(func, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return half * np.dot(_WEIGHTS, func(mid + half * _NODES))


def integrate(func, a, b, abs_tol=1e-10, rel_tol=1e-12):
    """Integrate ``func`` over ``[a, b]`` by recursive bisection.

    Each panel is estimated once with a 15-point rule and once as the sum of
    its two halves; the difference is the panel's error estimate.  A panel is
    accepted when that difference is below its share of the tolerance.

    Returns
    -------
    (value, error_estimate)
    """
    a = float(a)
    b = float(b)
    if a == b:
        return 0.0, 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    width = b - a
    total = 0.0
    err_total = 0.0
    stack = [(a, b, _panel(func, a, b), 0)]
    while stack:
        lo, hi, whole, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left = _panel(func, lo, mid)
        right = _panel(func, mid, hi)
        err = abs(left + right - whole)
        share = abs_tol * (hi - lo) / width
        if err <= max(share, rel_tol * abs(left + right)) or depth >= MAX_DEPTH:
            total += left + right
            err_total += err
        else:
            stack.append((lo, mid, left, depth + 1))
            stack.append((mid, hi, right, depth + 1))
    return sign * total, err_total


def integrate_pieces(func, points, abs_tol=1e-10, rel_tol=1e-12):
    """Integrate over consecutive intervals of the sorted ``points``.

    Splitting a priori at kinks and jumps keeps every panel smooth.
    """
    pts = np.unique(np.asarray(points, dtype=float))
    total = 0.0
    err = 0.0
    n = max(len(pts) - 1, 1)
    for lo, hi in zip(pts[:-1], pts[1:]):
        v, e = integrate(func, lo, hi, abs_tol=abs_tol / n, rel_tol=rel_tol)
        total += v
        err += e
    return total, err
