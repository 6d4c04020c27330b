"""Bracketed golden-section search for smooth periodic functions."""

from __future__ import annotations

import math
from typing import Callable

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI2 = (3 - math.sqrt(5)) / 2
TWO_PI = 2 * math.pi


def golden_max(f: Callable[[float], float], a: float, b: float, tol: float = 1e-9) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``.

    Stops once the bracket is narrower than ``tol``.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    c = a + INV_PHI2 * h
    d = a + INV_PHI * h
    fc, fd = f(c), f(d)
    while h > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            h = INV_PHI * h
            c = a + INV_PHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = INV_PHI * h
            d = a + INV_PHI * h
            fd = f(d)
    return (c, fc) if fc > fd else (d, fd)


def periodic_max(
    f: Callable[[float], float],
    points: int = 256,
    tol: float = 1e-9,
    flat_tol: float = 1e-12,
) -> tuple[float, float]:
    """Global maximum of a 2*pi periodic ``f`` by grid scan plus golden refinement.

    If ``f`` varies by less than ``flat_tol`` over the grid the function is
    treated as constant and ``(0.0, f(0.0))`` is returned.
    """
    if points < 8:
        raise ValueError(f"need at least 8 grid points to bracket an extremum, got {points}")
    step = TWO_PI / points
    values = [f(i * step) for i in range(points)]
    best = max(range(points), key=values.__getitem__)
    if values[best] - min(values) <= flat_tol:
        return 0.0, values[0]
    x, fx = golden_max(f, (best - 1) * step, (best + 1) * step, tol)
    if values[best] > fx:
        x, fx = best * step, values[best]
    return x % TWO_PI, fx


def periodic_min(f: Callable[[float], float], points: int = 256, tol: float = 1e-9) -> tuple[float, float]:
    x, fx = periodic_max(lambda t: -f(t), points, tol)
    return x, -fx
