"""Small scalar root-finding and maximization helpers."""

from __future__ import annotations

import math
from typing import Callable

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def bisect_decreasing(f: Callable[[float], float], lo: float, hi: float,
                      xtol: float = 0.0, max_iter: int = 200) -> float:
    """Root of a decreasing function on [lo, hi], with f(lo) >= 0 >= f(hi).

    Stops when the bracket stops shrinking in floating point, when its width
    falls below ``xtol``, or after ``max_iter`` halvings.
    """
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= xtol:
            break
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bisect_increasing(f: Callable[[float], float], lo: float, hi: float,
                      xtol: float = 0.0, max_iter: int = 200) -> float:
    return bisect_decreasing(lambda x: -f(x), lo, hi, xtol=xtol, max_iter=max_iter)


def golden_section_max(f: Callable[[float], float], lo: float, hi: float,
                       xtol: float = 1e-12, max_iter: int = 300) -> float:
    """Maximizer of a unimodal ``f`` on [lo, hi].

    The endpoints are compared against the interior optimum, so boundary
    maxima are returned exactly.
    """
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    tol = xtol * max(1.0, abs(lo), abs(hi))
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    best_x, best_f = 0.5 * (a + b), f(0.5 * (a + b))
    for x in (lo, hi):
        fx = f(x)
        if fx > best_f:
            best_x, best_f = x, fx
    return best_x
