"""Adaptive Simpson quadrature with an absolute tolerance."""

from __future__ import annotations

import math
from typing import Callable, Sequence

from .errors import QuadratureError

MAX_DEPTH = 50
MIN_DEPTH = 3


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    breakpoints: Sequence[float] = (),
    max_depth: int = MAX_DEPTH,
) -> float:
    """Integrate ``f`` over ``[a, b]``.

    ``breakpoints`` split the range at known kinks (kernel support edges,
    table nodes) so each piece is smooth.
    """
    if b < a:
        return -adaptive_simpson(f, b, a, tol, breakpoints, max_depth)
    if a == b:
        return 0.0
    cuts = sorted({a, b, *(x for x in breakpoints if a < x < b)})
    tol_piece = tol / (len(cuts) - 1)
    return math.fsum(_integrate(f, lo, hi, tol_piece, max_depth) for lo, hi in zip(cuts, cuts[1:]))


def _integrate(f, a, b, tol, max_depth):
    # pieces narrower than this hold a negligible share of a bounded integrand
    min_width = 1e-13 * (b - a)
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    # explicit stack instead of recursion; each entry is one subinterval
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    total = []
    while stack:
        a, b, fa, fm, fb, whole, tol, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        converged = abs(delta) <= 15.0 * tol
        # below ~100 ulps the error estimate is pure roundoff
        at_resolution = (b - a) <= max(min_width, 100 * math.ulp(max(abs(a), abs(b))))
        if depth >= MIN_DEPTH and (converged or at_resolution):
            total.append(left + right + delta / 15.0)
        elif depth >= max_depth:
            raise QuadratureError(f"adaptive Simpson did not converge on [{a}, {b}]")
        else:
            stack.append((a, m, fa, flm, fm, left, 0.5 * tol, depth + 1))
            stack.append((m, b, fm, frm, fb, right, 0.5 * tol, depth + 1))
    return math.fsum(total)
