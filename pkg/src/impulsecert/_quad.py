"""Adaptive Simpson quadrature used by the norm and residual computations."""

from __future__ import annotations

from typing import Callable, Iterable

_MAX_DEPTH = 48


def _simpson(fa: float, fm: float, fb: float, h: float) -> float:
    return h / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive(f: Callable[[float], float], a: float, m: float, b: float,
              fa: float, fm: float, fb: float, whole: float,
              tol: float, depth: int) -> float:
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = _simpson(fa, flm, fm, m - a)
    right = _simpson(fm, frm, fb, b - m)
    if depth >= _MAX_DEPTH or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    half = 0.5 * tol
    return (_adaptive(f, a, lm, m, fa, flm, fm, left, half, depth + 1)
            + _adaptive(f, m, rm, b, fm, frm, fb, right, half, depth + 1))


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-10) -> float:
    """Integrate ``f`` over [a, b] to absolute tolerance ``tol``."""
    if b <= a:
        return 0.0
    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    whole = _simpson(fa, fm, fb, b - a)
    return _adaptive(f, a, m, b, fa, fm, fb, whole, tol, 0)


def integrate_with_breakpoints(f: Callable[[float], float], a: float, b: float,
                               breakpoints: Iterable[float],
                               tol: float = 1e-10) -> float:
    """Integrate over [a, b], subdividing at the supplied interior points."""
    if b <= a:
        return 0.0
    cuts = sorted({float(a), float(b), *(float(c) for c in breakpoints
                                         if a < float(c) < b)})
    n = max(len(cuts) - 1, 1)
    return sum(adaptive_simpson(f, lo, hi, tol / n)
               for lo, hi in zip(cuts, cuts[1:]))
