"""Adaptive Simpson quadrature and bisection root finding."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import BracketNotFound, QuadratureFailure


def adaptive_simpson(
    f: Callable[[float], np.ndarray | float],
    a: float,
    b: float,
    rtol: float = 1e-8,
    atol: float = 1e-15,
    max_depth: int = 40,
):
    """Integrate ``f`` over [a, b] by adaptive Simpson with Richardson correction.

    ``f`` may return a scalar or a 1-d array; the error test then uses the
    max-norm.  A panel is accepted when ``|S_left + S_right - S_whole| <= 15 tol``
    with ``tol`` halved at each split, starting from
    ``max(atol, rtol * |initial estimate|)``.

    Raises
    ------
    QuadratureFailure
        If a panel still fails the test at ``max_depth``.
    """
    if a == b:
        return np.zeros_like(np.asarray(f(a), dtype=float))
    fa = np.asarray(f(a), dtype=float)
    fb = np.asarray(f(b), dtype=float)
    m = 0.5 * (a + b)
    fm = np.asarray(f(m), dtype=float)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    tol = max(atol, rtol * float(np.max(np.abs(whole))))

    # explicit LIFO stack pops the left half first, so panels are summed left to right
    out = []
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        flm = np.asarray(f(lm), dtype=float)
        frm = np.asarray(f(rm), dtype=float)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        err = left + right - s
        if float(np.max(np.abs(err))) <= 15.0 * eps:
            out.append((lo, left + right + err / 15.0))
            continue
        if depth >= max_depth:
            raise QuadratureFailure(f"adaptive Simpson: tolerance {eps:.3g} unmet on [{lo}, {hi}]")
        stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
        stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
    total = out[0][1]
    for _, v in out[1:]:
        total = total + v
    return total


def bisect_increasing(
    func: Callable[[float], float],
    target: float,
    lo: float,
    hi: float,
    xtol: float = 1e-10,
    rtol: float = 0.0,
    max_iter: int = 400,
) -> float:
    """Solve ``func(x) = target`` for a non-decreasing ``func`` on [lo, hi].

    Requires ``func(lo) <= target <= func(hi)``.  Stops when the bracket width
    is below ``xtol + rtol * |x|`` and returns the midpoint.
    """
    flo = func(lo) - target
    fhi = func(hi) - target
    if flo > 0 or fhi < 0:
        raise BracketNotFound(f"target {target} not bracketed by [{lo}, {hi}]")
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol + rtol * abs(mid):
            return mid
        if func(mid) - target < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bisect_predicate(pred: Callable[[float], bool], lo: float, hi: float, tol: float) -> float:
    """Locate the switch point of a predicate that is False at ``lo`` and True at ``hi``."""
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
