"""Deterministic bracketed bisection."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidArgument, NumericalFailure

MAX_ITER = 200


@dataclass(frozen=True)
class RootResult:
    root: float
    value: float
    iterations: int
    lo: float
    hi: float


def bisect(g, lo, hi, *, ftol, xtol, max_iter=MAX_ITER, geometric=False,
           g_lo=None, g_hi=None) -> RootResult:
    """Bisect a sign change of ``g`` on ``[lo, hi]``.

    Stops when ``|g(mid)| <= ftol`` or the bracket width drops to ``xtol``
    (relative width ``hi/lo - 1`` when ``geometric``). Geometric mode splits at
    ``sqrt(lo*hi)`` and needs ``lo > 0``.
    """
    if not lo < hi:
        raise InvalidArgument(f"empty bracket [{lo}, {hi}]")
    if geometric and lo <= 0:
        raise InvalidArgument("geometric bisection needs lo > 0")
    f_lo = g(lo) if g_lo is None else g_lo
    f_hi = g(hi) if g_hi is None else g_hi
    if f_lo * f_hi > 0:
        raise InvalidArgument(
            f"g(lo)={f_lo!r} and g(hi)={f_hi!r} do not bracket a root"
        )
    if abs(f_lo) <= ftol:
        return RootResult(lo, f_lo, 0, lo, hi)
    if abs(f_hi) <= ftol:
        return RootResult(hi, f_hi, 0, lo, hi)
    for it in range(1, max_iter + 1):
        mid = math.sqrt(lo) * math.sqrt(hi) if geometric else lo + 0.5 * (hi - lo)
        width = hi / lo - 1.0 if geometric else hi - lo
        if width <= xtol or not lo < mid < hi:
            best_x, best_f = min(((lo, f_lo), (hi, f_hi)), key=lambda p: abs(p[1]))
            return RootResult(best_x, best_f, it - 1, lo, hi)
        f_mid = g(mid)
        if abs(f_mid) <= ftol:
            return RootResult(mid, f_mid, it, lo, hi)
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    raise NumericalFailure(
        "bisection hit the iteration cap", lo=lo, hi=hi, g_lo=f_lo, g_hi=f_hi,
        iterations=max_iter,
    )


def find_root_bracketed(g, lo, hi, tol=1e-12) -> float:
    """Root of a monotone ``g`` inside ``[lo, hi]`` by plain bisection."""
    return bisect(g, lo, hi, ftol=tol, xtol=tol).root
