"""Cutoff solvers: rho from an average-power budget, mu from an outage target.

Both forward maps are monotone in the cutoff, so the solvers expand a
geometric bracket and bisect it (in log space). The reported residual is a
fresh evaluation of the forward map at the returned cutoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import analytic
from .errors import CutoffCapReached, InfeasibleTarget, InvalidArgument, NumericalFailure
from .model import SystemParams
from .quadrature import integrate_interval, integrate_semi_infinite  # noqa: F401
from .roots import RootResult, bisect, find_root_bracketed  # noqa: F401

RHO_TOL = 1e-8
MU_TOL = 1e-10
BRACKET_START = (1e-6, 1.0)
CUTOFF_MAX = 1e12
CUTOFF_MIN = 1e-300
# Outage integrals are run tighter than the default so that the computed map
# is smooth on the scale of the absolute tolerance used by solve_mu.
OUTAGE_QUAD_TOL = 1e-12


@dataclass(frozen=True)
class CutoffSolution:
    cutoff: float
    achieved: float
    iterations: int
    residual: float


def _expand_bracket(g, lo, hi, cutoff_max, what):
    """Grow ``[lo, hi]`` until ``g(lo) <= 0 <= g(hi)`` for an increasing ``g``."""
    g_lo, g_hi = g(lo), g(hi)
    n = 0
    while g_lo > 0:
        hi, g_hi = lo, g_lo
        lo *= 0.5
        n += 1
        if lo < CUTOFF_MIN:
            raise NumericalFailure(f"{what}: no lower bracket", lo=lo, g_lo=g_lo)
        g_lo = g(lo)
    while g_hi < 0:
        if hi >= cutoff_max:
            raise CutoffCapReached(
                f"{what}: target not reached below cutoff {cutoff_max:g}",
                lo=lo, hi=hi, g_lo=g_lo, g_hi=g_hi, cutoff_max=cutoff_max,
            )
        lo, g_lo = hi, g_hi
        hi = min(2.0 * hi, cutoff_max)
        n += 1
        g_hi = g(hi)
    return lo, hi, g_lo, g_hi, n


def solve_rho(params: SystemParams, p_avg: float, tol: float = RHO_TOL,
              cutoff_max: float = CUTOFF_MAX) -> CutoffSolution:
    """Cutoff at which truncated inversion spends exactly ``p_avg`` on average.

    ``residual`` is relative: ``|avg_relay_power(rho) - p_avg| / p_avg``.
    Raises :class:`CutoffCapReached` when even ``cutoff_max`` spends less than
    ``p_avg`` (the mean grows only logarithmically near the feasibility edge,
    so generous budgets need astronomically large cutoffs).
    """
    if not (p_avg > 0 and math.isfinite(p_avg)):
        raise InvalidArgument(f"p_avg must be positive, got {p_avg!r}")

    def g(rho):
        return analytic.avg_relay_power(params, rho) - p_avg

    lo, hi, g_lo, g_hi, n_expand = _expand_bracket(g, *BRACKET_START, cutoff_max, "solve_rho")
    res = bisect(g, lo, hi, ftol=tol * p_avg, xtol=4e-16, geometric=True, g_lo=g_lo, g_hi=g_hi)
    achieved = analytic.avg_relay_power(params, res.root)
    residual = abs(achieved - p_avg) / p_avg
    if residual > tol:
        raise NumericalFailure(
            "solve_rho: bracket collapsed before the power tolerance was met",
            rho=res.root, lo=res.lo, hi=res.hi, residual=residual,
        )
    return CutoffSolution(res.root, achieved, n_expand + res.iterations, residual)


def solve_mu(params: SystemParams, p_out_target: float, tol: float = MU_TOL,
             cutoff_max: float = CUTOFF_MAX) -> CutoffSolution:
    """Smallest-average-power cutoff meeting an outage target exactly.

    ``residual`` is absolute: ``|outage_probability(mu) - target|``.
    """
    if not (0.0 < p_out_target < 1.0):
        raise InvalidArgument(f"target outage must lie in (0, 1), got {p_out_target!r}")
    floor = analytic.outage_floor(params)
    if p_out_target <= floor:
        raise InfeasibleTarget(
            f"target {p_out_target:g} is at or below the outage floor {floor:.12g} "
            "= 1 - exp(-(delta1/p_s1)(1/omega_x + 1/omega_y))"
        )

    def outage(mu):
        return analytic.outage_probability(params, mu, tol=OUTAGE_QUAD_TOL)

    def g(mu):
        return p_out_target - outage(mu)

    lo, hi, g_lo, g_hi, n_expand = _expand_bracket(g, *BRACKET_START, cutoff_max, "solve_mu")
    res = bisect(g, lo, hi, ftol=tol, xtol=4e-16, geometric=True, g_lo=g_lo, g_hi=g_hi)
    achieved = outage(res.root)
    residual = abs(achieved - p_out_target)
    if residual > tol:
        raise NumericalFailure(
            "solve_mu: bracket collapsed before the outage tolerance was met",
            mu=res.root, lo=res.lo, hi=res.hi, residual=residual,
        )
    return CutoffSolution(res.root, achieved, n_expand + res.iterations, residual)


def coupled_params(params: SystemParams, mu: float) -> SystemParams:
    return params.replace(p_s1=mu, p_s2=mu)


def solve_mu_coupled(params: SystemParams, p_out_target: float, tol: float = MU_TOL,
                     cutoff_max: float = CUTOFF_MAX) -> CutoffSolution:
    """Cutoff ``mu`` meeting an outage target when the end nodes also transmit ``mu``.

    Outage with ``p_s1 = p_s2 = p_r = mu`` falls monotonically in ``mu``, so
    the coupled equation is bisected directly. Needs equal rates, otherwise
    equal end-node powers break the balance condition.
    """
    if not (0.0 < p_out_target < 1.0):
        raise InvalidArgument(f"target outage must lie in (0, 1), got {p_out_target!r}")
    if params.delta1 != params.delta2:
        raise InvalidArgument("coupled end-node powers need r01 == r02")

    def outage(mu):
        return analytic.outage_probability(coupled_params(params, mu), mu, tol=OUTAGE_QUAD_TOL)

    def g(mu):
        return p_out_target - outage(mu)

    lo, hi, g_lo, g_hi, n_expand = _expand_bracket(g, *BRACKET_START, cutoff_max, "solve_mu_coupled")
    res = bisect(g, lo, hi, ftol=tol, xtol=4e-16, geometric=True, g_lo=g_lo, g_hi=g_hi)
    achieved = outage(res.root)
    residual = abs(achieved - p_out_target)
    if residual > tol:
        raise NumericalFailure(
            "solve_mu_coupled: bracket collapsed before the outage tolerance was met",
            mu=res.root, lo=res.lo, hi=res.hi, residual=residual,
        )
    return CutoffSolution(res.root, achieved, n_expand + res.iterations, residual)
