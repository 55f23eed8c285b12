"""Semi-analytic outage and power results for the balanced configuration.

When ``p_s1/delta1 == p_s2/delta2`` the set of channel states served by the
truncated-inversion relay splits into two mirror-image regions around the
diagonal ``x == y``:

* M1 (``x <= y``): the S1 -> S2 rate constraint binds, and ``x`` must exceed
  :func:`boundary_m1` at height ``y``;
* M2 (``y <= x``): the S2 -> S1 rate constraint binds, mirror image.

Both regions start at the diagonal corner ``(lam, lam)`` with
``lam = lambda_cutoff(params, rho)``.

The double integrals are evaluated as an outer semi-infinite integral over
the "outer" coordinate (``y`` for M1, ``x`` for M2) and an inner integral over
the excess ``w = p_in*u - delta_in`` of the other coordinate, on a log scale.
Working with ``w`` directly avoids the cancellation in ``p_in*u - delta_in``
when the cutoff is large and the region hugs the feasibility boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import InvalidArgument, OutOfDomain, UnsupportedConfiguration
from .model import SystemParams
from .quadrature import DEFAULT_RTOL, integrate_interval, integrate_semi_infinite

EULER_GAMMA = 0.57721566490153286061
_E1_EPS = 4e-16
_E1_MAX_ITER = 1000


def _require_balanced(params: SystemParams):
    if not params.balanced:
        raise UnsupportedConfiguration(
            "closed-form results need p_s1/delta1 == p_s2/delta2 "
            f"(got {params.p_s1 / params.delta1!r} vs {params.p_s2 / params.delta2!r}); "
            "use the Monte Carlo evaluator instead"
        )


def _require_rho(rho):
    if not (isinstance(rho, (int, float)) and rho > 0 and not math.isnan(rho)):
        raise InvalidArgument(f"rho must be > 0, got {rho!r}")


def lambda_cutoff(params: SystemParams, rho: float) -> float:
    """Diagonal point ``z`` at which the minimum short-term power equals ``rho``.

    Positive root of ``p_s2*rho*z**2 - delta2*(p_s1 + p_s2 + rho)*z - delta2``.
    """
    _require_balanced(params)
    _require_rho(rho)
    if math.isinf(rho):
        return params.delta2 / params.p_s2
    d2, p2 = params.delta2, params.p_s2
    s = params.p_s1 + p2 + rho
    return d2 * s / (2.0 * p2 * rho) * (1.0 + math.sqrt(1.0 + 4.0 * p2 * rho / (d2 * s * s)))


def _corner_excess(params: SystemParams, rho: float, lam: float) -> float:
    """``p_s2*lam - delta2`` (equal to ``p_s1*lam - delta1`` scaled by delta1/delta2).

    Rearranged from the defining quadratic so that it stays accurate when
    ``lam`` approaches the feasibility limit ``delta2/p_s2``.
    """
    s = params.p_s1 + params.p_s2
    return params.delta2 * (s * lam + 1.0) / (rho * lam)


def _boundary(p_in, p_out, d_in, rho, v):
    if rho * v <= d_in:
        raise OutOfDomain(
            f"boundary undefined for outer coordinate {v!r} <= delta/rho = {d_in / rho!r}"
        )
    return d_in * (1.0 + (p_out + rho) * v) / (p_in * (rho * v - d_in))


def boundary_m1(params: SystemParams, rho: float, y: float) -> float:
    """Smallest ``x`` served in region M1 at height ``y``."""
    _require_balanced(params)
    _require_rho(rho)
    return _boundary(params.p_s1, params.p_s2, params.delta1, rho, y)


def boundary_m2(params: SystemParams, rho: float, x: float) -> float:
    """Smallest ``y`` served in region M2 at abscissa ``x``."""
    _require_balanced(params)
    _require_rho(rho)
    return _boundary(params.p_s2, params.p_s1, params.delta2, rho, x)


@dataclass(frozen=True)
class NonOutageRegion:
    """Set of channel states served by the truncated-inversion relay."""

    lam: float
    boundary_m1: Callable[[float], float]
    boundary_m2: Callable[[float], float]

    def contains(self, x: float, y: float) -> bool:
        if x <= y:
            return y >= self.lam and x >= self.boundary_m1(y)
        return x >= self.lam and y >= self.boundary_m2(x)


def non_outage_region(params: SystemParams, rho: float) -> NonOutageRegion:
    lam = lambda_cutoff(params, rho)
    return NonOutageRegion(
        lam=lam,
        boundary_m1=lambda y: boundary_m1(params, rho, y),
        boundary_m2=lambda x: boundary_m2(params, rho, x),
    )


@dataclass(frozen=True)
class _Side:
    """One of the two regions, written in (inner, outer) coordinates."""

    p_in: float
    p_out: float
    d_in: float
    om_in: float
    om_out: float


def _sides(params: SystemParams):
    m1 = _Side(params.p_s1, params.p_s2, params.delta1, params.omega_x, params.omega_y)
    m2 = _Side(params.p_s2, params.p_s1, params.delta2, params.omega_y, params.omega_x)
    return m1, m2


def _excess_limits(side: _Side, rho, lam, e_corner, t):
    """Inner-coordinate excess range ``[w_lo, w_hi]`` at outer coordinate ``lam + t``."""
    v = lam + t
    w_lo = side.d_in * (1.0 + side.d_in + side.p_out * v) / (rho * v - side.d_in)
    w_hi = e_corner + side.p_in * t
    return v, w_lo, w_hi


def _region_probability(side: _Side, rho, lam, e_corner, tol):
    a = side.d_in / (side.p_in * side.om_in)
    scale = side.p_in * side.om_in

    def outer(t):
        v, w_lo, w_hi = _excess_limits(side, rho, lam, e_corner, t)
        if w_hi <= w_lo:
            return 0.0
        # exp(-b/om) - exp(-v/om), factored to avoid cancellation
        inner = math.exp(-a - w_lo / scale) * -math.expm1(-(w_hi - w_lo) / scale)
        return math.exp(-v / side.om_out) / side.om_out * inner

    return integrate_semi_infinite(outer, 0.0, tol=tol, scale=side.om_out)


def _region_power(side: _Side, rho, lam, e_corner, tol):
    a = side.d_in / (side.p_in * side.om_in)
    scale = side.p_in * side.om_in

    def outer(t):
        v, w_lo, w_hi = _excess_limits(side, rho, lam, e_corner, t)
        if w_hi <= w_lo:
            return 0.0
        const = 1.0 + side.d_in + side.p_out * v
        coef = side.d_in / (v * side.p_in * side.om_in)

        # integrand in s = ln(w): f_in(u) * P_R,st(u, v) * du/ds
        def inner(s):
            w = math.exp(s)
            return math.exp(-a - w / scale) * (const + w)

        val = integrate_interval(inner, math.log(w_lo), math.log(w_hi), tol=tol)
        return math.exp(-v / side.om_out) / side.om_out * coef * val

    return integrate_semi_infinite(outer, 0.0, tol=tol, scale=side.om_out)


def _setup(params, rho):
    lam = lambda_cutoff(params, rho)
    e2 = _corner_excess(params, rho, lam)
    m1, m2 = _sides(params)
    # p_in*lam - d_in for each side; proportional by the balance condition
    e1 = e2 * params.delta1 / params.delta2
    return lam, (m1, e1), (m2, e2)


def served_probability(params: SystemParams, rho: float, tol: float = DEFAULT_RTOL) -> float:
    """Probability that a channel state falls in the non-outage region."""
    _require_balanced(params)
    _require_rho(rho)
    lam, (m1, e1), (m2, e2) = _setup(params, rho)
    return _region_probability(m1, rho, lam, e1, tol) + _region_probability(
        m2, rho, lam, e2, tol
    )


def outage_probability(params: SystemParams, rho: float, tol: float = DEFAULT_RTOL) -> float:
    """Outage probability of truncated inversion with cutoff ``rho``.

    Also the outage of a relay that always transmits with power ``rho``:
    both serve exactly the states whose minimum short-term power is <= rho.
    """
    p = 1.0 - served_probability(params, rho, tol)
    return min(1.0, max(0.0, p))


def outage_probability_expanded(params: SystemParams, rho: float,
                                tol: float = DEFAULT_RTOL) -> float:
    """Same quantity as :func:`outage_probability`, in the single-integral form

    ``1 + exp(-lam*(1/om_x + 1/om_y)) - I1 - I2`` with
    ``I1 = (1/om_y) * int_lam^inf exp(-(z/om_y + d1/(om_x*p1) * (1 + (p2 + rho)*z)/(rho*z - d1))) dz``
    and ``I2`` its mirror image. Loses absolute accuracy to cancellation when
    the outage is small; kept as an independent cross-check.
    """
    _require_balanced(params)
    _require_rho(rho)
    lam = lambda_cutoff(params, rho)
    p1, p2, d1, d2 = params.p_s1, params.p_s2, params.delta1, params.delta2
    ox, oy = params.omega_x, params.omega_y

    def i1(z):
        return math.exp(-(z / oy + d1 / (ox * p1) * (1.0 + (p2 + rho) * z) / (rho * z - d1))) / oy

    def i2(z):
        return math.exp(-(z / ox + d2 / (oy * p2) * (1.0 + (p1 + rho) * z) / (rho * z - d2))) / ox

    total = (
        1.0
        + math.exp(-lam * (1.0 / ox + 1.0 / oy))
        - integrate_semi_infinite(i1, lam, tol=tol, scale=oy)
        - integrate_semi_infinite(i2, lam, tol=tol, scale=ox)
    )
    return min(1.0, max(0.0, total))


def avg_relay_power(params: SystemParams, rho: float, tol: float = DEFAULT_RTOL) -> float:
    """Mean relay power of truncated inversion with cutoff ``rho``.

    Silent states contribute zero, so this is the unnormalized truncated mean
    of the minimum short-term power.
    """
    _require_balanced(params)
    _require_rho(rho)
    lam, (m1, e1), (m2, e2) = _setup(params, rho)
    return _region_power(m1, rho, lam, e1, tol) + _region_power(m2, rho, lam, e2, tol)


def outage_floor(params: SystemParams) -> float:
    """Outage that remains with unlimited relay power (a source link too weak)."""
    _require_balanced(params)
    return -math.expm1(
        -(params.delta1 / params.p_s1) * (1.0 / params.omega_x + 1.0 / params.omega_y)
    )


def exp_integral_e1(z: float) -> float:
    """Exponential integral ``E1(z) = int_z^inf exp(-t)/t dt`` for ``z > 0``.

    Power series below 1, modified-Lentz continued fraction above.
    """
    if not z > 0:
        raise InvalidArgument(f"E1 needs z > 0, got {z!r}")
    if math.isinf(z):
        return 0.0
    if z <= 1.0:
        total = 0.0
        term = 1.0
        for k in range(1, _E1_MAX_ITER):
            term *= -z / k
            contrib = term / k
            total += contrib
            if abs(contrib) < _E1_EPS * abs(total):
                break
        return -EULER_GAMMA - math.log(z) - total
    if z > 745.0:
        return 0.0
    tiny = 1e-300
    b = z + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _E1_MAX_ITER):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _E1_EPS:
            break
    return h * math.exp(-z)


def p2p_truncation_gain(p_out_target: float) -> float:
    """Fixed-power / truncated-inversion power ratio on a point-to-point Rayleigh link.

    With ``s = -ln(1 - target)`` the ratio is ``1 / (s * E1(s))``.
    """
    if not 0.0 < p_out_target < 1.0:
        raise InvalidArgument(f"target outage must lie in (0, 1), got {p_out_target!r}")
    s = -math.log1p(-p_out_target)
    return 1.0 / (s * exp_integral_e1(s))
