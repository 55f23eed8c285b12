"""Relay power-allocation rules.

The building block is the minimum short-term relay power that keeps both
flows out of outage for a given channel state. The long-term optimal
allocation serves a state with exactly that power when it does not exceed a
cutoff and keeps the relay silent otherwise (truncated channel inversion).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateState, InvalidArgument
from .model import ChannelState, SystemParams, outage_raw

TIE_RTOL = 1e-12
_EPS = np.finfo(float).eps


class Binding(enum.Enum):
    FIRST_HOP_RATE = "first_hop_rate"  # gamma2 >= delta1 (S1 -> S2 flow)
    SECOND_HOP_RATE = "second_hop_rate"  # gamma1 >= delta2 (S2 -> S1 flow)
    BOTH = "both"


@dataclass(frozen=True)
class ShortTermPower:
    """Either ``Infeasible`` (``power is None``) or ``Required(power, binding)``."""

    power: float | None
    binding: Binding | None = None

    @property
    def feasible(self) -> bool:
        return self.power is not None

    @classmethod
    def infeasible(cls) -> "ShortTermPower":
        return cls(None, None)


def _rate_terms(params: SystemParams, x, y):
    """The two per-flow lower bounds on relay power; NaN/inf where infeasible."""
    s = 1.0 + params.p_s1 * x + params.p_s2 * y
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = params.delta1 * s / (y * (params.p_s1 * x - params.delta1))
        t2 = params.delta2 * s / (x * (params.p_s2 * y - params.delta2))
    return t1, t2


def _nudge_up(params: SystemParams, x, y, p, active):
    # The closed form can land a few ulps short of the thresholds; step the
    # power up geometrically until both flows are served in floating point.
    for i in range(64):
        short = active & outage_raw(
            params.p_s1, params.p_s2, np.where(active, p, 0.0), x, y,
            params.delta1, params.delta2,
        )
        if not np.any(short):
            return p
        p = np.where(short, p * (1.0 + _EPS * 2.0**i), p)
    return p


def short_term_power_array(params: SystemParams, x, y) -> np.ndarray:
    """Vectorized minimum short-term relay power; ``inf`` marks infeasible states."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    feasible = (params.p_s1 * x > params.delta1) & (params.p_s2 * y > params.delta2)
    t1, t2 = _rate_terms(params, x, y)
    p = np.where(feasible, np.fmax(t1, t2), np.inf)
    feasible &= np.isfinite(p)
    p = np.where(feasible, p, np.inf)
    return _nudge_up(params, x, y, p, feasible)


def min_short_term_power(params: SystemParams, state: ChannelState) -> ShortTermPower:
    """Smallest relay power meeting both rate constraints at ``state``.

    States with ``p_s1*x <= delta1`` or ``p_s2*y <= delta2`` are infeasible:
    no finite relay power avoids an outage there.
    """
    x, y = float(state.x), float(state.y)
    p = float(short_term_power_array(params, x, y))
    if not np.isfinite(p):
        return ShortTermPower.infeasible()
    t1, t2 = (float(t) for t in _rate_terms(params, x, y))
    if abs(t1 - t2) <= TIE_RTOL * max(t1, t2):
        binding = Binding.BOTH
    elif t1 > t2:
        binding = Binding.FIRST_HOP_RATE
    else:
        binding = Binding.SECOND_HOP_RATE
    return ShortTermPower(p, binding)


def _check_cutoff(cutoff):
    if not np.isfinite(cutoff) or cutoff <= 0:
        raise InvalidArgument(f"cutoff must be positive and finite, got {cutoff!r}")


def truncated_power_array(params: SystemParams, x, y, cutoff: float) -> np.ndarray:
    _check_cutoff(cutoff)
    p = short_term_power_array(params, x, y)
    return np.where(p <= cutoff, p, 0.0)


def opa_power(params: SystemParams, state: ChannelState, cutoff: float):
    """Long-term optimal relay power for cutoff ``rho``: invert or stay silent."""
    p = truncated_power_array(params, state.x, state.y, cutoff)
    return float(p) if p.ndim == 0 else p


def dual_opa_power(params: SystemParams, state: ChannelState, mu: float):
    """Power-minimizing allocation for an outage target; same rule, cutoff ``mu``."""
    return opa_power(params, state, mu)


class RelayPolicy:
    """A deterministic map from channel state to relay output power."""

    def power_array(self, params: SystemParams, x, y) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, params: SystemParams, state: ChannelState):
        p = self.power_array(params, np.asarray(state.x), np.asarray(state.y))
        return float(p) if np.ndim(p) == 0 else p


@dataclass(frozen=True)
class OPA(RelayPolicy):
    rho: float

    def __post_init__(self):
        _check_cutoff(self.rho)

    def power_array(self, params, x, y):
        return truncated_power_array(params, x, y, self.rho)


@dataclass(frozen=True)
class DualOPA(RelayPolicy):
    mu: float

    def __post_init__(self):
        _check_cutoff(self.mu)

    def power_array(self, params, x, y):
        return truncated_power_array(params, x, y, self.mu)


@dataclass(frozen=True)
class Fixed(RelayPolicy):
    p: float

    def __post_init__(self):
        if not np.isfinite(self.p) or self.p < 0:
            raise InvalidArgument(f"fixed power must be finite and >= 0, got {self.p!r}")

    def power_array(self, params, x, y):
        return np.full(np.broadcast(np.asarray(x), np.asarray(y)).shape, float(self.p))


@dataclass(frozen=True)
class Zero(RelayPolicy):
    def power_array(self, params, x, y):
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)


@dataclass(frozen=True)
class ThreeNodeAllocation:
    p_s1: float | np.ndarray
    p_s2: float | np.ndarray
    p_r: float | np.ndarray


def short_term_opa_arrays(p_total: float, x, y):
    """Per-state split of a total power budget used by the short-term baseline.

    Half of ``p_total`` goes to the relay; the rest is shared between the end
    nodes in inverse proportion to the square root of their own channel gain.
    """
    if not np.isfinite(p_total) or p_total <= 0:
        raise InvalidArgument(f"p_total must be positive, got {p_total!r}")
    sx = np.sqrt(np.asarray(x, dtype=float))
    sy = np.sqrt(np.asarray(y, dtype=float))
    denom = sx + sy
    if np.any(denom == 0):
        raise DegenerateState("x = y = 0 leaves the end-node split undefined")
    half = 0.5 * p_total
    p_s1 = half * sy / denom
    p_s2 = half - p_s1
    return p_s1, p_s2, np.full(np.shape(denom), half)


def short_term_opa_allocation(p_total: float, state: ChannelState) -> ThreeNodeAllocation:
    p_s1, p_s2, p_r = short_term_opa_arrays(p_total, state.x, state.y)
    if np.ndim(p_s1) == 0:
        return ThreeNodeAllocation(float(p_s1), float(p_s2), float(p_r))
    return ThreeNodeAllocation(p_s1, p_s2, p_r)
