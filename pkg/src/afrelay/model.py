"""Physical-layer formulas for two-way amplify-and-forward relaying.

All powers are linear and normalized to a unit noise variance at every node.
Channel gains ``x`` and ``y`` are the squared magnitudes of the S1-R and S2-R
coefficients. Every function broadcasts over numpy arrays, so a
:class:`ChannelState` may hold a single realization or a batch of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument

BALANCE_RTOL = 1e-12


def snr_threshold(rate: float) -> float:
    """SNR needed to carry ``rate`` bits/s/Hz over the two-phase cycle."""
    if not math.isfinite(rate) or rate <= 0:
        raise InvalidArgument(f"rate must be positive and finite, got {rate!r}")
    return 2.0 ** (2.0 * rate) - 1.0


@dataclass(frozen=True)
class SystemParams:
    p_s1: float
    p_s2: float
    r01: float
    r02: float
    omega_x: float = 1.0
    omega_y: float = 1.0
    delta1: float = field(init=False)
    delta2: float = field(init=False)
    balanced: bool = field(init=False)

    def __post_init__(self):
        for name in ("p_s1", "p_s2", "r01", "r02", "omega_x", "omega_y"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
                raise InvalidArgument(f"{name} must be positive and finite, got {v!r}")
            object.__setattr__(self, name, float(v))
        d1 = snr_threshold(self.r01)
        d2 = snr_threshold(self.r02)
        object.__setattr__(self, "delta1", d1)
        object.__setattr__(self, "delta2", d2)
        k1, k2 = self.p_s1 / d1, self.p_s2 / d2
        object.__setattr__(
            self, "balanced", abs(k1 - k2) <= BALANCE_RTOL * max(k1, k2)
        )

    def replace(self, **changes) -> "SystemParams":
        kw = dict(
            p_s1=self.p_s1,
            p_s2=self.p_s2,
            r01=self.r01,
            r02=self.r02,
            omega_x=self.omega_x,
            omega_y=self.omega_y,
        )
        kw.update(changes)
        return SystemParams(**kw)


@dataclass(frozen=True)
class ChannelState:
    x: float | np.ndarray
    y: float | np.ndarray

    def __post_init__(self):
        for name in ("x", "y"):
            v = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(v)) or np.any(v < 0):
                raise InvalidArgument(f"{name} must be finite and >= 0")

    def swapped(self) -> "ChannelState":
        return ChannelState(self.y, self.x)


def _check_power(p_r):
    if np.any(np.asarray(p_r) < 0):
        raise InvalidArgument("relay power must be >= 0")


# Raw kernels. Node powers are arguments rather than SystemParams so that
# per-state allocations (the short-term total-power baseline) can reuse them.


def gamma2_raw(p_s1, p_s2, p_r, x, y):
    return p_s1 * x * p_r * y / (p_s1 * x + (p_s2 + p_r) * y + 1.0)


def gamma1_raw(p_s1, p_s2, p_r, x, y):
    return p_s2 * p_r * x * y / ((p_s1 + p_r) * x + p_s2 * y + 1.0)


def outage_raw(p_s1, p_s2, p_r, x, y, delta1, delta2):
    return (gamma2_raw(p_s1, p_s2, p_r, x, y) < delta1) | (
        gamma1_raw(p_s1, p_s2, p_r, x, y) < delta2
    )


def relay_gain_sq(params: SystemParams, state: ChannelState, p_r):
    """Squared AF amplification gain for relay output power ``p_r``."""
    _check_power(p_r)
    return p_r / (params.p_s1 * state.x + params.p_s2 * state.y + 1.0)


def snr_at_s2(params: SystemParams, state: ChannelState, p_r):
    """End-to-end SNR of the S1 -> R -> S2 flow after self-interference removal."""
    _check_power(p_r)
    return gamma2_raw(params.p_s1, params.p_s2, p_r, state.x, state.y)


def snr_at_s1(params: SystemParams, state: ChannelState, p_r):
    """End-to-end SNR of the S2 -> R -> S1 flow after self-interference removal."""
    _check_power(p_r)
    return gamma1_raw(params.p_s1, params.p_s2, p_r, state.x, state.y)


def is_outage(params: SystemParams, state: ChannelState, p_r):
    """True when either flow falls short of its threshold.

    Meeting a threshold with equality counts as success.
    """
    _check_power(p_r)
    out = outage_raw(
        params.p_s1, params.p_s2, p_r, state.x, state.y, params.delta1, params.delta2
    )
    return bool(out) if np.ndim(out) == 0 else out
