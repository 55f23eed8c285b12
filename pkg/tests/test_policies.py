import numpy as np
import pytest
from hypothesis import given, strategies as st

from afrelay import analytic
from afrelay.errors import DegenerateState, InvalidArgument
from afrelay.model import ChannelState, SystemParams, is_outage, snr_at_s1, snr_at_s2
from afrelay.policies import (
    OPA,
    Binding,
    DualOPA,
    Fixed,
    Zero,
    dual_opa_power,
    min_short_term_power,
    opa_power,
    short_term_opa_allocation,
    short_term_power_array,
)

gains = st.floats(min_value=1e-3, max_value=50.0)


def test_short_term_examples(params_a, params_b):
    r = min_short_term_power(params_a, ChannelState(2.0, 2.0))
    assert r.feasible and r.power == pytest.approx(2.5, rel=1e-14)
    assert r.binding is Binding.BOTH
    r = min_short_term_power(params_b, ChannelState(1.0, 3.0))
    assert r.power == pytest.approx(3.0, rel=1e-14)
    assert r.binding is Binding.SECOND_HOP_RATE
    assert min_short_term_power(params_b, ChannelState(0.6, 10.0)).binding is Binding.FIRST_HOP_RATE
    assert not min_short_term_power(params_a, ChannelState(0.5, 5.0)).feasible


def test_boundary_is_infeasible(params_a):
    assert not min_short_term_power(params_a, ChannelState(1.0, 5.0)).feasible
    assert not min_short_term_power(params_a, ChannelState(5.0, 1.0)).feasible
    assert min_short_term_power(params_a, ChannelState(1.0 + 1e-9, 5.0)).feasible


def test_opa_examples(params_a):
    s = ChannelState(2.0, 2.0)
    assert opa_power(params_a, s, 3.0) == pytest.approx(2.5)
    assert opa_power(params_a, s, 2.0) == 0.0
    assert opa_power(params_a, ChannelState(0.5, 5.0), 1e9) == 0.0
    with pytest.raises(InvalidArgument):
        opa_power(params_a, s, 0.0)


def test_dual_opa_examples(params_a):
    s = ChannelState(2.0, 2.0)
    assert dual_opa_power(params_a, s, 3.0) == pytest.approx(2.5)
    assert dual_opa_power(params_a, s, 2.0) == 0.0
    assert dual_opa_power(params_a, ChannelState(0.5, 5.0), 3.0) == 0.0
    assert dual_opa_power(params_a, s, 2.5) == pytest.approx(2.5)
    assert dual_opa_power(params_a, s, 0.1) == 0.0


def test_policy_objects(params_a):
    s = ChannelState(np.array([2.0, 0.5, 4.0]), np.array([2.0, 5.0, 4.0]))
    assert OPA(3.0)(params_a, s).tolist() == pytest.approx(opa_power(params_a, s, 3.0).tolist())
    assert DualOPA(3.0)(params_a, s).tolist() == OPA(3.0)(params_a, s).tolist()
    assert Fixed(1.5)(params_a, s).tolist() == [1.5] * 3
    assert Zero()(params_a, s).tolist() == [0.0] * 3
    with pytest.raises(InvalidArgument):
        Fixed(-1.0)
    with pytest.raises(InvalidArgument):
        OPA(-2.0)


def test_allocation_examples():
    a = short_term_opa_allocation(12.0, ChannelState(0.7, 0.7))
    assert (a.p_s1, a.p_s2, a.p_r) == pytest.approx((3.0, 3.0, 6.0))
    a = short_term_opa_allocation(12.0, ChannelState(4.0, 1.0))
    assert (a.p_s1, a.p_s2, a.p_r) == pytest.approx((2.0, 4.0, 6.0))
    # the end-node power follows sqrt of the opposite hop, so x = 0 sends it all to S1
    a = short_term_opa_allocation(12.0, ChannelState(0.0, 1.0))
    assert (a.p_s1, a.p_s2, a.p_r) == pytest.approx((6.0, 0.0, 6.0))
    with pytest.raises(DegenerateState):
        short_term_opa_allocation(12.0, ChannelState(0.0, 0.0))


@given(st.floats(1e-3, 1e4), gains, gains)
def test_allocation_sums_to_total(pt, x, y):
    a = short_term_opa_allocation(pt, ChannelState(x, y))
    assert min(a.p_s1, a.p_s2, a.p_r) >= 0
    assert a.p_s1 + a.p_s2 + a.p_r == pytest.approx(pt, rel=1e-12)


def _feasible_params_state(ps1, ps2, r1, r2, ex, ey):
    par = SystemParams(ps1, ps2, r1, r2)
    return par, ChannelState(par.delta1 / ps1 + ex, par.delta2 / ps2 + ey)


@given(st.floats(0.1, 100), st.floats(0.1, 100), st.floats(0.1, 2), st.floats(0.1, 2),
       st.floats(1e-4, 20), st.floats(1e-4, 20))
def test_short_term_power_is_tight(ps1, ps2, r1, r2, ex, ey):
    par, s = _feasible_params_state(ps1, ps2, r1, r2, ex, ey)
    r = min_short_term_power(par, s)
    assert r.feasible and np.isfinite(r.power) and r.power > 0
    assert not is_outage(par, s, r.power)
    assert is_outage(par, s, r.power * (1 - 1e-6))
    assert not is_outage(par, s, r.power * 1.5)
    slack = min(snr_at_s2(par, s, r.power) - par.delta1, snr_at_s1(par, s, r.power) - par.delta2)
    assert abs(slack) <= 1e-9 * max(par.delta1, par.delta2)


@given(st.floats(1e-2, 1e3))
def test_corner_identity(rho):
    par = SystemParams(1.0, 1.0, 0.5, 0.5)
    lam = analytic.lambda_cutoff(par, rho)
    r = min_short_term_power(par, ChannelState(lam, lam))
    assert r.power == pytest.approx(rho, rel=1e-9)


@given(gains, gains, st.floats(1e-2, 1e3), st.floats(1.0, 10.0))
def test_truncation(x, y, rho, factor):
    par = SystemParams(1.0, 1.0, 0.5, 0.5)
    s = ChannelState(x, y)
    p = opa_power(par, s, rho)
    assert 0.0 <= p <= rho
    assert opa_power(par, s, rho * factor) >= p


@given(gains, gains, st.floats(0.1, 10), st.floats(0.1, 2))
def test_swap_symmetry(x, y, ps, r):
    par = SystemParams(ps, ps, r, r)
    a = min_short_term_power(par, ChannelState(x, y))
    b = min_short_term_power(par, ChannelState(y, x))
    assert a.feasible == b.feasible
    if a.feasible:
        assert a.power == pytest.approx(b.power, rel=1e-12)


def test_array_matches_scalar(params_b):
    rng = np.random.default_rng(3)
    x, y = rng.exponential(size=200), rng.exponential(size=200)
    arr = short_term_power_array(params_b, x, y)
    for xi, yi, pi in zip(x, y, arr):
        r = min_short_term_power(params_b, ChannelState(xi, yi))
        assert (r.power if r.feasible else np.inf) == pi
