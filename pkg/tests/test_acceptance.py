"""Acceptance gate: one test per criterion, each at its stated tolerance and time budget.

Run with ``pytest tests/test_acceptance.py -v``; a PASS/FAIL line per criterion
is printed in the terminal summary.
"""

import math
import time

import numpy as np
import pytest
from scipy import integrate

from afrelay import analytic, cli, montecarlo as mc, numerics
from afrelay.config import RunConfig
from afrelay.model import SystemParams, gamma1_raw, gamma2_raw, outage_raw
from afrelay.policies import OPA, short_term_power_array

from conftest import ACCEPTANCE_LINES

BASE = SystemParams(1.0, 1.0, 0.5, 0.5)
RHOS = (0.5, 1.0, 2.0, 5.0, 10.0)


class Clock:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def report(num, name, ok, detail, elapsed, limit):
    in_time = elapsed < limit
    line = f"{detail}; {elapsed:.2f}s (limit {limit:g}s)"
    ACCEPTANCE_LINES.append((num, name, bool(ok and in_time), line))
    print(f"{'PASS' if ok and in_time else 'FAIL'} criterion {num}: {line}")
    assert ok, detail
    assert in_time, f"runtime {elapsed:.1f}s over {limit}s"


def test_01_corner_identity():
    worst = 0.0
    with Clock() as c:
        for rho in (0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0):
            lam = analytic.lambda_cutoff(BASE, rho)
            p = float(short_term_power_array(BASE, lam, lam))
            worst = max(worst, abs(p - rho) / rho)
    report(1, "corner identity", worst <= 1e-9, f"max rel err {worst:.2e} <= 1e-9", c.elapsed, 1)


def test_02_tightness():
    with Clock() as c:
        rng = np.random.default_rng(2024)
        worst, below_all, total = 0.0, True, 0
        # 10 parameter sets (balanced and not) x 10^4 random feasible states
        for _ in range(10):
            par = SystemParams(10 ** rng.uniform(-1, 2), 10 ** rng.uniform(-1, 2),
                               rng.uniform(0.1, 2), rng.uniform(0.1, 2),
                               omega_x=rng.uniform(0.2, 5), omega_y=rng.uniform(0.2, 5))
            m = 10**4
            x = par.delta1 / par.p_s1 * (1 + rng.exponential(2.0, m))
            y = par.delta2 / par.p_s2 * (1 + rng.exponential(2.0, m))
            p = short_term_power_array(par, x, y)
            assert np.all(np.isfinite(p))
            args = (par.p_s1, par.p_s2)
            slack = np.minimum(gamma2_raw(*args, p, x, y) - par.delta1,
                               gamma1_raw(*args, p, x, y) - par.delta2)
            worst = max(worst, float(np.max(np.abs(slack))))
            below_all &= bool(outage_raw(*args, p * (1 - 1e-6), x, y, par.delta1, par.delta2).all())
            total += m
    report(2, "tightness", worst <= 1e-9 and below_all,
           f"{total} states: max |slack| {worst:.2e} <= 1e-9, outage at (1-1e-6)P: {below_all}",
           c.elapsed, 5)


@pytest.fixture(scope="module")
def mc_1e7():
    with Clock() as c:
        res = mc.evaluate_paired(
            {str(r): mc.policy_evaluator(BASE, OPA(r)) for r in RHOS},
            1.0, 1.0, 10**7, seed=20240, workers=4,
        )
    return res, c.elapsed


def test_03_outage_oracle(mc_1e7):
    res, t_mc = mc_1e7
    with Clock() as c:
        devs = []
        for r in RHOS:
            ev = res[str(r)]
            devs.append(abs(ev.outage_estimate - analytic.outage_probability(BASE, r)) / ev.outage_stderr)
    worst = max(devs)
    report(3, "outage vs Monte Carlo", worst <= 3.0,
           "n=1e7, |analytic-MC|/stderr per rho: " + ", ".join(f"{d:.2f}" for d in devs),
           t_mc + c.elapsed, 120)


def test_04_power_oracle(mc_1e7):
    res, t_mc = mc_1e7
    with Clock() as c:
        devs = []
        for r in RHOS:
            ev = res[str(r)]
            devs.append(abs(ev.avg_power_estimate - analytic.avg_relay_power(BASE, r)) / ev.avg_power_stderr)
    worst = max(devs)
    report(4, "avg power vs Monte Carlo", worst <= 3.0,
           "n=1e7, |analytic-MC|/stderr per rho: " + ", ".join(f"{d:.2f}" for d in devs),
           t_mc + c.elapsed, 120)


def test_05_round_trips():
    errs = []
    with Clock() as c:
        for r0 in (0.5, 2.0, 10.0):
            rho = numerics.solve_rho(BASE, analytic.avg_relay_power(BASE, r0)).cutoff
            target = analytic.outage_probability(BASE, r0, tol=numerics.OUTAGE_QUAD_TOL)
            mu = numerics.solve_mu(BASE, target).cutoff
            errs += [abs(rho - r0) / r0, abs(mu - r0) / r0]
    worst = max(errs)
    report(5, "round trips", worst <= 1e-6, f"max rel err {worst:.2e} <= 1e-6", c.elapsed, 30)


def test_06_floor():
    with Clock() as c:
        floor = analytic.outage_floor(BASE)
        gap = analytic.outage_probability(BASE, 1e6) - floor
    ok = 0 <= gap <= 1e-3 and abs(floor - 0.864665) <= 1e-6
    report(6, "outage floor", ok, f"floor {floor:.9f}, OP(1e6)-floor {gap:.2e}", c.elapsed, 5)


def test_07_scenario1_shape():
    with Clock() as c:
        cfg = RunConfig(command="scenario1", n_samples=10**6, seed=7, workers=4).validate()
        t = cli.run_scenario1(cfg)
    rows = t.rows
    assert len(rows) == 16
    fpa_ok = all(r["op_opa"] <= r["op_fpa"] for r in rows)
    fpa_sep = all(r["diff_opa_fpa_mc"] < -3 * r["diff_opa_fpa_stderr"] for r in rows)
    low = rows[:8]
    st_sep = all(r["diff_opa_st_mc"] < -3 * r["diff_opa_st_stderr"] for r in low)
    worst_st = max(r["diff_opa_st_mc"] / r["diff_opa_st_stderr"] for r in low)
    worst_fpa = max(r["diff_opa_fpa_mc"] / r["diff_opa_fpa_stderr"] for r in rows)
    report(7, "total-power sweep shape", fpa_ok and fpa_sep and st_sep,
           f"OPA<=FPA on 16/16 points: {fpa_ok}; worst OPA-FPA {worst_fpa:.1f} sigma; "
           f"worst OPA-short-term over 0-14 dB {worst_st:.1f} sigma",
           c.elapsed, 600)


def _e1_oracle(z):
    top = math.log(800.0 / z)
    v, _ = integrate.quad(lambda u: math.exp(-z * math.exp(u)), 0.0, max(top, 1.0),
                          epsabs=0, epsrel=1e-13, limit=200)
    return v


def test_08_scenario2_shape():
    with Clock() as c:
        cfg = RunConfig(command="scenario2", n_samples=10**5, seed=7, workers=4).validate()
        t = cli.run_scenario2(cfg)
        s = 0.693147
        ref_db = 10 * math.log10(1 / (s * _e1_oracle(s)))
        impl_db = 10 * math.log10(1 / (s * analytic.exp_integral_e1(s)))
    rows = [r for r in t.rows if r["status"] == "ok"]
    assert len(rows) == len(t.rows) == 18
    tg = np.array([r["target_op"] for r in rows])
    g = np.array([r["gain_db"] for r in rows])
    mid = (tg >= 0.3 - 1e-12) & (tg <= 0.7 + 1e-12)
    low = tg <= 0.3 + 1e-12
    above5 = bool(np.all(g[mid] > 5.0))
    decreasing = bool(np.all(np.diff(g[low]) < 0))
    drop = g[low][0] - g[low][-1]
    spread = g[mid].max() - g[mid].min()
    flat = spread < drop
    ref_ok = abs(ref_db - impl_db) <= 0.01
    report(8, "relay power gain shape", above5 and decreasing and flat and ref_ok,
           f"min gain over [0.3,0.7] {g[mid].min():.2f} dB > 5; decreasing on [0.05,0.3]: {decreasing} "
           f"(drop {drop:.2f} dB); spread on [0.3,0.7] {spread:.2f} dB < drop; "
           f"point-to-point gain at 0.5 {impl_db:.4f} dB vs oracle {ref_db:.4f} dB",
           c.elapsed, 300)


def _perturbed_outage(p_st, x, y, score, waste, budget, params):
    """Serve states in ``score`` order at power (1 + waste) * P_st until ``budget`` is spent.

    Any leftover budget is burnt on the first served state, so the empirical
    mean power equals the budget exactly.
    """
    n = p_st.size
    cost = np.where(np.isfinite(p_st), p_st * (1.0 + waste), np.inf)
    order = np.argsort(score, kind="stable")
    spent = np.cumsum(cost[order])
    k = int(np.searchsorted(spent, budget * n, side="right"))
    power = np.zeros(n)
    served = order[:k]
    power[served] = cost[served]
    left = budget * n - power.sum()
    power[order[0] if k else 0] += max(left, 0.0)
    out = outage_raw(params.p_s1, params.p_s2, power, x, y, params.delta1, params.delta2)
    return out, power


def test_09_empirical_optimality():
    with Clock() as c:
        par = SystemParams(10.0, 10.0, 0.5, 0.5)
        n = 10**6
        x, y = mc.sample_states(1.0, 1.0, n, seed=99)
        p_st = short_term_power_array(par, x, y)
        rho = 5.0
        o_opa, p_opa = mc.policy_evaluator(par, OPA(rho))(x, y)
        budget = float(p_opa.mean())
        rng = np.random.default_rng(7)
        finite = np.where(np.isfinite(p_st), p_st, 1e300)
        policies = []
        for sigma in (0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0):
            policies.append((f"noisy order sigma={sigma}",
                             finite * np.exp(sigma * rng.standard_normal(n)), 0.0))
        policies += [
            ("largest sum gain first", -(x + y), 0.0),
            ("largest min gain first", -np.minimum(x, y), 0.0),
            ("largest first-hop gain first", -x, 0.0),
            ("swapped-gain order", short_term_power_array(par, y * 1.3, x * 0.7), 0.0),
            ("random order", rng.random(n), 0.0),
        ]
        for w in (0.01, 0.1, 0.5, 1.0):
            policies.append((f"cheapest first, {w:.0%} waste", finite, w))
        # spread: mix cheap-first with random service
        mix = np.where(rng.random(n) < 0.5, finite, finite * 10)
        policies.append(("half the states deprioritised", mix, 0.0))
        policies.append(("deprioritise near-diagonal", finite * (1 + 5 * np.exp(-abs(np.log(x / y)))), 0.0))
        policies.append(("cheapest first, random 0-10% waste", finite, 0.1 * rng.random(n)))
        # fixed power c on the cheapest states, c the largest P_st served
        srt = np.sort(p_st[np.isfinite(p_st)])
        k = int(np.searchsorted(srt * np.arange(1, srt.size + 1) / n, budget, side="right"))
        c_fix = srt[k - 1]
        policies.append(("truncated fixed power", finite, np.where(np.isfinite(p_st), c_fix / finite - 1, 0.0)))
        assert len(policies) == 20
        worst = -math.inf
        worst_name = ""
        for name, score, waste in policies:
            o, p = _perturbed_outage(p_st, x, y, score, waste, budget, par)
            assert p.mean() == pytest.approx(budget, rel=1e-9)
            d = o.astype(float) - o_opa.astype(float)
            se = d.std(ddof=1) / math.sqrt(n)
            z = -d.mean() / se if se > 0 else (math.inf if d.mean() < 0 else -math.inf)
            if z > worst:
                worst, worst_name = z, name
    report(9, "empirical optimality", worst <= 3.0,
           f"20 policies at equal power {budget:.4g}; best perturbed policy beats OPA by "
           f"{worst:.2f} sigma ({worst_name}; negative means worse)",
           c.elapsed, 300)


COMMAND_ARGS = {
    "scenario1": ["--sweep", "0:30:4"],
    "scenario2": ["--sweep", "0.1:0.6:3"],
    "solve-rho": ["--pavg", "0.1"],
    "solve-mu": ["--target-op", "0.95"],
    "outage-curve": ["--sweep=-10:10:3"],
    "validate": [],
}


def test_10_determinism(tmp_path):
    same = {}
    with Clock() as c:
        for cmd, extra in COMMAND_ARGS.items():
            blobs = []
            for rep, workers in ((0, "1"), (1, "1")):
                out = tmp_path / f"{cmd}-{rep}.csv"
                code = cli.main([cmd, *extra, "--samples", "70000", "--seed", "5",
                                 "--workers", workers, "--out", str(out)])
                assert code == 0, cmd
                blobs.append(out.read_bytes())
            same[cmd] = blobs[0] == blobs[1]
    report(10, "determinism", all(same.values()),
           "byte-identical reruns: " + ", ".join(f"{k}={v}" for k, v in same.items()),
           c.elapsed, 300)
