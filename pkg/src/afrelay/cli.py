"""Command-line front end.

    afrelay scenario1 --out fig2.csv
    afrelay scenario2 --format json
    afrelay solve-rho --ps1 1 --ps2 1 --pavg 0.5
    afrelay solve-mu --target-op 0.95
    afrelay outage-curve --sweep -10:20:16
    afrelay validate

Exit codes: 0 success, 1 config error, 2 numerical failure, 3 validation failure.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np
import scipy

from . import __version__, analytic, montecarlo, numerics
from .config import (
    COMMANDS,
    ConfigError,
    RunConfig,
    Sweep,
    build_config,
    db_to_linear,
    linear_to_db,
    parse_assignments,
    read_config_file,
)
from .errors import (
    CutoffCapReached,
    InfeasibleTarget,
    InvalidArgument,
    NumericalFailure,
    UnsupportedConfiguration,
)
from .model import SystemParams
from .policies import OPA, DualOPA, Fixed, short_term_power_array
from .tables import Table, gnuplot_script

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_VALIDATION = 0, 1, 2, 3
SIGMA = 3.0


def _params(cfg: RunConfig, **override) -> SystemParams:
    kw = dict(p_s1=cfg.ps1, p_s2=cfg.ps2, r01=cfg.r01, r02=cfg.r02,
              omega_x=cfg.omega_x, omega_y=cfg.omega_y)
    kw.update(override)
    return SystemParams(**kw)


def _metadata(cfg: RunConfig, **extra) -> dict:
    md = {
        "command": cfg.command,
        "afrelay_version": __version__,
        "numpy_version": np.__version__,
        "scipy_version": scipy.__version__,
        "seed": cfg.seed,
        "samples": cfg.n_samples,
        "r01": cfg.r01,
        "r02": cfg.r02,
        "omega_x": cfg.omega_x,
        "omega_y": cfg.omega_y,
        "rho_tol": numerics.RHO_TOL,
        "mu_tol": numerics.MU_TOL,
        "cutoff_max": numerics.CUTOFF_MAX,
    }
    sw = cfg.effective_sweep()
    if sw is not None:
        md["sweep"] = str(sw)
    md.update(extra)
    return md


def _solve_rho_capped(params, p_avg):
    """(rho, slack flag); slack budgets get the largest admissible cutoff."""
    try:
        return numerics.solve_rho(params, p_avg).cutoff, False
    except CutoffCapReached:
        return numerics.CUTOFF_MAX, True


def run_scenario1(cfg: RunConfig) -> Table:
    """Outage vs total power for proposed OPA, fixed allocation and the short-term baseline.

    Proposed OPA and FPA both use ``p_s1 = p_s2 = P_T/3``; OPA spends an
    average of ``P_T/3`` at the relay, FPA transmits ``P_T/3`` always.
    """
    if cfg.r01 != cfg.r02:
        raise ConfigError("scenario1 needs r01 == r02 (equal end-node powers must be balanced)")
    cols = [
        "pt_db", "pt", "p_node", "rho", "budget_slack",
        "op_opa", "op_fpa", "op_floor",
        "op_opa_mc", "op_opa_mc_stderr",
        "op_fpa_mc", "op_fpa_mc_stderr",
        "op_st_mc", "op_st_mc_stderr",
        "diff_opa_fpa_mc", "diff_opa_fpa_stderr",
        "diff_opa_st_mc", "diff_opa_st_stderr",
    ]
    table = Table(cols, metadata=_metadata(
        cfg, sweep_axis="total power P_T in dB",
        allocation="proposed: ps1=ps2=pavg=P_T/3; fpa: ps1=ps2=pr=P_T/3; "
                   "short-term: ps1=0.5P_T*sqrt(y)/(sqrt(x)+sqrt(y)), pr=0.5P_T",
    ))
    for pt_db in cfg.effective_sweep().values():
        pt = db_to_linear(pt_db)
        p = pt / 3.0
        params = _params(cfg, p_s1=p, p_s2=p)
        rho, slack = _solve_rho_capped(params, p)
        paired = montecarlo.evaluate_paired(
            {
                "opa": montecarlo.policy_evaluator(params, OPA(rho)),
                "fpa": montecarlo.policy_evaluator(params, Fixed(p)),
                "st": montecarlo.baseline_evaluator(pt, params.delta1, params.delta2),
            },
            cfg.omega_x, cfg.omega_y, cfg.n_samples, cfg.seed, cfg.workers,
        )
        d_fpa, s_fpa = paired.outage_difference("opa", "fpa")
        d_st, s_st = paired.outage_difference("opa", "st")
        table.add(
            pt_db=pt_db, pt=pt, p_node=p, rho=rho, budget_slack=slack,
            op_opa=analytic.outage_probability(params, rho),
            op_fpa=analytic.outage_probability(params, p),
            op_floor=analytic.outage_floor(params),
            op_opa_mc=paired["opa"].outage_estimate,
            op_opa_mc_stderr=paired["opa"].outage_stderr,
            op_fpa_mc=paired["fpa"].outage_estimate,
            op_fpa_mc_stderr=paired["fpa"].outage_stderr,
            op_st_mc=paired["st"].outage_estimate,
            op_st_mc_stderr=paired["st"].outage_stderr,
            diff_opa_fpa_mc=d_fpa, diff_opa_fpa_stderr=s_fpa,
            diff_opa_st_mc=d_st, diff_opa_st_stderr=s_st,
        )
    return table


def run_scenario2(cfg: RunConfig) -> Table:
    """Relay power gain of the dual OPA over a fixed-power relay at equal outage."""
    cols = [
        "target_op", "status", "mu", "p_node", "avg_relay_power",
        "gain", "gain_db", "p2p_gain_db", "op_floor",
        "op_mc", "op_mc_stderr", "avg_power_mc", "avg_power_mc_stderr",
    ]
    coupling = (
        "ps1=ps2=mu, solved jointly by bisection on mu" if cfg.couple_end_nodes
        else f"fixed ps1={cfg.ps1:.12g}, ps2={cfg.ps2:.12g}"
    )
    table = Table(cols, metadata=_metadata(cfg, sweep_axis="target outage", coupling=coupling))
    base = _params(cfg)
    if cfg.couple_end_nodes and base.delta1 != base.delta2:
        raise ConfigError("coupled scenario2 needs r01 == r02")
    if not cfg.couple_end_nodes and not base.balanced:
        raise ConfigError("scenario2 with fixed end-node powers needs balanced params")
    for target in cfg.effective_sweep().values():
        p2p_db = linear_to_db(analytic.p2p_truncation_gain(target))
        try:
            if cfg.couple_end_nodes:
                sol = numerics.solve_mu_coupled(base, target)
                params = numerics.coupled_params(base, sol.cutoff)
            else:
                sol = numerics.solve_mu(base, target)
                params = base
        except (InfeasibleTarget, CutoffCapReached):
            table.add(target_op=target, status="infeasible", p2p_gain_db=p2p_db,
                      op_floor=analytic.outage_floor(base))
            continue
        mu = sol.cutoff
        avg = analytic.avg_relay_power(params, mu)
        mc = montecarlo.evaluate_policy(params, DualOPA(mu), cfg.n_samples, cfg.seed, cfg.workers)
        table.add(
            target_op=target, status="ok", mu=mu, p_node=params.p_s1,
            avg_relay_power=avg, gain=mu / avg, gain_db=linear_to_db(mu / avg),
            p2p_gain_db=p2p_db, op_floor=analytic.outage_floor(params),
            op_mc=mc.outage_estimate, op_mc_stderr=mc.outage_stderr,
            avg_power_mc=mc.avg_power_estimate, avg_power_mc_stderr=mc.avg_power_stderr,
        )
    return table


def run_solve_rho(cfg: RunConfig) -> Table:
    params = _params(cfg)
    cols = ["pavg", "method", "rho", "achieved", "iterations", "residual", "op"]
    table = Table(cols, metadata=_metadata(cfg, ps1=cfg.ps1, ps2=cfg.ps2))
    if params.balanced:
        sol = numerics.solve_rho(params, cfg.pavg)
        table.add(pavg=cfg.pavg, method="analytic", rho=sol.cutoff, achieved=sol.achieved,
                  iterations=sol.iterations, residual=sol.residual,
                  op=analytic.outage_probability(params, sol.cutoff))
    else:
        sol = montecarlo.solve_rho_mc(params, cfg.pavg, cfg.n_samples, cfg.seed)
        ev = montecarlo.evaluate_policy(params, OPA(sol.cutoff), cfg.n_samples, cfg.seed,
                                        cfg.workers)
        table.add(pavg=cfg.pavg, method="monte_carlo", rho=sol.cutoff, achieved=sol.achieved,
                  residual=abs(sol.achieved - cfg.pavg) / cfg.pavg, op=ev.outage_estimate)
    return table


def run_solve_mu(cfg: RunConfig) -> Table:
    params = _params(cfg)
    cols = ["target_op", "mu", "achieved", "iterations", "residual", "avg_relay_power",
            "op_floor"]
    table = Table(cols, metadata=_metadata(cfg, ps1=cfg.ps1, ps2=cfg.ps2))
    sol = numerics.solve_mu(params, cfg.target_op)
    table.add(target_op=cfg.target_op, mu=sol.cutoff, achieved=sol.achieved,
              iterations=sol.iterations, residual=sol.residual,
              avg_relay_power=analytic.avg_relay_power(params, sol.cutoff),
              op_floor=analytic.outage_floor(params))
    return table


def run_outage_curve(cfg: RunConfig) -> Table:
    """Outage of the proposed OPA and of a constant-power relay vs average relay power."""
    params = _params(cfg)
    cols = ["pavg_db", "pavg", "method", "rho", "budget_slack", "op_opa", "op_fpa",
            "op_opa_mc", "op_opa_mc_stderr", "op_fpa_mc", "op_fpa_mc_stderr",
            "avg_power_mc", "avg_power_mc_stderr"]
    table = Table(cols, metadata=_metadata(cfg, ps1=cfg.ps1, ps2=cfg.ps2,
                                           sweep_axis="average relay power in dB"))
    for pavg_db in cfg.effective_sweep().values():
        pavg = db_to_linear(pavg_db)
        row = dict(pavg_db=pavg_db, pavg=pavg)
        if params.balanced:
            rho, slack = _solve_rho_capped(params, pavg)
            row.update(method="analytic", rho=rho, budget_slack=slack,
                       op_opa=analytic.outage_probability(params, rho),
                       op_fpa=analytic.outage_probability(params, pavg))
        else:
            rho = montecarlo.solve_rho_mc(params, pavg, cfg.n_samples, cfg.seed).cutoff
            row.update(method="monte_carlo", rho=rho)
        paired = montecarlo.evaluate_paired(
            {"opa": montecarlo.policy_evaluator(params, OPA(rho)),
             "fpa": montecarlo.policy_evaluator(params, Fixed(pavg))},
            cfg.omega_x, cfg.omega_y, cfg.n_samples, cfg.seed, cfg.workers,
        )
        row.update(op_opa_mc=paired["opa"].outage_estimate,
                   op_opa_mc_stderr=paired["opa"].outage_stderr,
                   op_fpa_mc=paired["fpa"].outage_estimate,
                   op_fpa_mc_stderr=paired["fpa"].outage_stderr,
                   avg_power_mc=paired["opa"].avg_power_estimate,
                   avg_power_mc_stderr=paired["opa"].avg_power_stderr)
        table.add(**row)
    return table


VALIDATE_RHOS = (0.5, 1.0, 2.0, 5.0, 10.0)
CORNER_RHOS = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0)


def run_validate(cfg: RunConfig) -> Table:
    """Cross-check the closed-form results against each other and against Monte Carlo."""
    params = _params(cfg)
    table = Table(["check", "case", "deviation", "tolerance", "passed"],
                  metadata=_metadata(cfg, ps1=cfg.ps1, ps2=cfg.ps2))

    def check(name, case, dev, tol):
        table.add(check=name, case=case, deviation=float(dev), tolerance=float(tol),
                  passed=bool(dev <= tol))

    n, seed = cfg.n_samples, cfg.seed
    x, y = montecarlo.sample_states(params.omega_x, params.omega_y, min(n, 10**5), seed)
    pst = short_term_power_array(params, x, y)
    for rho in VALIDATE_RHOS:
        o_opa = montecarlo.policy_evaluator(params, OPA(rho))(x, y)[0]
        o_fix = montecarlo.policy_evaluator(params, Fixed(rho))(x, y)[0]
        check("fixed_vs_opa_indicator", f"rho={rho:g}", float(np.sum(o_opa != o_fix)), 0.0)

    if not params.balanced:
        table.metadata["skipped"] = "analytic checks (params not balanced)"
        for p_avg in (0.1, 1.0):
            sol = montecarlo.solve_rho_mc(params, p_avg, n, seed)
            check("mc_budget_met", f"pavg={p_avg:g}", abs(sol.achieved - p_avg) / p_avg, 0.01)
        a = montecarlo.evaluate_policy(params, OPA(1.0), min(n, 10**5), seed)
        b = montecarlo.evaluate_policy(params, OPA(1.0), min(n, 10**5), seed, workers=2)
        check("mc_reproducible", "rho=1 workers 1 vs 2", float(a != b), 0.0)
        return table

    for rho in CORNER_RHOS:
        lam = analytic.lambda_cutoff(params, rho) * cfg.corrupt_lambda
        p = float(short_term_power_array(params, lam, lam))
        check("corner_identity", f"rho={rho:g}", abs(p - rho) / rho, 1e-9)

    paired = montecarlo.evaluate_paired(
        {str(r): montecarlo.policy_evaluator(params, OPA(r)) for r in VALIDATE_RHOS},
        params.omega_x, params.omega_y, n, seed, cfg.workers,
    )
    ops, pws = [], []
    for rho in VALIDATE_RHOS:
        ev = paired[str(rho)]
        op = analytic.outage_probability(params, rho)
        pw = analytic.avg_relay_power(params, rho)
        ops.append(op)
        pws.append(pw)
        check("mc_vs_outage", f"rho={rho:g}", abs(ev.outage_estimate - op),
              SIGMA * ev.outage_stderr)
        check("mc_vs_avg_power", f"rho={rho:g}", abs(ev.avg_power_estimate - pw),
              SIGMA * ev.avg_power_stderr)
    check("outage_decreasing", "rho grid", float(not all(np.diff(ops) < 0)), 0.0)
    check("power_increasing", "rho grid", float(not all(np.diff(pws) > 0)), 0.0)

    floor = analytic.outage_floor(params)
    check("floor_attained", "rho=1e6", analytic.outage_probability(params, 1e6) - floor, 1e-3)

    # Duality: outage target -> mu -> its average power -> rho must give back mu
    target = analytic.outage_probability(params, 2.0)
    mu = numerics.solve_mu(params, target).cutoff
    rho = numerics.solve_rho(params, analytic.avg_relay_power(params, mu)).cutoff
    check("duality_round_trip", f"target={target:.6g}", abs(rho - mu) / mu, 1e-6)
    return table


RUNNERS = {
    "scenario1": run_scenario1,
    "scenario2": run_scenario2,
    "solve-rho": run_solve_rho,
    "solve-mu": run_solve_mu,
    "outage-curve": run_outage_curve,
    "validate": run_validate,
}

_PLOTS = {
    "scenario1": ("pt_db", ["op_opa", "op_fpa", "op_st_mc", "op_floor"], True),
    "scenario2": ("target_op", ["gain_db", "p2p_gain_db"], False),
    "outage-curve": ("pavg_db", ["op_opa", "op_fpa", "op_opa_mc"], True),
}


class _Parser(argparse.ArgumentParser):
    # usage errors are config errors (argparse would exit 2, our numerical-failure code)
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="afrelay", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="key=value configuration file")
    ap.add_argument("--out", help="output path (default: stdout)")
    ap.add_argument("--format", choices=("csv", "json"))
    ap.add_argument("--seed", type=int)
    ap.add_argument("--samples", type=int)
    ap.add_argument("--workers", type=int)
    ap.add_argument("--sweep", help="start:stop:points[:log]")
    for name in ("ps1", "ps2", "pavg"):
        g = ap.add_mutually_exclusive_group()
        g.add_argument(f"--{name}", type=float, help=f"{name} (linear)")
        g.add_argument(f"--{name}-db", type=float, help=f"{name} in dB")
    ap.add_argument("--r01", type=float)
    ap.add_argument("--r02", type=float)
    ap.add_argument("--omega-x", type=float)
    ap.add_argument("--omega-y", type=float)
    ap.add_argument("--target-op", type=float)
    ap.add_argument("--gnuplot", action="store_true", help="also write <out>.gp")
    ap.add_argument("--fixed-end-nodes", action="store_true",
                    help="scenario2: keep --ps1/--ps2 instead of tying them to mu")
    ap.add_argument("--corrupt-lambda", type=float, help=argparse.SUPPRESS)
    return ap


def config_from_args(args: argparse.Namespace) -> RunConfig:
    file_values = read_config_file(args.config) if args.config else {}
    pairs = []
    for key in ("ps1", "ps2", "pavg", "ps1_db", "ps2_db", "pavg_db", "r01", "r02",
                "omega_x", "omega_y", "target_op", "seed", "samples", "workers",
                "out", "format", "sweep", "corrupt_lambda"):
        v = getattr(args, key)
        if v is not None:
            pairs.append((key, str(v) if not isinstance(v, float) else repr(v)))
    flag_values = parse_assignments(pairs, "command line")
    if args.gnuplot:
        flag_values["gnuplot"] = True
    if args.fixed_end_nodes:
        flag_values["couple_end_nodes"] = False
    return build_config(args.command, file_values, flag_values)


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = config_from_args(args)
        table = RUNNERS[cfg.command](cfg)
    except (ConfigError, InvalidArgument, UnsupportedConfiguration, InfeasibleTarget) as exc:
        print(f"afrelay: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"afrelay: numerical failure: {exc} {exc.diagnostics}", file=sys.stderr)
        return EXIT_NUMERICAL

    text = table.render(cfg.format)
    if cfg.output_path:
        _write(cfg.output_path, text)
        if cfg.gnuplot and cfg.command in _PLOTS:
            x, ys, logy = _PLOTS[cfg.command]
            _write(cfg.output_path + ".gp",
                   gnuplot_script(table, cfg.output_path, x, ys, logy, title=cfg.command))
    else:
        sys.stdout.write(text)

    if cfg.command == "validate":
        failed = [r for r in table.rows if not r["passed"]]
        for r in failed:
            print(f"FAILED {r['check']} [{r['case']}]: {r['deviation']:.3g} > "
                  f"{r['tolerance']:.3g}", file=sys.stderr)
        if failed:
            return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
