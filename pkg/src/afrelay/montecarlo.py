"""Rayleigh block-fading Monte Carlo evaluator.

Samples are produced in fixed-size blocks. Block ``b`` always comes from a
Philox stream keyed by the seed with counter offset ``b``, so the global
sample sequence does not depend on how blocks are spread over workers.
Per-block sums are merged in block order, which keeps every estimate
bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .errors import InvalidArgument
from .model import ChannelState, SystemParams, outage_raw, snr_threshold
from .policies import RelayPolicy, short_term_power_array

BLOCK_SIZE = 1 << 16
SEED_MASK = (1 << 64) - 1

# An evaluator maps sampled gains (x, y) to (outage indicator, relay power).
Evaluator = Callable[[np.ndarray, np.ndarray], "tuple[np.ndarray, np.ndarray]"]


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & SEED_MASK, counter=[0, block, 0, 0]))


def sample_channel(omega_x: float, omega_y: float, rng: np.random.Generator, size=None):
    """Independent exponential gains by inverse CDF, ``x = -omega_x * ln(u)``.

    ``u`` is uniform on (0, 1].
    """
    if omega_x <= 0 or omega_y <= 0:
        raise InvalidArgument("mean channel gains must be positive")
    x = -omega_x * np.log1p(-rng.random(size))
    y = -omega_y * np.log1p(-rng.random(size))
    if size is None:
        return ChannelState(float(x), float(y))
    return ChannelState(x, y)


def _block_sizes(n):
    nb = -(-n // BLOCK_SIZE)
    return [min(BLOCK_SIZE, n - b * BLOCK_SIZE) for b in range(nb)]


def sample_block(omega_x, omega_y, seed, block, size):
    st = sample_channel(omega_x, omega_y, block_rng(seed, block), size)
    return st.x, st.y


def sample_states(omega_x: float, omega_y: float, n: int, seed: int):
    """The first ``n`` samples of the global sequence for ``seed`` as arrays."""
    xs, ys = [], []
    for b, m in enumerate(_block_sizes(n)):
        x, y = sample_block(omega_x, omega_y, seed, b, m)
        xs.append(x)
        ys.append(y)
    return np.concatenate(xs), np.concatenate(ys)


@dataclass(frozen=True)
class EvalResult:
    outage_estimate: float
    outage_stderr: float
    avg_power_estimate: float
    avg_power_stderr: float
    n_samples: int
    seed: int


@dataclass(frozen=True)
class PairedResult:
    """Estimates for several evaluators run on common random numbers."""

    names: tuple
    results: Mapping[str, EvalResult]
    joint_outage: np.ndarray  # P(outage_i and outage_j)
    n_samples: int

    def __getitem__(self, name) -> EvalResult:
        return self.results[name]

    def outage_difference(self, a: str, b: str):
        """Mean and standard error of ``outage_a - outage_b`` (paired)."""
        i, j = self.names.index(a), self.names.index(b)
        pa, pb = self.joint_outage[i, i], self.joint_outage[j, j]
        d = pa - pb
        e2 = pa + pb - 2.0 * self.joint_outage[i, j]
        n = self.n_samples
        var = max(e2 - d * d, 0.0) * n / (n - 1) if n > 1 else 0.0
        return float(d), math.sqrt(var / n)


def _block_stats(evaluators, omega_x, omega_y, seed, block, size):
    x, y = sample_block(omega_x, omega_y, seed, block, size)
    outs, sums, sqs = [], [], []
    for ev in evaluators:
        o, p = ev(x, y)
        p = np.asarray(p, dtype=float)
        outs.append(np.asarray(o, dtype=np.float64))
        mean = float(p.mean())
        sums.append(mean)
        sqs.append(float(((p - mean) ** 2).sum()))
    o = np.stack(outs)
    joint = o @ o.T
    return size, joint, np.array(sums), np.array(sqs)


def evaluate_paired(evaluators: Mapping[str, Evaluator], omega_x: float, omega_y: float,
                    n: int, seed: int, workers: int = 1) -> PairedResult:
    """Run every evaluator on the same ``n`` channel samples."""
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    names = tuple(evaluators)
    evs = [evaluators[k] for k in names]
    sizes = _block_sizes(n)
    job = [(evs, omega_x, omega_y, seed, b, m) for b, m in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            stats = list(pool.map(lambda a: _block_stats(*a), job))
    else:
        stats = [_block_stats(*a) for a in job]

    k = len(names)
    joint = np.zeros((k, k))
    count = 0
    mean = np.zeros(k)
    m2 = np.zeros(k)
    # Chan et al. pairwise update, applied in block order
    for size, j, bmean, bm2 in stats:
        joint += j
        tot = count + size
        delta = bmean - mean
        mean = mean + delta * (size / tot)
        m2 = m2 + bm2 + delta * delta * (count * size / tot)
        count = tot

    joint /= n
    results = {}
    for i, name in enumerate(names):
        p = float(joint[i, i])
        var_o = p * (1.0 - p) * n / (n - 1) if n > 1 else 0.0
        var_p = m2[i] / (n - 1) if n > 1 else 0.0
        results[name] = EvalResult(
            outage_estimate=p,
            outage_stderr=math.sqrt(var_o / n),
            avg_power_estimate=float(mean[i]),
            avg_power_stderr=math.sqrt(max(var_p, 0.0) / n),
            n_samples=n,
            seed=seed,
        )
    return PairedResult(names, results, joint, n)


def policy_evaluator(params: SystemParams, policy: RelayPolicy) -> Evaluator:
    def ev(x, y):
        p = policy.power_array(params, x, y)
        return outage_raw(params.p_s1, params.p_s2, p, x, y, params.delta1, params.delta2), p

    return ev


def baseline_evaluator(p_total: float, delta1: float, delta2: float) -> Evaluator:
    """Short-term total-power baseline: per-state split of ``p_total``."""
    if not p_total > 0:
        raise InvalidArgument("p_total must be positive")

    def ev(x, y):
        sx, sy = np.sqrt(x), np.sqrt(y)
        denom = sx + sy
        dead = denom == 0
        denom = np.where(dead, 1.0, denom)
        half = 0.5 * p_total
        p_s1 = half * sy / denom
        p_s2 = half - p_s1
        out = outage_raw(p_s1, p_s2, half, x, y, delta1, delta2) | dead
        return out, np.full(x.shape, half)

    return ev


def evaluate_policy(params: SystemParams, policy: RelayPolicy, n: int, seed: int,
                    workers: int = 1) -> EvalResult:
    """Empirical outage probability and mean relay power of ``policy``."""
    return evaluate_paired(
        {"policy": policy_evaluator(params, policy)},
        params.omega_x, params.omega_y, n, seed, workers,
    )["policy"]


def evaluate_short_term_baseline(p_total: float, r01: float, r02: float,
                                 omega_x: float, omega_y: float, n: int, seed: int,
                                 workers: int = 1) -> EvalResult:
    ev = baseline_evaluator(p_total, snr_threshold(r01), snr_threshold(r02))
    return evaluate_paired({"baseline": ev}, omega_x, omega_y, n, seed, workers)["baseline"]


@dataclass(frozen=True)
class EmpiricalCutoff:
    cutoff: float
    achieved: float
    n_samples: int
    seed: int


def solve_rho_mc(params: SystemParams, p_avg: float, n: int, seed: int) -> EmpiricalCutoff:
    """Cutoff meeting ``p_avg`` on a fixed sample set; works for unbalanced params.

    The empirical mean power is a step function of the cutoff, so it is
    inverted exactly: sort the finite short-term powers and take the largest
    cutoff whose cumulative spend stays within the budget.
    """
    if not p_avg > 0:
        raise InvalidArgument("p_avg must be positive")
    x, y = sample_states(params.omega_x, params.omega_y, n, seed)
    pst = short_term_power_array(params, x, y)
    pst = np.sort(pst[np.isfinite(pst)])
    if pst.size == 0:
        raise InvalidArgument("no feasible state in the sample set")
    spend = np.cumsum(pst) / n
    k = int(np.searchsorted(spend, p_avg, side="right"))
    if k == 0:
        cutoff = float(pst[0]) * 0.5
        achieved = 0.0
    else:
        cutoff = float(pst[k - 1])
        achieved = float(spend[k - 1])
    return EmpiricalCutoff(cutoff, achieved, n, seed)
