"""Monte Carlo runs of the optimal online policy.

The policy is a non-homogeneous Markov chain on the running maximum ``M``:
with ``k`` draws left an arrival ``x`` is taken iff ``M <= x <= h_k(M)``.
Batches run many replicates side by side, one numpy operation per step, and
each replicate reads its draws from its own ``RngStream``.
"""

from __future__ import annotations

import os
from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .distribution import DistributionModel, cdf, to_exponential_coord
from .rng import RngStream, column_blocks, uniform_block
from .value_engine import ValueTable, _thresholds, accepts
from .variance_engine import step_moments

__all__ = [
    "EpisodeTrace",
    "simulate_episode",
    "simulate_traces",
    "simulate_batch",
    "simulate_poisson_horizon",
    "simulate_poisson_batch",
    "offline_lis",
    "offline_batch",
    "coupled_invariance_check",
    "coupled_invariance_batch",
    "worker_count",
    "poisson_size",
    "policy_decisions",
]

# replicates advanced together, and doubles per block of their draws (32 MB)
GROUP_SIZE = 2**16
BLOCK_ENTRIES = 2**22


@dataclass(frozen=True, eq=False)
class EpisodeTrace:
    """One run of the policy. Per-step arrays have length ``n``; state arrays ``n + 1``."""

    n: int
    draws: np.ndarray
    accepted: np.ndarray
    running_max: np.ndarray
    length: np.ndarray
    martingale: np.ndarray
    diffs: np.ndarray
    a_parts: np.ndarray
    b_parts: np.ndarray

    @property
    def final_length(self) -> int:
        return int(self.length[-1])


def worker_count() -> int:
    raw = os.environ.get("MONOSEQ_THREADS", "").strip()
    cap = int(raw) if raw else 0
    if cap < 0:
        raise ValueError("MONOSEQ_THREADS must be non-negative")
    return cap if cap > 0 else (os.cpu_count() or 1)


def _layers(vt: ValueTable, k: int):
    """Layers ``k - 1`` and ``k`` without filling the table's cache."""
    return vt.layer(k - 1, cache=False), vt.layer(k, cache=False)


def _step(vt: ValueTable, k: int, m: np.ndarray, x: np.ndarray, count: np.ndarray, live=None) -> None:
    """Advance states ``m`` in place by one draw with ``k`` draws left."""
    cand = x >= m
    if live is not None:
        cand &= live
    cand = np.flatnonzero(cand)
    if k > 1 and cand.size:
        prev = vt.layer(k - 1, cache=False)
        # only arrivals above the running maximum can be taken
        cand = cand[accepts(vt, k, m[cand], x[cand], prev)]
    m[cand] = x[cand]
    count[cand] += 1


def _run_group(vt: ValueTable, master_seed: int, lo: int, hi: int, series: bool, sizes=None):
    n = vt.horizon
    m = np.zeros(hi - lo)
    count = np.zeros(hi - lo, dtype=np.int64)
    vsum = np.zeros(hi - lo) if series else None
    width = max(1, min(n, BLOCK_ENTRIES // (hi - lo)))
    for first, block in column_blocks(master_seed, lo, hi, n, width):
        for c in range(block.shape[0]):
            i = first + c
            k = n - i
            if series:
                _, mean_a2, b = step_moments(vt, k, m)
                vsum += mean_a2 - b * b
            _step(vt, k, m, block[c], count, None if sizes is None else i < sizes)
    return count, vsum


def simulate_episode(vt: ValueTable, rng: RngStream, draws=None) -> EpisodeTrace:
    """Run the policy once and record the full martingale trace.

    ``draws`` overrides the stream, for hand-built examples.
    """
    n = vt.horizon
    x = rng.uniforms(n) if draws is None else np.asarray(draws, dtype=float)
    if x.shape != (n,):
        raise ValueError(f"expected {n} draws, got shape {x.shape}")
    if np.any((x < 0.0) | (x >= 1.0)):
        raise ValueError("draws must lie in [0, 1)")
    m = np.zeros(n + 1)
    length = np.zeros(n + 1, dtype=np.int64)
    y = np.zeros(n + 1)
    acc = np.zeros(n, dtype=bool)
    a = np.zeros(n)
    b = np.zeros(n)
    y[0] = vt.values[n, 0]
    for i in range(1, n + 1):
        k = n - i + 1
        prev, cur = vt.layer(k - 1), vt.layer(k)
        s = m[i - 1]
        vs = prev(s)
        b[i - 1] = vs - cur(s)
        vx = prev(x[i - 1])
        gain = 1.0 + (vx - vs)
        take = bool(x[i - 1] >= s and gain >= 0.0)
        acc[i - 1] = take
        a[i - 1] = gain if take else 0.0
        m[i] = x[i - 1] if take else s
        length[i] = length[i - 1] + take
        y[i] = length[i] + (vx if take else vs)
    y[n] = length[n]
    return EpisodeTrace(n, x, acc, m, length, y, a + b, a, b)


def simulate_traces(vt: ValueTable, reps: int, master_seed: int) -> list[EpisodeTrace]:
    if reps < 1:
        raise ValueError("reps must be at least 1")
    return [simulate_episode(vt, RngStream(master_seed, r)) for r in range(reps)]


def _groups(reps: int):
    return [(lo, min(lo + GROUP_SIZE, reps)) for lo in range(0, reps, GROUP_SIZE)]


def _fan_out(job, groups, workers):
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(groups) == 1:
        return [job(g) for g in groups]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map keeps group order, so results line up with replicate indices
        return list(pool.map(job, groups))


def simulate_batch(vt: ValueTable, reps: int, master_seed: int, with_series: bool = False, workers=None):
    """``L_n`` for replicates ``0..reps-1``; with ``with_series`` also the sums
    of conditional increment variances.

    Output depends only on ``(table, reps, master_seed)``.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")

    def job(bounds):
        return _run_group(vt, master_seed, *bounds, with_series)

    parts = _fan_out(job, _groups(reps), workers)
    lengths = np.concatenate([p[0] for p in parts])
    if not with_series:
        return lengths
    return lengths, np.concatenate([p[1] for p in parts])


def poisson_size(rng: RngStream, nu: float) -> int:
    """Realized number of arrivals, from the replicate's side stream so the
    draws themselves match the fixed-horizon run."""
    return int(rng.side_generator().poisson(nu))


def _poisson_group(vt: ValueTable, nu: float, master_seed: int, lo: int, hi: int):
    sizes = np.array([poisson_size(RngStream(master_seed, r), nu) for r in range(lo, hi)])
    return _run_group(vt, master_seed, lo, hi, False, sizes)[0]


def simulate_poisson_horizon(vt: ValueTable, nu: float, rng: RngStream) -> int:
    """Selections made by the fixed-horizon policy on a Poisson(``nu``) number of arrivals.

    Arrivals after the ``n``-th are rejected.
    """
    if not nu > 0:
        raise ValueError("nu must be positive")
    lo = rng.replicate_index
    return int(_poisson_group(vt, nu, rng.master_seed, lo, lo + 1)[0])


def simulate_poisson_batch(vt: ValueTable, nu: float, reps: int, master_seed: int, workers=None) -> np.ndarray:
    if not nu > 0:
        raise ValueError("nu must be positive")
    if reps < 1:
        raise ValueError("reps must be at least 1")

    def job(bounds):
        return _poisson_group(vt, nu, master_seed, *bounds)

    return np.concatenate(_fan_out(job, _groups(reps), workers))


def offline_lis(draws) -> int:
    """Length of the longest non-decreasing subsequence (patience sorting)."""
    piles: list = []
    for x in draws:
        j = bisect_right(piles, x)
        if j == len(piles):
            piles.append(x)
        else:
            piles[j] = x
    return len(piles)


def offline_batch(n: int, reps: int, master_seed: int) -> np.ndarray:
    """Offline lengths on the same streams the online batch reads."""
    if reps < 1:
        raise ValueError("reps must be at least 1")
    return np.array([offline_lis(RngStream(master_seed, r).uniforms(n).tolist()) for r in range(reps)])


def _coupled_block(vt: ValueTable, draws: np.ndarray):
    """Acceptance matrices in uniform and in exponential coordinates."""
    reps, n = draws.shape
    tol = vt.grid.root_tolerance
    xe = to_exponential_coord(draws)
    mu = np.zeros(reps)
    me = np.zeros(reps)
    acc_u = np.zeros((reps, n), dtype=bool)
    acc_e = np.zeros((reps, n), dtype=bool)
    for i in range(n):
        k = n - i
        if k == 1:
            hu = np.ones(reps)
            he = np.full(reps, np.inf)
        else:
            prev = vt.layer(k - 1, cache=False)
            hu = _thresholds(prev, mu, prev(mu), tol)
            # same threshold read through the dictionary: exponential state -> uniform -> back
            su = cdf(DistributionModel.EXPONENTIAL_MEAN1, me)
            hmap = _thresholds(prev, su, prev(su), tol)
            with np.errstate(divide="ignore"):
                he = np.where(hmap >= 1.0, np.inf, -np.log1p(-np.minimum(hmap, 1.0)))
        x = draws[:, i]
        tu = (x >= mu) & (x <= hu)
        te = (xe[:, i] >= me) & (xe[:, i] <= he)
        acc_u[:, i] = tu
        acc_e[:, i] = te
        mu = np.where(tu, x, mu)
        me = np.where(te, xe[:, i], me)
    return acc_u, acc_e


def coupled_invariance_check(vt: ValueTable, rng: RngStream) -> bool:
    """Run one episode in both coordinate systems on the same draws; compare decisions."""
    acc_u, acc_e = _coupled_block(vt, rng.uniforms(vt.horizon)[None, :])
    return bool(np.array_equal(acc_u, acc_e))


def coupled_invariance_batch(vt: ValueTable, reps: int, master_seed: int) -> np.ndarray:
    """Per-replicate outcome of the coupled check for replicates ``0..reps-1``."""
    if reps < 1:
        raise ValueError("reps must be at least 1")
    acc_u, acc_e = _coupled_block(vt, uniform_block(master_seed, 0, reps, vt.horizon))
    return np.all(acc_u == acc_e, axis=1)


def policy_decisions(vt: ValueTable, draws) -> np.ndarray:
    """Acceptance mask of the policy for each row of a draw matrix."""
    draws = np.atleast_2d(np.asarray(draws, dtype=float))
    reps, n = draws.shape
    if n != vt.horizon:
        raise ValueError(f"expected {vt.horizon} draws per row, got {n}")
    m = np.zeros(reps)
    out = np.zeros((reps, n), dtype=bool)
    for i in range(n):
        k = n - i
        x = draws[:, i]
        if k == 1:
            take = x >= m
        else:
            prev = vt.layer(k - 1, cache=False)
            take = accepts(vt, k, m, x, prev)
        out[:, i] = take
        m = np.where(take, x, m)
    return out
