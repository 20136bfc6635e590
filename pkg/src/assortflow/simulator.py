"""Monte Carlo of the stochastic consumption process, plus an exact DP for tiny cases.

Replications run in fixed blocks, each with its own generator seeded from
(seed, block index), so results do not depend on the thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .catalog import Catalog, CustomerTypes, Demand, single_type
from .choice import TIE_TOL
from .da_planner import _threads
from .policies import SamplingPolicy

BLOCK = 4096
DP_STATE_CAP = 100_000
DP_T_CAP = 50
DP_WORK_CAP = 50_000_000  # states x horizon for expectations over random T


@dataclass(frozen=True)
class SimResult:
    mean: float
    stderr: float
    reps: int
    consumption: np.ndarray  # mean units sold per product (internal order)
    seed: int


def _greedy_mask(prices, V, avail):
    w = V * avail
    R = np.cumsum(w * prices, axis=1) / (1.0 + np.cumsum(w, axis=1))
    R = np.where(avail, R, -np.inf)
    best = R.max(axis=1, initial=-np.inf)
    cut = np.argmax(R >= best[:, None] - TIE_TOL, axis=1)
    keep = np.arange(avail.shape[1])[None, :] <= cut[:, None]
    return avail & keep & (best > TIE_TOL)[:, None]


def _run_block(types: CustomerTypes, c, policy, demand: Demand, size: int, rng):
    n, m = types.n, types.m
    r = types.prices
    T = demand.sample(rng, size)
    inv = np.tile(np.asarray(c, dtype=np.int64), (size, 1))
    revenue = np.zeros(size)
    lam_cdf = np.cumsum(types.lam)
    if isinstance(policy, SamplingPolicy):
        masks = [np.array([[i in S for i in range(n)] for S in sets], dtype=bool) for sets in policy.assortments]
        cdfs = [np.cumsum(p) for p in policy.probs]
    rows = np.arange(size)
    for t in range(int(T.max(initial=0))):
        u_type, u_set, u_buy = rng.random(size), rng.random(size), rng.random(size)
        k = np.minimum(np.searchsorted(lam_cdf, u_type, side="right"), m - 1)
        V = types.weights[k]
        avail = inv > 0
        if policy == "all":
            offer = avail
        elif policy == "greedy":
            offer = _greedy_mask(r, V, avail)
        else:
            offer = np.zeros_like(avail)
            for kk in range(m):
                sel = k == kk
                j = np.minimum(np.searchsorted(cdfs[kk], u_set[sel], side="right"), len(cdfs[kk]) - 1)
                offer[sel] = masks[kk][j] & avail[sel]
        w = V * offer
        cdf = np.cumsum(w, axis=1) / (1.0 + w.sum(axis=1))[:, None]
        pick = (u_buy[:, None] >= cdf).sum(axis=1)
        buy = (pick < n) & (T > t)
        inv[rows[buy], pick[buy]] -= 1
        revenue[buy] += r[pick[buy]]
    sold = np.asarray(c, dtype=np.int64)[None, :] - inv
    return revenue, sold.sum(axis=0)


def _simulate(types, c, policy, demand, reps, seed, threads) -> SimResult:
    if reps < 1:
        raise ValueError("reps must be at least 1")
    c = np.round(np.asarray(c, dtype=float)).astype(np.int64)
    sizes = [min(BLOCK, reps - b) for b in range(0, reps, BLOCK)]
    job = lambda b: _run_block(types, c, policy, demand, sizes[b], np.random.default_rng([seed, b]))
    with ThreadPoolExecutor(_threads(threads)) as pool:
        parts = list(pool.map(job, range(len(sizes))))
    revenue = np.concatenate([p[0] for p in parts])
    sold = np.sum([p[1] for p in parts], axis=0)
    stderr = float(revenue.std(ddof=1) / np.sqrt(reps)) if reps > 1 else 0.0
    return SimResult(float(revenue.mean()), stderr, reps, sold / reps, seed)


def simulate_da(catalog: Catalog, c, demand: Demand, reps: int, seed: int, threads: int | None = None) -> SimResult:
    return _simulate(single_type(catalog), c, "all", demand, reps, seed, threads)


def simulate_dap(
    types: CustomerTypes, c, policy, demand: Demand, reps: int, seed: int, threads: int | None = None
) -> SimResult:
    """`policy` is a SamplingPolicy, "greedy", or "all" (offer every in-stock product)."""
    if not (isinstance(policy, SamplingPolicy) or policy in ("greedy", "all")):
        raise ValueError(f"unknown policy {policy!r}")
    return _simulate(types, c, policy, demand, reps, seed, threads)


# --- exact dynamic program ---------------------------------------------------


def _consumption_by_horizon(catalog: Catalog, c, t_max: int, t_cap: int | None = DP_T_CAP) -> np.ndarray:
    """Row t holds the exact expected units sold of each product with t customers."""
    c = np.round(np.asarray(c, dtype=float)).astype(int)
    n = len(c)
    dims = c + 1
    states = int(np.prod(dims))
    too_long = t_max > t_cap if t_cap is not None else states * t_max > DP_WORK_CAP
    if states > DP_STATE_CAP or too_long:
        raise ValueError("instance too large for the exact DP")
    levels = np.stack(np.unravel_index(np.arange(states), dims), axis=1)
    strides = np.array([int(np.prod(dims[i + 1:])) for i in range(n)])
    avail = levels > 0
    w = catalog.weights * avail
    P = w / (1.0 + w.sum(axis=1))[:, None]
    P0 = 1.0 - P.sum(axis=1)
    nxt = np.where(avail, np.arange(states)[:, None] - strides[None, :], 0)
    full = states - 1
    V = np.zeros((states, n))
    out = np.zeros((t_max + 1, n))
    for t in range(1, t_max + 1):
        new = P0[:, None] * V + P  # immediate sale of the chosen product
        for i in range(n):
            new += P[:, [i]] * V[nxt[:, i]]
        V = new
        out[t] = V[full]
    return out


def exact_da_consumption(catalog: Catalog, c, T: int) -> np.ndarray:
    return _consumption_by_horizon(catalog, c, int(T))[int(T)]


def exact_da_revenue(catalog: Catalog, c, T: int) -> float:
    return float(np.dot(catalog.prices, exact_da_consumption(catalog, c, T)))


def expected_da_consumption(catalog: Catalog, c, demand: Demand) -> np.ndarray:
    table = _consumption_by_horizon(catalog, c, demand.t_max, t_cap=None)
    return demand.pmf @ table
