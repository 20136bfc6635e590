"""Inventory planning when every customer sees all in-stock products.

Pipeline: maximize the fixed-y0 knapsack surrogate greedily over a geometric
grid of y0 values, then round the single fractional product of the
revenue-ordered inventory. Very short horizons fall back to one unit of each
product in the best static assortment.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .catalog import Budget, Cardinality, Catalog, Constraint, Demand, is_ifr
from .cdlp import f_lp, knapsack_fixed_y0, solve_sblp_fast
from .choice import optimal_static_assortment
from .fluid import fp_revenue

DETERMINISTIC_FALLBACK = 4.0
IFR_FALLBACK = 5.15
GAIN_TOL = 1e-15


class UnsupportedDemand(ValueError):
    pass


@dataclass(frozen=True)
class DaPlan:
    inventory: np.ndarray
    objective: float  # f_LP of the inventory at the planning horizon
    horizon: float
    y0: float | None
    grid_index: int | None
    rounding: str  # "none", "floor", "ceil" or "static"
    fallback: bool


def _threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("ASSORTFLOW_THREADS", "1"))
    return max(1, threads)


def greedy_surrogate_max(catalog: Catalog, constraint: Constraint, T: float, y0: float) -> np.ndarray:
    n = catalog.n
    c = np.zeros(n)
    g = lambda c_: knapsack_fixed_y0(catalog, c_, T, y0)[0]
    eye = np.eye(n)

    def gains(c_):
        cur = g(c_)
        return np.array([g(c_ + eye[i]) - cur for i in range(n)])

    if isinstance(constraint, Cardinality):
        for _ in range(constraint.K):
            d = gains(c)
            c[int(np.argmax(d))] += 1  # first max, i.e. the higher price on ties
        return c

    costs = constraint.costs
    left = constraint.B
    while True:
        ok = costs <= left + 1e-12
        if not ok.any():
            break
        d = gains(c)
        score = np.where(ok, d / costs, -np.inf)
        i = int(np.argmax(score))
        c[i] += 1
        left -= costs[i]
    singles = [(g(eye[i]), i) for i in range(n) if costs[i] <= constraint.B + 1e-12]
    if singles:
        best, i = max(singles, key=lambda t: (t[0], -t[1]))
        if best > g(c) + GAIN_TOL:
            return eye[i].copy()
    return c


def y0_grid(T: float, eps: float) -> np.ndarray:
    count = max(1, math.ceil(math.log(T / eps) / math.log1p(eps))) if T > eps else 1
    return np.minimum(eps * (1.0 + eps) ** np.arange(count), T)


def optimize_da_fluid(
    catalog: Catalog, constraint: Constraint, T: float, eps: float, threads: int | None = None
) -> tuple[np.ndarray, float, float, int]:
    """Returns (inventory, f_LP value, chosen y0, grid index)."""
    if not 0 < eps < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    grid = y0_grid(T, eps)
    run = lambda y0: greedy_surrogate_max(catalog, constraint, T, y0)
    with ThreadPoolExecutor(_threads(threads)) as pool:
        cands = list(pool.map(run, grid))
    scores = [knapsack_fixed_y0(catalog, c, T, y0)[0] for c, y0 in zip(cands, grid)]
    u = int(np.argmax(scores))
    c = cands[u]
    return c, f_lp(catalog, c, T), float(grid[u]), u


def transform_round_bad(
    catalog: Catalog, c, T: float, constraint: Constraint | None = None
) -> tuple[np.ndarray, str]:
    """Round the fractional product of the revenue-ordered inventory both ways; keep the better."""
    ro, _ = solve_sblp_fast(catalog, c, T)
    x = ro.x
    frac = [i for i in range(len(x)) if abs(x[i] - round(x[i])) > 1e-9 * max(1.0, x[i])]
    if not frac:
        return np.round(x), "none"
    (i,) = frac
    lo, hi = x.copy(), x.copy()
    lo[i], hi[i] = math.floor(x[i]), math.ceil(x[i])
    lo, hi = np.round(lo), np.round(hi)
    if constraint is not None and not constraint.feasible(hi):
        return lo, "floor"
    if fp_revenue(catalog, hi, T) > fp_revenue(catalog, lo, T):
        return hi, "ceil"
    return lo, "floor"


def static_inventory(catalog: Catalog, constraint: Constraint) -> np.ndarray:
    if isinstance(constraint, Cardinality):
        S = optimal_static_assortment(catalog, max_size=constraint.K)
    elif isinstance(constraint, Budget):
        S = optimal_static_assortment(catalog, costs=constraint.costs, budget=constraint.B)
    else:
        S = optimal_static_assortment(catalog)
    c = np.zeros(catalog.n)
    c[list(S)] = 1.0
    return c


def solve_da(
    catalog: Catalog, constraint: Constraint, demand: Demand, eps: float, threads: int | None = None
) -> DaPlan:
    if demand.is_deterministic:
        T, threshold = float(demand.t_max), DETERMINISTIC_FALLBACK
    elif is_ifr(demand):
        T, threshold = demand.mean, IFR_FALLBACK
    else:
        raise UnsupportedDemand("DA requires IFR demand")

    if T < threshold:
        c = static_inventory(catalog, constraint)
        return DaPlan(c, f_lp(catalog, c, T), T, None, None, "static", True)

    c_fluid, _, y0, u = optimize_da_fluid(catalog, constraint, T, eps, threads)
    c, how = transform_round_bad(catalog, c_fluid, T, constraint)
    return DaPlan(c, f_lp(catalog, c, T), T, y0, u, how, False)
