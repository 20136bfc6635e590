"""Fluid relaxation solvers for the sales-based LP.

The fast solver exploits the revenue-ordered structure of an optimal
fractional inventory: full stock of the most expensive products, one partial
product, nothing below it. Two slower routes (golden-section over the
no-purchase mass, and a dense simplex) serve as references.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import lp
from .catalog import Catalog, CustomerTypes
from .fluid import FluidTrace, phase_revenues, sequence

INCLUDE_TOL = 1e-12
DESK_CAP = 200


@dataclass(frozen=True)
class RevenueOrderedInventory:
    threshold: int | None  # internal index of the last stocked product, None if empty
    x: np.ndarray


@dataclass(frozen=True)
class SblpSolution:
    sales: np.ndarray
    no_purchase: float
    objective: float
    trace: FluidTrace


def _prefix(c: np.ndarray, pos: np.ndarray, k: int) -> np.ndarray:
    x = np.zeros_like(c)
    x[pos[:k]] = c[pos[:k]]
    return x


def best_tail(catalog: Catalog, trace: FluidTrace, i: int, cap: float) -> float:
    """Smallest y in [0, cap] maximizing the gain of serving the last y customers product i.

    The gain is the integral of r_i - R(S(t)) over the final y units of time.
    """
    if cap <= 0 or len(trace.durations) == 0:
        return 0.0
    slopes = (catalog.prices[i] - phase_revenues(catalog, trace))[::-1]
    lengths = trace.durations[::-1]
    knots = np.concatenate([[0.0], np.cumsum(lengths)])
    gains = np.concatenate([[0.0], np.cumsum(slopes * lengths)])
    inside = knots < cap
    ys = np.concatenate([knots[inside], [cap]])
    j = int(np.sum(inside)) - 1
    gs = np.concatenate([gains[inside], [gains[j] + slopes[j] * (cap - knots[j]) if j < len(slopes) else gains[j]]])
    top = gs.max()
    return float(ys[np.argmax(gs >= top - INCLUDE_TOL * max(1.0, abs(top)))])


def _snap(value: float, hi: float) -> float:
    value = min(max(value, 0.0), hi)
    r = round(value)
    if abs(value - r) <= INCLUDE_TOL * max(1.0, abs(value)):
        return float(r)
    return value


def solve_sblp_fast(catalog: Catalog, c, T: float) -> tuple[RevenueOrderedInventory, SblpSolution]:
    c = np.asarray(c, dtype=float)
    r = catalog.prices
    pos = np.flatnonzero(c > 0)
    if T <= 0 or pos.size == 0:
        x = np.zeros_like(c)
        tr = sequence(catalog, x, T)
        return RevenueOrderedInventory(None, x), SblpSolution(tr.consumption, tr.outside, 0.0, tr)

    def include(k: int) -> bool:
        # stock the k-th positive product if it beats the terminal assortment of the shorter prefix
        tr = sequence(catalog, _prefix(c, pos, k - 1), T)
        R = phase_revenues(catalog, tr)[-1] if len(tr.cuts) else 0.0
        return r[pos[k - 1]] >= R - INCLUDE_TOL

    lo, hi = 1, len(pos)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if include(mid):
            lo = mid
        else:
            hi = mid - 1

    last = int(pos[lo - 1])
    x = _prefix(c, pos, lo - 1)
    base = sequence(catalog, x, T)
    x_full = x.copy()
    x_full[last] = c[last]
    zmax = sequence(catalog, x_full, T).consumption[last]
    x[last] = _snap(best_tail(catalog, base, last, zmax), c[last])

    tr = sequence(catalog, x, T)
    sol = SblpSolution(tr.consumption, tr.outside, tr.revenue, tr)
    return RevenueOrderedInventory(last, x), sol


def f_lp(catalog: Catalog, c, T: float) -> float:
    return solve_sblp_fast(catalog, c, T)[1].objective


def knapsack_fixed_y0(catalog: Catalog, c, T: float, y0: float) -> tuple[float, np.ndarray]:
    """LP value with the no-purchase mass pinned at y0: a fractional knapsack in price order."""
    if y0 > T + 1e-12:
        raise ValueError("y0 exceeds T")
    c = np.asarray(c, dtype=float)
    caps = np.minimum(c, y0 * catalog.weights)
    room = max(T - y0, 0.0)
    before = np.cumsum(caps) - caps
    y = np.clip(room - before, 0.0, caps)
    return float(np.dot(catalog.prices, y)), y


@dataclass(frozen=True)
class ReferenceOptimum:
    objective: float
    y0: float


def single_type_reference(catalog: Catalog, c, T: float, tol: float = 1e-10) -> ReferenceOptimum:
    """Golden-section search over y0; the value is concave in y0."""
    g = lambda y0: knapsack_fixed_y0(catalog, c, T, y0)[0]
    a, b = 0.0, float(T)
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    p, q = b - phi * (b - a), a + phi * (b - a)
    gp, gq = g(p), g(q)
    while b - a > tol:
        if gp < gq:
            a, p, gp = p, q, gq
            q = a + phi * (b - a)
            gq = g(q)
        else:
            b, q, gq = q, p, gp
            p = b - phi * (b - a)
            gp = g(p)
    cands = [(g(y), y) for y in (0.0, float(T), (a + b) / 2)]
    best = max(cands, key=lambda t: t[0])
    return ReferenceOptimum(best[0], best[1])


@lru_cache(maxsize=1 << 16)
def _cached_value(prices: bytes, weights: bytes, row: bytes, H: float) -> float:
    cat = Catalog(np.frombuffer(prices), np.frombuffer(weights), np.zeros(0, dtype=int))
    return f_lp(cat, np.frombuffer(row), H)


def type_value(catalog: Catalog, row, H: float) -> float:
    """Memoized f_LP of one allocation row."""
    row = np.ascontiguousarray(row, dtype=float)
    if H <= 0 or not np.any(row > 0):
        return 0.0
    return _cached_value(catalog.prices.tobytes(), catalog.weights.tobytes(), row.tobytes(), float(H))


def multi_type_fhat(types: CustomerTypes, C, T: float) -> float:
    C = np.asarray(C, dtype=float)
    return float(sum(type_value(cat, C[k], types.lam[k] * T) for k, cat in enumerate(types.catalogs)))


@dataclass(frozen=True)
class MultiTypeSolution:
    objective: float
    sales: np.ndarray  # (m, n)
    no_purchase: np.ndarray  # (m,)


def multi_type_sblp_reference(types: CustomerTypes, c, T: float) -> MultiTypeSolution:
    """Exact multi-type sales LP by dense simplex; desk scale only."""
    m, n = types.m, types.n
    if m * n > DESK_CAP:
        raise ValueError(f"{m}x{n} exceeds the desk-scale cap of {DESK_CAP} sales variables")
    c = np.asarray(c, dtype=float)
    nv = m * n + m
    rows, rhs = [], []
    for i in range(n):
        a = np.zeros(nv)
        a[i:m * n:n] = 1.0
        rows.append(a)
        rhs.append(c[i])
    for k in range(m):
        for i in range(n):
            a = np.zeros(nv)
            a[k * n + i] = 1.0
            a[m * n + k] = -types.weights[k, i]
            rows.append(a)
            rhs.append(0.0)
    for k in range(m):
        # relaxed to <=; slack is absorbed by y_k0 below without losing feasibility
        a = np.zeros(nv)
        a[k * n:(k + 1) * n] = 1.0
        a[m * n + k] = 1.0
        rows.append(a)
        rhs.append(types.lam[k] * T)
    obj = np.concatenate([np.tile(types.prices, m), np.zeros(m)])
    value, sol = lp.maximize(obj, np.array(rows), np.array(rhs))
    sales = sol[: m * n].reshape(m, n)
    y0 = types.lam * T - sales.sum(axis=1)
    return MultiTypeSolution(value, sales, y0)
