"""Multi-type inventory planning by threshold augmentation.

Products are visited in descending price order. For each one we add the
largest number of units whose best fractional split across customer types
raises the summed per-type fluid value by at least the threshold per unit.

The value of giving u units of the cheapest stocked product i to one type is
concave in u. Serving the last y customers with i instead of the fluid
assortment gains the integral of r_i - R(S(t)) over that tail, so the curve is
read off the type's fluid trace; its concave pieces from all types then form a
fractional knapsack.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .catalog import Budget, Cardinality, Catalog, Constraint, CustomerTypes, Demand
from .cdlp import multi_type_fhat, type_value
from .da_planner import _threads
from .fluid import phase_revenues, sequence

SLOPE_TOL = 1e-12
ACCEPT_TOL = 1e-12


def type_pieces(catalog: Catalog, row, i: int, H: float) -> tuple[np.ndarray, np.ndarray]:
    """Concave pieces (lengths, slopes) of u -> f_LP(row + u e_i) - f_LP(row), positive slopes only."""
    row = np.asarray(row, dtype=float)
    if H <= 0:
        return np.zeros(0), np.zeros(0)
    if np.any(row[i + 1:] > 0):
        raise ValueError("product must be priced no higher than every allocated product")
    held = row[i]
    P = row.copy()
    P[i] = 0.0
    tr = sequence(catalog, P, H)
    base = type_value(catalog, P, H)
    big = P.copy()
    big[i] = H + 1.0
    beta = float(sequence(catalog, big, H).consumption[i])

    # F(y) = FP(P + y e_i) on [0, beta], built from the trace tail backwards
    slopes = (catalog.prices[i] - phase_revenues(catalog, tr))[::-1]
    knots = np.concatenate([[0.0], np.cumsum(tr.durations[::-1])])
    vals = tr.revenue + np.concatenate([[0.0], np.cumsum(slopes * tr.durations[::-1])])
    inside = knots < beta
    j = int(inside.sum()) - 1
    ys = np.concatenate([knots[inside], [beta]])
    end = vals[j] + (slopes[j] * (beta - knots[j]) if j < len(slopes) else 0.0)
    Fs = np.concatenate([vals[inside], [end]])

    # upper envelope max(base, running max of F)
    us, Vs = [0.0], [max(base, Fs[0])]
    for a in range(len(ys) - 1):
        ya, yb, Fa, Fb = ys[a], ys[a + 1], Fs[a], Fs[a + 1]
        level = Vs[-1]
        if Fb > level + SLOPE_TOL * max(1.0, abs(level)):
            cross = ya if Fa >= level else ya + (level - Fa) * (yb - ya) / (Fb - Fa)
            if cross > us[-1]:
                us.append(cross)
                Vs.append(level)
            us.append(yb)
            Vs.append(Fb)
    us, Vs = np.array(us), np.array(Vs)

    # shift by the units already held
    if held >= us[-1]:
        return np.zeros(0), np.zeros(0)
    k = int(np.searchsorted(us, held, side="right"))
    start = np.interp(held, us, Vs)
    us = np.concatenate([[held], us[k:]])
    Vs = np.concatenate([[start], Vs[k:]])
    lengths = np.diff(us)
    keep = lengths > 0
    lengths = lengths[keep]
    sl = np.diff(Vs)[keep] / lengths
    pos = sl > SLOPE_TOL
    return lengths[pos], sl[pos]


@dataclass(frozen=True)
class BenefitCurve:
    """Concave gain of z units of one product split across types, for one horizon."""

    m: int
    owner: np.ndarray
    lengths: np.ndarray
    slopes: np.ndarray

    @property
    def absorbable(self) -> float:
        return float(self.lengths.sum())

    def evaluate(self, z: float) -> tuple[float, np.ndarray]:
        take = np.clip(z - (np.cumsum(self.lengths) - self.lengths), 0.0, self.lengths)
        alloc = np.bincount(self.owner, weights=take, minlength=self.m).astype(float)
        gain = float(np.dot(take, self.slopes))
        # surplus units cannot add value anywhere; park them without changing f-hat
        alloc[0] += max(z - alloc.sum(), 0.0)
        return gain, alloc


def benefit_curve(types: CustomerTypes, C, i: int, T: float) -> BenefitCurve:
    C = np.asarray(C, dtype=float)
    owner, lengths, slopes = [], [], []
    for k, cat in enumerate(types.catalogs):
        ln, sl = type_pieces(cat, C[k], i, types.lam[k] * T)
        owner += [k] * len(ln)
        lengths.append(ln)
        slopes.append(sl)
    owner = np.array(owner, dtype=int)
    lengths = np.concatenate(lengths) if lengths else np.zeros(0)
    slopes = np.concatenate(slopes) if slopes else np.zeros(0)
    # concave per type, so a stable sort keeps every type's pieces in sequence
    o = np.lexsort((np.arange(len(slopes)), -slopes))
    return BenefitCurve(types.m, owner[o], lengths[o], slopes[o])


def calculate_benefit(types: CustomerTypes, C, z: float, i: int, T: float) -> tuple[float, np.ndarray]:
    """Best f-hat gain from z units of product i and the per-type allocation achieving it."""
    return benefit_curve(types, C, i, T).evaluate(z)


def _largest_accepted(curves, weights, threshold: float, cap: int) -> tuple[int, list[np.ndarray]]:
    gain = lambda z: sum(w * cv.evaluate(z)[0] for w, cv in zip(weights, curves))
    reach = max((cv.absorbable for cv in curves), default=0.0)
    lo, hi = 0, min(int(cap), math.ceil(reach - 1e-9))
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if gain(mid) >= mid * threshold - ACCEPT_TOL * max(1.0, mid * threshold):
            lo = mid
        else:
            hi = mid - 1
    return lo, [cv.evaluate(lo)[1] for cv in curves]


def get_number(types: CustomerTypes, C, tau: float, cap: int, i: int, T: float) -> tuple[int, np.ndarray]:
    """Largest z <= cap whose best split gains at least z * tau."""
    z, (alloc,) = _largest_accepted([benefit_curve(types, C, i, T)], [1.0], tau, cap)
    return z, alloc


@dataclass(frozen=True)
class Horizons:
    """Support points of T with their probabilities (a single point when deterministic)."""

    values: np.ndarray
    weights: np.ndarray

    @classmethod
    def of(cls, demand: Demand) -> "Horizons":
        s = demand.support
        return cls(s.astype(float), demand.pmf[s])

    @classmethod
    def fixed(cls, T: float) -> "Horizons":
        return cls(np.array([float(T)]), np.array([1.0]))


def expected_fhat(types: CustomerTypes, family: np.ndarray, hz: Horizons) -> float:
    return float(sum(w * multi_type_fhat(types, C, T) for C, T, w in zip(family, hz.values, hz.weights)))


def threshold_add(
    types: CustomerTypes, constraint: Constraint, tau: float, hz: Horizons
) -> tuple[np.ndarray, np.ndarray]:
    """One descending-price pass; returns (c, allocation family with one m x n matrix per horizon)."""
    n, m = types.n, types.m
    c = np.zeros(n)
    family = np.zeros((len(hz.values), m, n))
    if not np.isfinite(tau):
        return c, family
    for i in range(n):
        if isinstance(constraint, Cardinality):
            cap, thr = constraint.K - int(c.sum()), tau
        else:
            cost = constraint.costs[i]
            cap = int(math.floor((constraint.B - constraint.usage(c)) / cost + 1e-9))
            thr = cost * tau
        if cap <= 0:
            continue
        curves = [benefit_curve(types, C, i, T) for C, T in zip(family, hz.values)]
        z, allocs = _largest_accepted(curves, hz.weights, thr, cap)
        if z:
            c[i] = z
            for s, a in enumerate(allocs):
                family[s][:, i] += a
    return c, family


@dataclass(frozen=True)
class DapPlan:
    inventory: np.ndarray
    allocation: np.ndarray  # (len(horizons), m, n)
    horizons: Horizons
    objective: float
    tau: float | None
    grid_index: int | None
    singleton: bool


def tau_grid(best_single: float, constraint: Constraint, eps: float) -> np.ndarray:
    if isinstance(constraint, Cardinality):
        start, span = best_single / max(constraint.K, 1), max(constraint.K, 1)
    else:
        start, span = best_single / constraint.B, constraint.B / float(np.min(constraint.costs))
    count = max(1, math.ceil(math.log(span) / math.log1p(eps))) if span > 1 else 1
    return start * (1.0 + eps) ** np.arange(count)


def optimize_dap(
    types: CustomerTypes,
    constraint: Constraint,
    demand: Demand | None = None,
    eps: float = 0.05,
    T: float | None = None,
    threads: int | None = None,
) -> DapPlan:
    if not 0 < eps < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    hz = Horizons.fixed(T) if demand is None else Horizons.of(demand)
    n, m = types.n, types.m
    empty = np.zeros((len(hz.values), m, n))

    singles = []
    for i in range(n):
        curves = [benefit_curve(types, empty[0], i, H) for H in hz.values]
        singles.append(sum(w * cv.evaluate(1)[0] for w, cv in zip(hz.weights, curves)))
    if isinstance(constraint, Budget):
        afford = constraint.costs <= constraint.B + 1e-12
        singles = [s if ok else 0.0 for s, ok in zip(singles, afford)]
    best_single = max(singles, default=0.0)
    if best_single <= 0:
        return DapPlan(np.zeros(n), empty, hz, 0.0, None, None, False)

    grid = tau_grid(best_single, constraint, eps)
    with ThreadPoolExecutor(_threads(threads)) as pool:
        runs = list(pool.map(lambda t: threshold_add(types, constraint, t, hz), grid))
    plans = [
        DapPlan(c, fam, hz, expected_fhat(types, fam, hz), float(t), u, False)
        for u, ((c, fam), t) in enumerate(zip(runs, grid))
    ]
    if isinstance(constraint, Budget):
        for i in np.flatnonzero(afford):
            c = np.zeros(n)
            c[i] = 1.0
            fam = empty.copy()
            for s, H in enumerate(hz.values):
                fam[s][:, i] = benefit_curve(types, empty[s], i, H).evaluate(1)[1]
            plans.append(DapPlan(c, fam, hz, expected_fhat(types, fam, hz), None, None, True))
    return max(plans, key=lambda p: p.objective)
