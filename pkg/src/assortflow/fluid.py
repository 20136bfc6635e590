"""Deterministic fluid consumption process.

Every stocked product i is consumed at rate v_i / (1 + sum of offered weights)
while it lasts. Because the rate ratio between any two offered products is
fixed, product i runs out exactly when the cumulative no-purchase mass reaches
x_i / v_i, so the whole trace follows from sorting those ratios.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import Catalog

SNAP = 1e-12


@dataclass(frozen=True)
class FluidTrace:
    order: np.ndarray  # stocked products by depletion time
    cuts: np.ndarray  # phase l offers order[cuts[l]:]
    durations: np.ndarray
    consumption: np.ndarray
    outside: float  # no-purchase mass Z_0
    revenue: float
    horizon: float

    def phases(self) -> list[tuple[tuple[int, ...], float]]:
        return [
            (tuple(sorted(int(i) for i in self.order[c:])), float(t))
            for c, t in zip(self.cuts, self.durations)
        ]

    def terminal(self) -> tuple[int, ...]:
        """Assortment offered just before the horizon ends."""
        if len(self.cuts) == 0:
            return ()
        return tuple(sorted(int(i) for i in self.order[self.cuts[-1]:]))


def phase_revenues(catalog: Catalog, trace: FluidTrace) -> np.ndarray:
    """R(S_l) for every phase of the trace."""
    o = trace.order
    rv = np.concatenate([np.cumsum((catalog.prices[o] * catalog.weights[o])[::-1])[::-1], [0.0]])
    v = np.concatenate([np.cumsum(catalog.weights[o][::-1])[::-1], [0.0]])
    return rv[trace.cuts] / (1.0 + v[trace.cuts])


def sequence(catalog: Catalog, x, T: float) -> FluidTrace:
    x = np.asarray(x, dtype=float)
    v = catalog.weights
    T = float(T)
    empty = np.zeros(0, dtype=int)
    if T <= 0:
        return FluidTrace(empty, empty, np.zeros(0), np.zeros(len(x)), 0.0, 0.0, max(T, 0.0))

    stocked = np.flatnonzero(x > 0)
    ratio = x[stocked] / v[stocked]
    o = np.argsort(ratio, kind="stable")
    order, s = stocked[o], ratio[o]
    xs, vs = x[order], v[order]
    k = len(order)

    # group simultaneous depletions; ends[g] = number of products gone after group g
    if k:
        brk = np.flatnonzero(np.diff(s) > SNAP * np.maximum(1.0, s[1:]))
        ends = np.concatenate([brk + 1, [k]])
    else:
        ends = np.zeros(0, dtype=int)
    xcum = np.concatenate([[0.0], np.cumsum(xs)])
    vtail = np.concatenate([np.cumsum(vs[::-1])[::-1], [0.0]])
    # time at which group g is exhausted: Z_0 * W + (stock already sold)
    thresholds = s[ends - 1] if k else np.zeros(0)
    t_end = thresholds * (1.0 + vtail[ends]) + xcum[ends]

    G = int(np.searchsorted(t_end, T * (1 + SNAP), side="right"))
    gone = int(ends[G - 1]) if G else 0
    if G < len(ends):
        z0 = (T - xcum[gone]) / (1.0 + vtail[gone])
    else:
        z0 = T - xcum[k]

    Z = np.zeros(len(x))
    Z[order[:gone]] = xs[:gone]
    Z[order[gone:]] = np.minimum(vs[gone:] * z0, xs[gone:])

    bounds = np.concatenate([[0.0], np.minimum(t_end[:G], T), [T]])
    durations = np.diff(bounds)
    cuts = np.concatenate([[0], ends[:G]]).astype(int)
    keep = durations > SNAP * max(1.0, T)
    revenue = float(np.dot(catalog.prices, Z))
    return FluidTrace(order, cuts[keep], durations[keep], Z, float(z0), revenue, T)


def fp_revenue(catalog: Catalog, x, T: float) -> float:
    return sequence(catalog, x, T).revenue


def fp_consumption(catalog: Catalog, x, T: float) -> np.ndarray:
    return sequence(catalog, x, T).consumption


def separability_decompose(catalog: Catalog, x, delta: float, i: int, T: float) -> tuple[float, float]:
    """Return alpha_i and the worst residual of the split into a shorter run plus pure sales of i."""
    x = np.asarray(x, dtype=float)
    xp = x.copy()
    xp[i] += delta
    full = sequence(catalog, xp, T)
    alpha = float(full.consumption[i] - sequence(catalog, x, T).consumption[i])
    short = sequence(catalog, x, T - alpha)
    res = abs(full.revenue - (short.revenue + alpha * catalog.prices[i]))
    others = np.arange(len(x)) != i
    if others.any():
        res = max(res, float(np.max(np.abs(full.consumption[others] - short.consumption[others]))))
    return alpha, res
