"""Randomized self-checks exposed through the `verify` command.

Each suite yields rows (check, trial, value, bound, margin); a row passes when
its margin is non-negative.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import bounds
from .catalog import Cardinality, deterministic, from_pmf, geometric, make_catalog, make_types, poisson, single_type
from .cdlp import f_lp, multi_type_sblp_reference, single_type_reference, solve_sblp_fast
from .da_planner import solve_da, transform_round_bad
from .dap_planner import optimize_dap
from .fluid import fp_revenue, separability_decompose
from .policies import build_sampling_policy
from .simulator import simulate_da, simulate_dap


@dataclass(frozen=True)
class Row:
    check: str
    trial: int
    value: float
    bound: float
    margin: float

    @property
    def passed(self) -> bool:
        return self.margin >= 0


def random_catalog(rng, n, price_digits=1):
    return make_catalog(rng.uniform(0.5, 10, n).round(price_digits), rng.uniform(0.1, 3, n).round(2))


def compositions(total: int, parts: int):
    """All non-negative integer vectors of length `parts` summing to `total`."""
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev, out = -1, []
        for b in bars + (total + parts - 1,):
            out.append(b - prev - 1)
            prev = b
        yield np.array(out, dtype=float)


def brute_force_da(catalog, K, T):
    return max(f_lp(catalog, c, T) for c in compositions(K, catalog.n))


def brute_force_dap(types, K, T):
    return max(multi_type_sblp_reference(types, c, T).objective for c in compositions(K, types.n))


def so_triple(rng, literal=False):
    """Random (catalog, c, T, i, j) for the submodular order check.

    By default i is placed after every stocked product and after j, the
    orientation the threshold algorithms rely on. `literal=True` instead puts
    i at or before the first stocked product and j after i.
    """
    n = int(rng.integers(2, 7))
    cat = random_catalog(rng, n)
    c = rng.integers(0, 5, n) * (rng.random(n) < 0.7)
    T = float(rng.integers(1, 16))
    if literal:
        first = int(np.flatnonzero(c > 0)[0]) if c.any() else n - 1
        i = int(rng.integers(0, min(first, n - 1) + 1))
        j = int(rng.integers(i, n))
    else:
        last = int(np.flatnonzero(c > 0)[-1]) if c.any() else 0
        i = int(rng.integers(last, n))
        j = int(rng.integers(0, i + 1))
    return cat, c, T, i, j


def so_gap(cat, c, T, i, j) -> float:
    """f(c+e_j+e_i) - f(c+e_j) - (f(c+e_i) - f(c)); positive means a violation."""
    e = np.eye(cat.n)
    return (f_lp(cat, c + e[j] + e[i], T) - f_lp(cat, c + e[j], T)) - (f_lp(cat, c + e[i], T) - f_lp(cat, c, T))


def suite_so(trials, rng):
    for t in range(trials):
        gap = so_gap(*so_triple(rng))
        yield Row("submodular_order", t, gap, 1e-8, 1e-8 - gap)


def suite_separability(trials, rng):
    for t in range(trials):
        n = int(rng.integers(1, 7))
        cat = random_catalog(rng, n)
        x = rng.uniform(0, 4, n) * (rng.random(n) < 0.8)
        i = int(rng.integers(0, n))
        _, res = separability_decompose(cat, x, float(rng.uniform(0, 3)), i, float(rng.uniform(0.1, 20)))
        yield Row("separability_residual", t, res, 1e-9, 1e-9 - res)


def suite_cdlp(trials, rng):
    for t in range(trials):
        n = int(rng.integers(1, 11))
        cat = random_catalog(rng, n)
        c = rng.integers(0, 11, n)
        T = float(rng.integers(1, 21))
        ro, sol = solve_sblp_fast(cat, c, T)
        ref = single_type_reference(cat, c, T).objective
        lp = multi_type_sblp_reference(single_type(cat), c, T).objective
        scale = max(1.0, abs(ref))
        yield Row("fast_vs_golden", t, sol.objective, ref, 1e-8 * scale - abs(sol.objective - ref))
        yield Row("fast_vs_simplex", t, sol.objective, lp, 1e-8 * scale - abs(sol.objective - lp))
        fp = fp_revenue(cat, ro.x, T)
        yield Row("fp_equals_lp", t, fp, sol.objective, 1e-8 * scale - abs(fp - sol.objective))


def suite_bounds(trials, rng):
    t = 0
    for p in (0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99):
        for T in (1, 2, 5, 10, 50, 200):
            for cap in (1, 2, 5, 10):
                ratio = bounds.check_single_item_bound(p, T, cap)
                yield Row("single_item", t, ratio, bounds.ONE_MINUS_INV_E, ratio - bounds.ONE_MINUS_INV_E + 1e-9)
                t += 1
    for p in (0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5):
        g = bounds.geometric_ratio(p)
        yield Row("geometric_formula", t, g.expected_sales, g.formula, 1e-9 - abs(g.expected_sales - g.formula))
        yield Row("geometric_ratio_half", t, g.ratio, 0.5, g.ratio - 0.5)
        t += 1
    v = bounds.shifted_geometric_objective(1e4)
    yield Row("shifted_geometric_limit", t, v, bounds.INV_E, 1e-4 - abs(v - bounds.INV_E))
    for k in range(trials):
        n = int(rng.integers(1, 4))
        cat = random_catalog(rng, n)
        x = rng.integers(1, 4, n)
        dem = poisson(float(rng.uniform(1, 6))) if rng.random() < 0.5 else geometric(float(rng.uniform(0.45, 0.9)))
        ratio = bounds.ifr_product_bound_check(cat, x, dem)
        yield Row("ifr_product", t + k, ratio, bounds.INV_E, ratio - bounds.INV_E + 1e-9)


def suite_guarantees(trials, rng, reps=20_000, eps=0.05):
    seed = int(rng.integers(0, 2**31))
    for t in range(trials):
        n = int(rng.integers(2, 5))
        cat = random_catalog(rng, n)
        K = int(rng.integers(1, 6))
        T = int(rng.integers(4, 9))

        c = rng.integers(0, 6, n)
        out, _ = transform_round_bad(cat, c, T)
        lp = f_lp(cat, c, T)
        val = fp_revenue(cat, out, T)
        yield Row("rounding", t, val, bounds.rounding_bound(T) * lp, val - bounds.rounding_bound(T) * lp + 1e-9)

        plan = solve_da(cat, Cardinality(K), deterministic(T), eps)
        sim = simulate_da(cat, plan.inventory, deterministic(T), reps, seed + t)
        bound = 0.27 * brute_force_da(cat, K, T)
        yield Row("da_deterministic", t, sim.mean, bound, sim.mean - bound + 3 * sim.stderr)

        m = int(rng.integers(1, 3))
        types = make_types(cat.prices, rng.uniform(0.1, 3, (m, n)), rng.dirichlet(np.ones(m)))
        dap = optimize_dap(types, Cardinality(K), eps=eps, T=T)
        bound = (0.5 - eps) * brute_force_dap(types, K, T)
        yield Row("dap_cardinality", t, dap.objective, bound, dap.objective - bound + 1e-9)

        inv = rng.integers(0, 4, n)
        pol = build_sampling_policy(types, inv, T)
        sim = simulate_dap(types, inv, pol, deterministic(T), reps, seed + t)
        bound = bounds.ONE_MINUS_INV_E * pol.objective
        yield Row("sampling_policy", t, sim.mean, bound, sim.mean - bound + 3 * sim.stderr)

        two = from_pmf([0.9, 0.1], [1, 20])
        sim = simulate_dap(types, inv, "greedy", two, reps, seed + t)
        exp_lp = 0.9 * multi_type_sblp_reference(types, inv, 1).objective + 0.1 * multi_type_sblp_reference(types, inv, 20).objective
        yield Row("greedy_policy", t, sim.mean, 0.5 * exp_lp, sim.mean - 0.5 * exp_lp + 3 * sim.stderr)


SUITES = {
    "so": suite_so,
    "separability": suite_separability,
    "cdlp": suite_cdlp,
    "bounds": suite_bounds,
    "guarantees": suite_guarantees,
}


def run_suite(name: str, trials: int, seed: int) -> list[Row]:
    if name not in SUITES:
        raise KeyError(name)
    return list(SUITES[name](trials, np.random.default_rng(seed)))
