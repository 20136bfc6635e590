"""Shared oracles. None of these reuse package solver code."""

import numpy as np
import pytest
from scipy.optimize import linprog

from assortflow.catalog import make_catalog, make_types


def event_fluid(prices, weights, x, T):
    """Step the fluid run event by event: offer all stocked products, stop at each stockout.

    Returns (phases, consumption, revenue); phases are (set of user indices, duration).
    """
    prices, weights = np.asarray(prices, float), np.asarray(weights, float)
    left = np.asarray(x, float).copy()
    t, phases = 0.0, []
    while t < T - 1e-12:
        S = np.flatnonzero(left > 1e-12)
        if len(S) == 0:
            phases.append((frozenset(), T - t))
            break
        rate = weights[S] / (1.0 + weights[S].sum())
        dt = min(T - t, float(np.min(left[S] / rate)))
        left[S] = np.maximum(left[S] - rate * dt, 0.0)
        left[S[left[S] < 1e-12]] = 0.0
        phases.append((frozenset(S.tolist()), dt))
        t += dt
    sold = np.asarray(x, float) - left
    return phases, sold, float(prices @ sold)


def lp_single(prices, weights, c, T):
    """Sales-based LP for one customer type via HiGHS."""
    n = len(prices)
    obj = -np.concatenate([prices, [0.0]])
    A = np.hstack([np.eye(n), -np.asarray(weights, float)[:, None]])
    bounds = [(0, ci) for ci in c] + [(0, None)]
    r = linprog(obj, A_ub=A, b_ub=np.zeros(n), A_eq=np.ones((1, n + 1)), b_eq=[T], bounds=bounds, method="highs")
    return -r.fun


def lp_multi(prices, W, lam, c, T):
    """Multi-type sales-based LP with shared inventory via HiGHS."""
    m, n = W.shape
    nv = m * n + m
    obj = np.zeros(nv)
    obj[: m * n] = -np.tile(prices, m)
    A, b = [], []
    for j in range(n):
        a = np.zeros(nv)
        a[j : m * n : n] = 1
        A.append(a)
        b.append(c[j])
    for k in range(m):
        for j in range(n):
            a = np.zeros(nv)
            a[k * n + j] = 1
            a[m * n + k] = -W[k, j]
            A.append(a)
            b.append(0.0)
    Aeq = np.zeros((m, nv))
    for k in range(m):
        Aeq[k, k * n : (k + 1) * n] = 1
        Aeq[k, m * n + k] = 1
    r = linprog(obj, A_ub=np.array(A), b_ub=b, A_eq=Aeq, b_eq=np.asarray(lam) * T, bounds=[(0, None)] * nv, method="highs")
    return -r.fun


def lp_benefit(types, C, z, i, T):
    """max over per-type splits of z units of product i of the summed per-type fluid value (HiGHS)."""
    m, n = types.m, types.n
    nv = m * n + 2 * m
    obj = np.zeros(nv)
    obj[: m * n] = -np.tile(types.prices, m)
    A, b = [], []
    for k in range(m):
        for j in range(n):
            a = np.zeros(nv)
            a[k * n + j] = 1
            if j == i:
                a[m * n + m + k] = -1
            A.append(a)
            b.append(C[k, j])
            a = np.zeros(nv)
            a[k * n + j] = 1
            a[m * n + k] = -types.weights[k, j]
            A.append(a)
            b.append(0.0)
        a = np.zeros(nv)
        a[k * n : (k + 1) * n] = 1
        a[m * n + k] = 1
        A.append(a)
        b.append(types.lam[k] * T)
    a = np.zeros(nv)
    a[m * n + m :] = 1
    A.append(a)
    b.append(z)
    r = linprog(obj, A_ub=np.array(A), b_ub=b, bounds=[(0, None)] * nv, method="highs")
    return -r.fun


def random_cat(rng, n):
    return make_catalog(rng.uniform(0.5, 10, n).round(1), rng.uniform(0.1, 3, n).round(2))


def random_types(rng, m, n):
    return make_types(rng.uniform(0.5, 10, n).round(1), rng.uniform(0.1, 3, (m, n)), rng.dirichlet(np.ones(m)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_cat():
    # r=(3,2,1), v=(1,1,1)
    return make_catalog([3, 2, 1], [1, 1, 1])


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
