import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from assortflow.catalog import Budget, Cardinality, deterministic, from_pmf, make_types, poisson, single_type
from assortflow.cdlp import f_lp, multi_type_fhat, multi_type_sblp_reference
from assortflow.dap_planner import (
    Horizons,
    benefit_curve,
    calculate_benefit,
    expected_fhat,
    get_number,
    optimize_dap,
    threshold_add,
)

from conftest import lp_benefit, lp_multi, random_types


def _state(rng, m, n):
    types = random_types(rng, m, n)
    i = int(rng.integers(0, n))
    C = rng.uniform(0, 4, (m, n)) * (rng.random((m, n)) < 0.7)
    C[:, i + 1:] = 0
    return types, C, i


def test_add_second_product():
    types = single_type_types([2, 1], [1, 1])
    C = np.array([[1.0, 0.0]])
    assert multi_type_fhat(types, C, 4) == pytest.approx(2)
    gain, alloc = calculate_benefit(types, C, 1, 1, 4)
    assert gain == pytest.approx(1) and alloc.tolist() == [1.0]
    assert multi_type_fhat(types, C + [[0, 1]], 4) == pytest.approx(3)


def single_type_types(prices, weights):
    return make_types(prices, [weights], [1.0])


@pytest.mark.parametrize("z", [1, 2, 3])
def test_empty_start_matches_single_type(z):
    types = single_type_types([5, 2], [1, 0.5])
    gain, _ = calculate_benefit(types, np.zeros((1, 2)), z, 0, 4)
    assert gain == pytest.approx(f_lp(types.catalogs[0], [z, 0], 4))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(1, 5), st.integers(1, 14), st.integers(0, 2**32 - 1))
def test_benefit_matches_lp(m, n, T, seed):
    rng = np.random.default_rng(seed)
    types, C, i = _state(rng, m, n)
    base = multi_type_fhat(types, C, T)
    for z in (0.5, 1, 2, 3.7, 10):
        gain, alloc = calculate_benefit(types, C, z, i, T)
        assert gain == pytest.approx(lp_benefit(types, C, z, i, T) - base, abs=1e-8)
        assert alloc.sum() == pytest.approx(z)
        # the reported split really achieves the gain
        bumped = C.copy()
        bumped[:, i] += alloc
        assert multi_type_fhat(types, bumped, T) - base == pytest.approx(gain, abs=1e-8)


def test_benefit_grid_oracle():
    rng = np.random.default_rng(7)
    types, C, i = _state(rng, 2, 3)
    base = multi_type_fhat(types, C, 6)
    for z in (1, 2):
        grid = np.linspace(0, z, 1001)
        best = max(
            multi_type_fhat(types, C + np.outer([a, z - a], np.eye(3)[i]), 6) - base for a in grid
        )
        assert calculate_benefit(types, C, z, i, 6)[0] == pytest.approx(best, abs=1e-3)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(1, 5), st.integers(1, 14), st.integers(0, 2**32 - 1))
def test_benefit_concave(m, n, T, seed):
    rng = np.random.default_rng(seed)
    types, C, i = _state(rng, m, n)
    per_unit = [calculate_benefit(types, C, z, i, T)[0] / z for z in range(1, 8)]
    assert np.all(np.diff(per_unit) <= 1e-9)


def test_get_number_limits():
    rng = np.random.default_rng(3)
    types, C, i = _state(rng, 2, 3)
    one = calculate_benefit(types, C, 1, i, 5)[0]
    assert get_number(types, C, one * 1.01 + 1e-6, 10, i, 5)[0] == 0
    cv = benefit_curve(types, C, i, 5)
    z, alloc = get_number(types, C, 1e-12, 100, i, 5)
    assert z == min(100, int(np.ceil(cv.absorbable - 1e-9)))
    assert get_number(types, C, 1e-12, 2, i, 5)[0] == min(2, z)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 3), st.integers(1, 4), st.integers(0, 2**32 - 1), st.floats(0.01, 5), st.floats(0.01, 5))
def test_get_number_monotone_in_tau(m, n, seed, t1, t2):
    rng = np.random.default_rng(seed)
    types, C, i = _state(rng, m, n)
    lo, hi = sorted((t1, t2))
    assert get_number(types, C, lo, 8, i, 6)[0] >= get_number(types, C, hi, 8, i, 6)[0]


def test_get_number_is_largest():
    rng = np.random.default_rng(11)
    types, C, i = _state(rng, 2, 4)
    # units past the absorbable capacity add nothing and are never counted
    reach = min(12, int(np.ceil(benefit_curve(types, C, i, 9).absorbable - 1e-9)))
    for tau in (0.05, 0.3, 1.0):
        z, _ = get_number(types, C, tau, 12, i, 9)
        ok = [z_ for z_ in range(1, reach + 1) if calculate_benefit(types, C, z_, i, 9)[0] >= z_ * tau - 1e-12]
        assert z == max(ok, default=0)


def test_fractional_split_illustration():
    # absorbable capacities 0.7 and 0.3: only the split unit is worth its full price
    types = make_types([1.0], [[7 / 3], [3 / 7]], [0.5, 0.5])
    whole = [multi_type_fhat(types, np.array([[1.0], [0.0]]), 2), multi_type_fhat(types, np.array([[0.0], [1.0]]), 2)]
    assert max(whole) == pytest.approx(0.7)
    c, fam = threshold_add(types, Cardinality(1), 0.9, Horizons.fixed(2))
    assert c.tolist() == [1.0]
    assert np.allclose(fam[0][:, 0], [0.7, 0.3])
    assert expected_fhat(types, fam, Horizons.fixed(2)) == pytest.approx(1.0)


def test_threshold_add_infinite_tau():
    types = random_types(np.random.default_rng(0), 2, 3)
    c, fam = threshold_add(types, Cardinality(5), np.inf, Horizons.fixed(4))
    assert not c.any() and not fam.any()


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(1, 5), st.integers(0, 6), st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_plan_invariants(m, n, K, T, seed):
    rng = np.random.default_rng(seed)
    types = random_types(rng, m, n)
    plan = optimize_dap(types, Cardinality(K), T=T)
    c, C = plan.inventory, plan.allocation[0]
    assert c.sum() <= K and np.all(c == np.round(c))
    assert np.allclose(C.sum(axis=0), c, atol=1e-9)
    assert plan.objective == pytest.approx(multi_type_fhat(types, C, T), abs=1e-8)
    assert plan.objective <= multi_type_sblp_reference(types, c, T).objective + 1e-8


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.integers(1, 4), st.integers(1, 5), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_cardinality_guarantee(m, n, K, T, seed):
    rng = np.random.default_rng(seed)
    types = random_types(rng, m, n)
    eps = 0.05
    plan = optimize_dap(types, Cardinality(K), eps=eps, T=T)
    best = max(
        lp_multi(types.prices, types.weights, types.lam, np.array(v, float), T)
        for v in itertools.product(range(K + 1), repeat=n)
        if sum(v) <= K
    )
    assert plan.objective >= (0.5 - eps) * best - 1e-9


def test_single_unit():
    rng = np.random.default_rng(2)
    types = random_types(rng, 2, 4)
    plan = optimize_dap(types, Cardinality(1), T=5)
    best = max(multi_type_sblp_reference(types, np.eye(4)[i], 5).objective for i in range(4))
    assert plan.inventory.sum() == 1
    assert plan.objective >= (0.5 - 0.05) * best


@pytest.mark.parametrize("seed", range(5))
def test_budget_feasible(seed):
    rng = np.random.default_rng(seed)
    types = random_types(rng, 2, 4)
    b = Budget(4.0, rng.uniform(0.5, 3, 4).round(1))
    plan = optimize_dap(types, b, T=6)
    assert b.feasible(plan.inventory)
    assert np.allclose(plan.allocation[0].sum(axis=0), plan.inventory, atol=1e-9)


def test_stochastic_family():
    rng = np.random.default_rng(4)
    types = random_types(rng, 2, 3)
    dem = from_pmf([0.3, 0.5, 0.2], [2, 5, 9])
    plan = optimize_dap(types, Cardinality(4), dem)
    hz = plan.horizons
    assert hz.values.tolist() == [2, 5, 9]
    for C in plan.allocation:
        assert np.allclose(C.sum(axis=0), plan.inventory, atol=1e-9)
    exact = sum(w * multi_type_fhat(types, C, T) for C, T, w in zip(plan.allocation, hz.values, hz.weights))
    assert plan.objective == pytest.approx(exact, abs=1e-12)


def test_deterministic_demand_equals_fixed_horizon():
    rng = np.random.default_rng(8)
    types = random_types(rng, 2, 4)
    a = optimize_dap(types, Cardinality(4), deterministic(6))
    b = optimize_dap(types, Cardinality(4), T=6)
    assert np.array_equal(a.inventory, b.inventory) and a.objective == pytest.approx(b.objective)


def test_single_type_matches_da_scale():
    rng = np.random.default_rng(9)
    types = random_types(rng, 1, 4)
    cat = types.catalogs[0]
    plan = optimize_dap(types, Cardinality(4), T=7)
    best = max(f_lp(cat, np.array(v, float), 7) for v in itertools.product(range(5), repeat=4) if sum(v) <= 4)
    assert plan.objective >= (0.5 - 0.05) * best
