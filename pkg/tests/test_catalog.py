import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from assortflow.catalog import (
    Budget,
    Cardinality,
    ValidationError,
    deterministic,
    from_pmf,
    geometric,
    hazard_rates,
    is_ifr,
    make_budget,
    make_catalog,
    make_types,
    poisson,
    shifted_geometric,
    validate,
)


def test_prices_sorted_with_permutation():
    cat = make_catalog([1, 3, 2], [0.5, 1.0, 2.0])
    assert cat.prices.tolist() == [3, 2, 1]
    assert (cat.order + 1).tolist() == [2, 3, 1]
    assert cat.weights.tolist() == [1.0, 2.0, 0.5]


def test_price_ties_keep_user_order():
    cat = make_catalog([2, 5, 2, 5], [1, 2, 3, 4])
    assert cat.order.tolist() == [1, 3, 0, 2]


@given(st.lists(st.integers(0, 5), min_size=1, max_size=8))
def test_user_round_trip(prices):
    cat = make_catalog(prices, np.ones(len(prices)))
    v = np.arange(len(prices), dtype=float)
    assert np.array_equal(cat.to_user(cat.to_internal(v)), v)
    assert np.array_equal(cat.to_internal(cat.to_user(v)), v)
    # sorting the sorted prices is a no-op
    again = make_catalog(cat.prices, cat.weights)
    assert again.order.tolist() == list(range(len(prices)))


def test_to_user_on_matrix():
    cat = make_catalog([1, 3, 2], [1, 1, 1])
    M = np.array([[10.0, 20.0, 30.0], [1.0, 2.0, 3.0]])
    assert cat.to_user(M).tolist() == [[30, 10, 20], [3, 1, 2]]


@pytest.mark.parametrize("w", [[1, 0, 1], [1, -2, 1]])
def test_non_positive_weight(w):
    with pytest.raises(ValidationError, match="non-positive weight"):
        make_catalog([3, 2, 1], w)


def test_empty_catalog():
    with pytest.raises(ValidationError):
        make_catalog([], [])


def test_types_lambda_must_sum_to_one():
    with pytest.raises(ValidationError):
        make_types([1, 2], [[1, 1], [1, 1]], [0.5, 0.6])
    t = make_types([1, 2], [[1, 2], [3, 4]], [0.25, 0.75])
    assert t.m == 2 and t.n == 2
    assert t.weights.tolist() == [[2, 1], [4, 3]]


def test_geometric_half():
    d = geometric(0.5)
    assert d.t_max == 40
    assert 0.5**40 < 1e-12
    assert abs(d.pmf.sum() - 1) < 1e-12
    assert abs(d.mean - 2.0) < 1e-9
    assert d.pmf[0] == 0


@pytest.mark.parametrize("p", [0.1, 0.3, 0.77])
def test_geometric_mean(p):
    assert abs(geometric(p).mean - 1 / p) < 1e-9


@pytest.mark.parametrize("mu", [0.5, 3.0, 11.0])
def test_poisson_mean(mu):
    assert abs(poisson(mu).mean - mu) < 1e-9


def test_shifted_geometric_mean():
    p, s = 0.4, 3
    assert abs(shifted_geometric(p, s).mean - (s + (1 - p) / p)) < 1e-9


def test_deterministic():
    d = deterministic(5)
    assert d.t_max == 5 and d.is_deterministic and d.mean == 5
    with pytest.raises(ValidationError):
        deterministic(2.5)


def test_pmf_must_sum_to_one():
    with pytest.raises(ValidationError, match="sum to 1"):
        from_pmf([0.5, 0.4])
    d = from_pmf([0.9, 0.1], [1, 20])
    assert d.t_max == 20 and abs(d.mean - 2.9) < 1e-12


def test_sampling_matches_pmf(rng):
    d = from_pmf([0.2, 0.3, 0.5], [0, 4, 7])
    draws = d.sample(rng, 200_000)
    for v, p in [(0, 0.2), (4, 0.3), (7, 0.5)]:
        assert abs(np.mean(draws == v) - p) < 0.005


def test_ifr_examples():
    assert is_ifr(geometric(0.5))
    assert is_ifr(deterministic(5))
    M = 10
    assert not is_ifr(from_pmf([1 - 1 / M, 1 / M], [0, M]))
    assert is_ifr(poisson(6.0))


def test_hazard_geometric_is_constant_on_support():
    # renormalizing the truncated tail lifts the last few hazards
    q = hazard_rates(geometric(0.3))
    assert np.allclose(q[1:40], 0.3, atol=1e-9)
    assert np.all(np.diff(q) >= -1e-12)


def test_constraints():
    assert Cardinality(3).feasible([1, 2, 0])
    assert not Cardinality(3).feasible([2, 2, 0])
    b = make_budget(5, [1, 2, 3], np.array([2, 1, 0]))
    assert b.costs.tolist() == [3, 2, 1]
    assert b.feasible([1, 1, 0]) and not b.feasible([1, 1, 1])
    with pytest.raises(ValidationError):
        Budget(1.0, np.array([1.0, 0.0]))
    with pytest.raises(ValidationError):
        Cardinality(-1)


def test_validate_config():
    model = validate(
        {
            "prices": [1, 3],
            "types": [{"weights": [1, 2], "lambda": 0.5}, {"weights": [2, 1], "lambda": 0.5}],
            "demand": {"kind": "poisson", "mean": 4},
            "constraint": {"kind": "budget", "B": 3, "b_i": [1, 2]},
        }
    )
    assert model.types.m == 2
    assert model.constraint.costs.tolist() == [2, 1]
    with pytest.raises(ValidationError, match="several"):
        model.catalog


@pytest.mark.parametrize(
    "cfg, msg",
    [
        ({"weights": [1]}, "missing field 'prices'"),
        ({"prices": [1]}, "weights"),
        ({"prices": [1], "weights": [1], "demand": {"kind": "zipf"}}, "unknown demand"),
        ({"prices": [1], "weights": [1], "demand": {"kind": "geometric"}}, "missing field 'p'"),
        ({"prices": [1], "weights": [1], "constraint": {"kind": "matroid"}}, "unknown constraint"),
        ({"prices": [1], "weights": [1], "constraint": {"kind": "budget", "B": 1}}, "budget"),
        ([1, 2], "JSON object"),
    ],
)
def test_validate_errors(cfg, msg):
    with pytest.raises(ValidationError, match=msg):
        validate(cfg)
