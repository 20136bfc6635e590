"""Domain types shared by every solver.

Products are stored internally in non-increasing price order. Every object
that carries product-indexed data keeps the permutation back to the caller's
ordering so results can be reported in user indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

PMF_TOL = 1e-12
TAIL_TOL = 1e-12


class ValidationError(ValueError):
    """Raised when model inputs violate an invariant."""


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def price_order(prices: Sequence[float]) -> np.ndarray:
    """Stable permutation sorting prices non-increasing (ties by user index)."""
    p = np.asarray(prices, dtype=float)
    return np.argsort(-p, kind="stable")


@dataclass(frozen=True)
class Catalog:
    """Single customer type: prices and MNL weights, outside weight fixed to 1."""

    prices: np.ndarray
    weights: np.ndarray
    order: np.ndarray  # order[k] = user index of internal product k

    @property
    def n(self) -> int:
        return len(self.prices)

    def to_user(self, vec) -> np.ndarray:
        vec = np.asarray(vec)
        out = np.empty_like(vec)
        out[..., self.order] = vec
        return out

    def to_internal(self, vec) -> np.ndarray:
        return np.asarray(vec)[..., self.order]


@dataclass(frozen=True)
class CustomerTypes:
    """m MNL types sharing one price vector, with arrival probabilities lam."""

    prices: np.ndarray
    weights: np.ndarray  # shape (m, n)
    lam: np.ndarray
    order: np.ndarray
    catalogs: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        cats = tuple(
            Catalog(self.prices, _frozen(w), self.order) for w in self.weights
        )
        object.__setattr__(self, "catalogs", cats)

    @property
    def m(self) -> int:
        return self.weights.shape[0]

    @property
    def n(self) -> int:
        return len(self.prices)

    def to_user(self, vec) -> np.ndarray:
        return self.catalogs[0].to_user(vec)

    def to_internal(self, vec) -> np.ndarray:
        return self.catalogs[0].to_internal(vec)


def _check_prices(prices) -> np.ndarray:
    p = np.asarray(prices, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValidationError("empty catalog")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ValidationError("prices must be finite and non-negative")
    return p


def _check_weights(weights, n: int, outside_weight: float) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise ValidationError(f"expected {n} weights, got shape {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ValidationError("non-positive weight")
    if not outside_weight > 0:
        raise ValidationError("non-positive outside weight")
    return w / outside_weight


def make_catalog(prices, weights, outside_weight: float = 1.0) -> Catalog:
    p = _check_prices(prices)
    w = _check_weights(weights, p.size, outside_weight)
    order = price_order(p)
    order.setflags(write=False)
    return Catalog(_frozen(p[order]), _frozen(w[order]), order)


def make_types(prices, weight_rows, lam, outside_weight: float = 1.0) -> CustomerTypes:
    p = _check_prices(prices)
    rows = [_check_weights(w, p.size, outside_weight) for w in weight_rows]
    if not rows:
        raise ValidationError("no customer types")
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (len(rows),) or np.any(lam < 0) or not np.all(np.isfinite(lam)):
        raise ValidationError("arrival probabilities must be non-negative, one per type")
    if abs(lam.sum() - 1.0) > 1e-9:
        raise ValidationError(f"arrival probabilities sum to {lam.sum()}, not 1")
    order = price_order(p)
    order.setflags(write=False)
    W = np.vstack(rows)[:, order]
    W.setflags(write=False)
    return CustomerTypes(_frozen(p[order]), W, _frozen(lam), order)


def single_type(catalog: Catalog) -> CustomerTypes:
    W = catalog.weights[None, :].copy()
    W.setflags(write=False)
    return CustomerTypes(catalog.prices, W, _frozen([1.0]), catalog.order)


# --- demand -----------------------------------------------------------------


@dataclass(frozen=True)
class Demand:
    """Finite pmf over the number of customers T in {0, ..., t_max}."""

    kind: str
    pmf: np.ndarray

    @property
    def t_max(self) -> int:
        return len(self.pmf) - 1

    @property
    def mean(self) -> float:
        return float(np.dot(np.arange(len(self.pmf)), self.pmf))

    @property
    def is_deterministic(self) -> bool:
        return int(np.count_nonzero(self.pmf)) == 1

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.pmf > 0)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        cdf = np.cumsum(self.pmf)
        return np.minimum(np.searchsorted(cdf, rng.random(size), side="right"), self.t_max)


def _normalized(kind: str, pmf) -> Demand:
    pmf = np.asarray(pmf, dtype=float)
    last = np.flatnonzero(pmf > 0)
    if last.size == 0:
        raise ValidationError("pmf has no mass")
    pmf = pmf[: last[-1] + 1] / pmf.sum()
    return Demand(kind, _frozen(pmf))


def deterministic(T: int) -> Demand:
    if int(T) != T or T < 0:
        raise ValidationError("deterministic T must be a non-negative integer")
    pmf = np.zeros(int(T) + 1)
    pmf[-1] = 1.0
    return Demand("deterministic", _frozen(pmf))


def from_pmf(probs, values=None) -> Demand:
    probs = np.asarray(probs, dtype=float)
    if values is not None:
        values = np.asarray(values)
        if values.shape != probs.shape or np.any(values < 0) or np.any(values != np.round(values)):
            raise ValidationError("pmf values must be non-negative integers")
        dense = np.zeros(int(values.max()) + 1)
        np.add.at(dense, values.astype(int), probs)
        probs = dense
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > PMF_TOL:
        raise ValidationError("pmf does not sum to 1")
    return _normalized("pmf", probs)


def _tail_cut(sf) -> int:
    """Smallest k with survival P(T > k) below the tail tolerance."""
    k = 0
    while sf(k) >= TAIL_TOL:
        k += 1
    return k


def geometric(p: float) -> Demand:
    """Number of trials to first success, support {1, 2, ...}, mean 1/p."""
    if not 0 < p <= 1:
        raise ValidationError("geometric p must lie in (0, 1]")
    t_max = _tail_cut(lambda k: (1 - p) ** k)
    k = np.arange(t_max + 1)
    pmf = np.where(k >= 1, p * (1 - p) ** np.maximum(k - 1, 0), 0.0)
    return _normalized("geometric", pmf)


def shifted_geometric(p: float, shift: int) -> Demand:
    """shift + G with G counting failures before the first success."""
    if not 0 < p <= 1 or int(shift) != shift or shift < 0:
        raise ValidationError("shifted geometric needs p in (0, 1] and integer shift >= 0")
    g = _tail_cut(lambda k: (1 - p) ** (k + 1))
    pmf = np.concatenate([np.zeros(int(shift)), p * (1 - p) ** np.arange(g + 1)])
    return _normalized("shifted_geometric", pmf)


def poisson(mean: float) -> Demand:
    if not mean > 0:
        raise ValidationError("poisson mean must be positive")
    t_max = _tail_cut(lambda k: stats.poisson.sf(k, mean))
    return _normalized("poisson", stats.poisson.pmf(np.arange(t_max + 1), mean))


def hazard_rates(demand: Demand) -> np.ndarray:
    """q_k = P(T=k)/P(T>=k) for k = 0..t_max."""
    pmf = demand.pmf
    tail = np.cumsum(pmf[::-1])[::-1]
    return pmf / tail


def is_ifr(demand: Demand) -> bool:
    q = hazard_rates(demand)
    return bool(np.all(np.diff(q) >= -1e-12))


# --- constraints ------------------------------------------------------------


@dataclass(frozen=True)
class Cardinality:
    K: int

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 0:
            raise ValidationError("cardinality K must be a non-negative integer")

    def feasible(self, c) -> bool:
        c = np.asarray(c)
        return bool(np.all(c >= 0) and c.sum() <= self.K)

    def usage(self, c) -> float:
        return float(np.sum(c))


@dataclass(frozen=True)
class Budget:
    B: float
    costs: np.ndarray  # internal product order

    def __post_init__(self):
        if not self.B > 0:
            raise ValidationError("budget B must be positive")
        if np.any(np.asarray(self.costs) <= 0):
            raise ValidationError("budget weights must be positive")

    def feasible(self, c) -> bool:
        c = np.asarray(c)
        return bool(np.all(c >= 0) and float(np.dot(self.costs, c)) <= self.B + 1e-9)

    def usage(self, c) -> float:
        return float(np.dot(self.costs, c))


Constraint = Cardinality | Budget


def make_budget(B: float, costs, order: np.ndarray) -> Budget:
    costs = np.asarray(costs, dtype=float)
    if costs.shape != order.shape:
        raise ValidationError("one budget weight per product required")
    return Budget(float(B), _frozen(costs[order]))


# --- model bundle -------------------------------------------------------------


@dataclass(frozen=True)
class Model:
    types: CustomerTypes
    demand: Demand | None = None
    constraint: Constraint | None = None

    @property
    def catalog(self) -> Catalog:
        if self.types.m != 1:
            raise ValidationError("model has several customer types")
        return self.types.catalogs[0]


def _demand_from_dict(d: dict) -> Demand:
    kind = d.get("kind")
    try:
        if kind == "deterministic":
            return deterministic(d["T"])
        if kind == "geometric":
            return geometric(float(d["p"]))
        if kind == "shifted_geometric":
            return shifted_geometric(float(d["p"]), d.get("shift", 0))
        if kind == "poisson":
            return poisson(float(d["mean"]))
        if kind == "pmf":
            return from_pmf(d["probs"], d.get("values"))
    except KeyError as e:
        raise ValidationError(f"demand kind {kind!r} missing field {e.args[0]!r}") from None
    raise ValidationError(f"unknown demand kind {kind!r}")


def validate(config: dict) -> Model:
    """Check a parsed config and return the internally ordered model."""
    if not isinstance(config, dict):
        raise ValidationError("config must be a JSON object")
    if "prices" not in config:
        raise ValidationError("missing field 'prices'")
    prices = config["prices"]
    if "types" in config:
        rows = [t["weights"] for t in config["types"]]
        lam = [t.get("lambda", 1.0 / len(rows)) for t in config["types"]]
        types = make_types(prices, rows, lam)
    elif "weights" in config:
        types = make_types(prices, [config["weights"]], [1.0])
    else:
        raise ValidationError("missing field 'weights' (or 'types')")

    demand = _demand_from_dict(config["demand"]) if "demand" in config else None

    constraint = None
    if "constraint" in config:
        cd = config["constraint"]
        kind = cd.get("kind")
        if kind == "cardinality":
            if "K" not in cd:
                raise ValidationError("cardinality constraint missing 'K'")
            constraint = Cardinality(int(cd["K"]))
        elif kind == "budget":
            if "B" not in cd or "b_i" not in cd:
                raise ValidationError("budget constraint needs 'B' and 'b_i'")
            constraint = make_budget(cd["B"], cd["b_i"], types.order)
        else:
            raise ValidationError(f"unknown constraint kind {kind!r}")
    return Model(types, demand, constraint)


def horizon(demand: Demand) -> float:
    """Deterministic T, or the mean for stochastic demand."""
    return float(demand.t_max) if demand.is_deterministic else demand.mean


def isclose_int(x: float, tol: float = 1e-9) -> bool:
    return abs(x - round(x)) <= tol * max(1.0, abs(x))


__all__ = [
    "Budget", "Cardinality", "Catalog", "Constraint", "CustomerTypes", "Demand",
    "Model", "ValidationError", "deterministic", "from_pmf", "geometric",
    "hazard_rates", "horizon", "is_ifr", "make_budget", "make_catalog",
    "make_types", "poisson", "price_order", "shifted_geometric", "single_type",
    "validate", "isclose_int",
]
