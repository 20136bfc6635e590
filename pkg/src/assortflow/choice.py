"""MNL purchase probabilities, assortment revenue and static assortments."""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .catalog import Catalog

TIE_TOL = 1e-12

Assortment = tuple[int, ...]


def as_assortment(S: Iterable[int]) -> Assortment:
    return tuple(sorted(set(int(i) for i in S)))


def choice_prob(catalog: Catalog, i: int | None, S: Iterable[int]) -> float:
    """phi(i, S); pass i=None for the outside option."""
    S = as_assortment(S)
    denom = 1.0 + float(catalog.weights[list(S)].sum())
    if i is None:
        return 1.0 / denom
    if i not in S:
        raise ValueError(f"product {i} is not offered in {S}")
    return float(catalog.weights[i]) / denom


def choice_probs(catalog: Catalog, S: Iterable[int]) -> np.ndarray:
    """Vector of purchase probabilities over all products (zero off S)."""
    mask = np.zeros(catalog.n, dtype=bool)
    mask[list(as_assortment(S))] = True
    w = np.where(mask, catalog.weights, 0.0)
    return w / (1.0 + w.sum())


def assortment_revenue(catalog: Catalog, S: Iterable[int]) -> float:
    idx = list(as_assortment(S))
    if not idx:
        return 0.0
    v = catalog.weights[idx]
    return float(np.dot(catalog.prices[idx], v) / (1.0 + v.sum()))


def prefix_revenues(catalog: Catalog, products: np.ndarray) -> np.ndarray:
    """R of each prefix of `products` (assumed in price order); entry k is the prefix of length k+1."""
    v = catalog.weights[products]
    return np.cumsum(catalog.prices[products] * v) / (1.0 + np.cumsum(v))


def optimal_static_assortment(
    catalog: Catalog,
    available: Iterable[int] | None = None,
    max_size: int | None = None,
    costs: np.ndarray | None = None,
    budget: float | None = None,
) -> Assortment:
    """Best revenue-ordered prefix of the available products.

    `max_size` limits the prefix length; `costs`/`budget` keep only prefixes
    whose unit costs fit. Ties go to the shorter prefix.
    """
    if available is None:
        avail = np.arange(catalog.n)
    else:
        avail = np.array(as_assortment(available), dtype=int)
    if costs is not None and budget is not None:
        avail = avail[costs[avail] <= budget + 1e-12]
        fits = np.cumsum(costs[avail]) <= budget + 1e-12
        avail = avail[: int(np.sum(fits))]
    if max_size is not None:
        avail = avail[: max(int(max_size), 0)]
    if avail.size == 0:
        return ()
    R = prefix_revenues(catalog, avail)
    best = R.max()
    if best <= TIE_TOL:
        return ()
    k = int(np.argmax(R >= best - TIE_TOL))
    return tuple(int(i) for i in avail[: k + 1])
