"""Exact evaluators behind the approximation constants.

Everything here is a finite sum; no sampling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .catalog import Catalog, Demand, ValidationError, geometric, is_ifr
from .fluid import fp_consumption
from .simulator import expected_da_consumption

ONE_MINUS_INV_E = 1.0 - np.exp(-1.0)
INV_E = np.exp(-1.0)


def single_item_expected_sales(p: float, T: int, cap: int) -> float:
    """E[min(Binomial(T, p), cap)]."""
    if T <= 0 or cap <= 0:
        return 0.0
    k = np.arange(T + 1)
    return float(np.dot(np.minimum(k, cap), stats.binom.pmf(k, T, p)))


def check_single_item_bound(p: float, T: int, cap: int) -> float:
    denom = min(p * T, cap)
    if denom <= 0:
        return 1.0
    return single_item_expected_sales(p, T, cap) / denom


def rounding_bound(T: float) -> float:
    return 1.0 - 1.0 / (T + 1.0)


@dataclass(frozen=True)
class GeometricRatio:
    formula: float  # 1 - 1/(2-p)
    expected_sales: float  # E[min(Bin(T,p),1)], T = failures before first success
    ratio: float  # E[min(Bin(T,p),1)] / min(mu p, 1), T on {1, 2, ...}


def geometric_ratio(p: float) -> GeometricRatio:
    """One unit, purchase probability p, geometric number of customers with mean about 1/p."""
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    d = geometric(p)  # support {1, 2, ...}
    k = np.arange(d.t_max + 1)
    sold = stats.binom.sf(0, k, p)
    ratio = float(np.dot(d.pmf, sold)) / min(d.mean * p, 1.0)
    # failures-before-success variant is the same law shifted down by one
    shifted = np.concatenate([d.pmf[1:], [0.0]])
    return GeometricRatio(1.0 - 1.0 / (2.0 - p), float(np.dot(shifted, sold)), ratio)


def shifted_geometric_objective(x) -> np.ndarray | float:
    x = np.asarray(x, dtype=float)
    out = (x / (x + 1.0)) ** x
    return float(out) if out.ndim == 0 else out


def shifted_geometric_infimum(x_max: float, points: int = 4001) -> tuple[float, float]:
    """(infimum, argmin) of the reduced objective over [1, x_max] on a log grid plus endpoints."""
    xs = np.unique(np.concatenate([np.geomspace(1.0, x_max, points), [1.0, x_max]]))
    vals = shifted_geometric_objective(xs)
    j = int(np.argmin(vals))
    return float(vals[j]), float(xs[j])


def ifr_product_bound_check(catalog: Catalog, x, demand: Demand, require_ifr: bool = True) -> float:
    """min over products of E_T[sales under random T] / fluid sales at the mean horizon."""
    if require_ifr and not is_ifr(demand):
        raise ValidationError("demand is not IFR")
    sim = expected_da_consumption(catalog, x, demand)
    fluid = fp_consumption(catalog, x, demand.mean)
    live = fluid > 1e-12
    if not live.any():
        return 1.0
    return float(np.min(sim[live] / fluid[live]))
