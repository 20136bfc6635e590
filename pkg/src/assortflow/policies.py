"""Online assortment policies for personalized offers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .catalog import Catalog, CustomerTypes
from .cdlp import multi_type_sblp_reference
from .choice import Assortment, as_assortment, optimal_static_assortment
from .fluid import sequence


@dataclass(frozen=True)
class SamplingPolicy:
    """Per type, a distribution over assortments taken from the fluid LP optimum."""

    assortments: tuple[tuple[Assortment, ...], ...]
    probs: tuple[np.ndarray, ...]
    objective: float


def build_sampling_policy(types: CustomerTypes, c, T: float) -> SamplingPolicy:
    sol = multi_type_sblp_reference(types, c, T)
    all_sets, all_probs = [], []
    for k, cat in enumerate(types.catalogs):
        H = types.lam[k] * T
        mass: dict[Assortment, float] = {}
        if H > 0:
            # the fluid run over the LP sales sells exactly those sales
            for S, t in sequence(cat, sol.sales[k], H).phases():
                mass[S] = mass.get(S, 0.0) + t / H
        slack = 1.0 - sum(mass.values())
        if slack > 1e-12 or not mass:
            mass[()] = mass.get((), 0.0) + max(slack, 0.0)
        sets = tuple(mass)
        p = np.array([mass[S] for S in sets])
        all_sets.append(sets)
        all_probs.append(p / p.sum())
    return SamplingPolicy(tuple(all_sets), tuple(all_probs), sol.objective)


def sampling_offer(policy: SamplingPolicy, k: int, available: Iterable[int], rng: np.random.Generator) -> Assortment:
    sets = policy.assortments[k]
    j = int(rng.choice(len(sets), p=policy.probs[k]))
    avail = set(as_assortment(available))
    return tuple(i for i in sets[j] if i in avail)


def greedy_offer(catalog: Catalog, available: Iterable[int]) -> Assortment:
    return optimal_static_assortment(catalog, available)
