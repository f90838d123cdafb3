"""Brute-force checks of the removal-probability model.

Everything here counts outcomes literally: removal subsets are enumerated
as index bitmasks in colex order and a value is declared inconsistent when
its support mask is contained in the removed mask. Results are exact
fractions. :func:`monte_carlo_expected_network` samples instead of
enumerating, for instances beyond the enumeration budget.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterator

import numpy as np

from .core import ConstraintNetwork, RemovalProfile

__all__ = [
    "EnumerationBudget",
    "BudgetExceeded",
    "DEFAULT_BUDGET",
    "colex_subsets",
    "count_supersets",
    "oracle_prob_constraint",
    "oracle_prob_network",
    "oracle_expected_domain",
    "oracle_expected_network",
    "monte_carlo_expected_network",
]

DEFAULT_BUDGET = 2_000_000


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class EnumerationBudget:
    max_total_subsets: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.max_total_subsets <= 0:
            raise ValueError("max_total_subsets must be positive")

    def check(self, total: int, what: str) -> None:
        if total > self.max_total_subsets:
            raise BudgetExceeded(
                f"{what}: {total} removal outcomes exceed the budget of {self.max_total_subsets}"
            )


def _budget(budget: EnumerationBudget | int | None) -> EnumerationBudget:
    if budget is None:
        return EnumerationBudget()
    if isinstance(budget, EnumerationBudget):
        return budget
    return EnumerationBudget(int(budget))


def colex_subsets(d: int, k: int) -> Iterator[int]:
    """All k-subsets of range(d) as bitmasks, in colex (increasing integer) order."""
    if k < 0 or k > d:
        return
    if k == 0:
        yield 0
        return
    x = (1 << k) - 1
    limit = 1 << d
    while x < limit:
        yield x
        # Gosper's hack: next integer with the same popcount
        c = x & -x
        r = x + c
        x = (((r ^ x) >> 2) // c) | r


def _mask(indices) -> int:
    m = 0
    for t in indices:
        m |= 1 << int(t)
    return m


def count_supersets(support_mask: int, d: int, k: int) -> tuple[int, int]:
    """(number of k-subsets of range(d) containing ``support_mask``, number of k-subsets)."""
    hit = total = 0
    for r in colex_subsets(d, k):
        total += 1
        if r & support_mask == support_mask:
            hit += 1
    return hit, total


def oracle_prob_constraint(net: ConstraintNetwork, i, w: int, j, k: int,
                           budget: EnumerationBudget | int | None = None) -> Fraction:
    """Fraction of k-subsets of ``D_j`` whose removal strips every support of ``w``."""
    i, j = net.index_of(i), net.index_of(j)
    d = net.domain_size(j)
    if not 0 <= k <= d:
        raise ValueError(f"k={k} must lie in [0, {d}]")
    _budget(budget).check(math.comb(d, k), "oracle_prob_constraint")
    sup = _mask(net.supports(i, j, net.value_index(i, w)))
    hit, total = count_supersets(sup, d, k)
    return Fraction(hit, total)


def _neighbour_outcomes(net: ConstraintNetwork, profile: RemovalProfile, js) -> list[list[int]]:
    return [list(colex_subsets(net.domain_size(j), int(profile.k[j]))) for j in js]


def oracle_prob_network(net: ConstraintNetwork, profile: RemovalProfile, i, w: int,
                        budget: EnumerationBudget | int | None = None) -> Fraction:
    """Joint enumeration over the removal subsets of all neighbours of ``i``."""
    i = net.index_of(i)
    t = net.value_index(i, w)
    js = net.neighbors[i]
    total = math.prod(math.comb(net.domain_size(j), int(profile.k[j])) for j in js)
    _budget(budget).check(total, "oracle_prob_network")
    sups = [_mask(net.supports(i, j, t)) for j in js]
    hit = 0
    for outcome in product(*_neighbour_outcomes(net, profile, js)):
        if any(r & s == s for r, s in zip(outcome, sups)):
            hit += 1
    return Fraction(hit, total)


def _kill_table(net: ConstraintNetwork, i: int, j: int, outcomes: list[int]) -> dict[int, int]:
    # removal mask of D_j -> mask of D_i values left without support on C_ij
    sups = [_mask(net.supports(i, j, t)) for t in range(net.domain_size(i))]
    table = {}
    for r in outcomes:
        dead = 0
        for t, s in enumerate(sups):
            if r & s == s:
                dead |= 1 << t
        table[r] = dead
    return table


def _enumerate_dead_counts(net: ConstraintNetwork, profile: RemovalProfile, targets,
                           budget: EnumerationBudget, what: str) -> tuple[int, int]:
    """Sum over joint outcomes of the number of dead values among ``targets``, and the outcome count."""
    movers = sorted({j for i in targets for j in net.neighbors[i]})
    total = math.prod(math.comb(net.domain_size(j), int(profile.k[j])) for j in movers)
    budget.check(total, what)
    outcomes = _neighbour_outcomes(net, profile, movers)
    pos = {j: t for t, j in enumerate(movers)}
    tables = {
        (i, j): _kill_table(net, i, j, outcomes[pos[j]]) for i in targets for j in net.neighbors[i]
    }
    acc = 0
    for joint in product(*outcomes):
        for i in targets:
            dead = 0
            for j in net.neighbors[i]:
                dead |= tables[(i, j)][joint[pos[j]]]
            acc += dead.bit_count()
    return acc, total


def oracle_expected_domain(net: ConstraintNetwork, profile: RemovalProfile, i,
                           budget: EnumerationBudget | int | None = None) -> Fraction:
    """Average number of values of ``D_i`` left unsupported on some constraint."""
    i = net.index_of(i)
    acc, total = _enumerate_dead_counts(net, profile, [i], _budget(budget), "oracle_expected_domain")
    return Fraction(acc, total)


def oracle_expected_network(net: ConstraintNetwork, profile: RemovalProfile,
                            budget: EnumerationBudget | int | None = None) -> Fraction:
    """Average number of unsupported values over every joint removal outcome of the network."""
    acc, total = _enumerate_dead_counts(
        net, profile, list(range(net.n)), _budget(budget), "oracle_expected_network"
    )
    return Fraction(acc, total)


def _sample_removed(rng: np.random.Generator, d: int, k: int, samples: int) -> np.ndarray:
    """Boolean (samples, d) matrix of uniform k-subsets via partial Fisher-Yates."""
    perm = np.tile(np.arange(d), (samples, 1))
    rows = np.arange(samples)
    for t in range(k):
        r = t + rng.integers(0, d - t, size=samples)
        a = perm[rows, t].copy()
        perm[rows, t] = perm[rows, r]
        perm[rows, r] = a
    removed = np.zeros((samples, d), dtype=bool)
    if k:
        removed[rows[:, None], perm[:, :k]] = True
    return removed


def monte_carlo_expected_network(net: ConstraintNetwork, profile: RemovalProfile, samples: int,
                                 seed: int) -> tuple[float, float]:
    """Sample mean and standard error of the unsupported-value count.

    Uses ``numpy.random.Generator(PCG64(seed))``; identical seeds give
    identical results.
    """
    if samples < 100:
        raise ValueError("samples must be at least 100")
    rng = np.random.Generator(np.random.PCG64(seed))
    removed = [_sample_removed(rng, net.domain_size(j), int(profile.k[j]), samples)
               for j in range(net.n)]
    counts = np.zeros(samples, dtype=np.int64)
    for i in range(net.n):
        dead = np.zeros((samples, net.domain_size(i)), dtype=bool)
        for j in net.neighbors[i]:
            rel = net.relations[(i, j)]
            for t in range(net.domain_size(i)):
                dead[:, t] |= removed[j][:, rel[t]].all(axis=1)
        counts += dead.sum(axis=1)
    est = float(counts.mean())
    err = float(counts.std(ddof=1) / math.sqrt(samples))
    return est, err
