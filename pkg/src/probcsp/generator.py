"""Seeded random binary CSP instances."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import ConstraintNetwork

__all__ = ["GeneratorConfig", "generate", "random_instance"]


@dataclass(frozen=True)
class GeneratorConfig:
    """Standard (n, d, density, tightness) model.

    ``density`` is the fraction of the n(n-1)/2 variable pairs that get a
    constraint; ``tightness`` the fraction of the d*d value pairs each
    constraint forbids. Both counts are rounded down.
    """

    n: int
    d: int
    density: float
    tightness: float
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be at least 1")
        if not 0.0 <= self.density <= 1.0 or not 0.0 <= self.tightness <= 1.0:
            raise ValueError("density and tightness must lie in [0, 1]")

    @property
    def n_constraints(self) -> int:
        # decimal reading of the float so 0.29 * 100 gives 29, not 28
        return math.floor(Fraction(repr(self.density)) * (self.n * (self.n - 1) // 2))

    @property
    def n_forbidden(self) -> int:
        return math.floor(Fraction(repr(self.tightness)) * self.d * self.d)


def generate(config: GeneratorConfig) -> ConstraintNetwork:
    """Deterministic for a fixed config; domains are 1..d, variables x1..xn."""
    rng = np.random.Generator(np.random.PCG64(config.seed))
    n, d = config.n, config.d
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = sorted(rng.choice(len(pairs), size=config.n_constraints, replace=False).tolist())
    names = [f"x{i + 1}" for i in range(n)]
    values = list(range(1, d + 1))
    constraints = []
    for c in chosen:
        i, j = pairs[c]
        forbidden = set(rng.choice(d * d, size=config.n_forbidden, replace=False).tolist())
        sup = [(values[t // d], values[t % d]) for t in range(d * d) if t not in forbidden]
        constraints.append(((names[i], names[j]), sup))
    return ConstraintNetwork.build(names, [values] * n, constraints)


def random_instance(rng: np.random.Generator, max_n: int, max_d: int, max_degree: int,
                    min_d: int = 1, edge_prob: float = 0.6) -> ConstraintNetwork:
    """Small irregular network: per-variable domain sizes, bounded degree,
    and relations whose allowed-tuple density is itself random.

    Used for oracle comparisons and property tests.
    """
    n = int(rng.integers(1, max_n + 1))
    sizes = rng.integers(min_d, max_d + 1, size=n).tolist()
    names = [f"v{i}" for i in range(n)]
    domains = [list(range(1, s + 1)) for s in sizes]
    deg = [0] * n
    constraints = []
    for i in range(n):
        for j in range(i + 1, n):
            if deg[i] >= max_degree or deg[j] >= max_degree or rng.random() >= edge_prob:
                continue
            deg[i] += 1
            deg[j] += 1
            allow = rng.random()
            mask = rng.random((sizes[i], sizes[j])) < allow
            sup = [(a + 1, b + 1) for a, b in zip(*np.nonzero(mask))]
            constraints.append(((names[i], names[j]), sup))
    return ConstraintNetwork.build(names, domains, constraints)
