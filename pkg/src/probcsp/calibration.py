"""Predicted versus observed arc-inconsistency on generated networks.

For each trial a network is generated, ``k`` actual values are removed from
a few selected variables, and two observed counts are recorded:

* first round: values (of the original domains) left with no surviving
  support on some constraint, which is the quantity the expectation models;
* fixpoint: values not removed by the event but pruned once AC-3 runs to
  its fixpoint on the reduced domains.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .core import ConstraintNetwork, RemovalProfile, ac3
from .generator import GeneratorConfig, generate
from .oracle import BudgetExceeded, DEFAULT_BUDGET, colex_subsets
from .probability import bound_network, expected_network, expected_network_exact

__all__ = [
    "CalibrationRow",
    "CSV_FIELDS",
    "first_round_dead",
    "fixpoint_pruned",
    "run_calibrate",
    "rows_to_csv",
]

CSV_FIELDS = ("trial", "seed", "e_pred", "e_lower", "actual_first_round", "actual_fixpoint")


@dataclass
class CalibrationRow:
    trial: int
    seed: int
    e_pred: float
    e_lower: float
    actual_first_round: Fraction
    actual_fixpoint: Fraction
    e_exact: Fraction
    events: dict[str, int]


def first_round_dead(net: ConstraintNetwork, removed: list[np.ndarray]) -> int:
    """Number of values whose supports on some constraint all lie in ``removed``."""
    total = 0
    for i in range(net.n):
        dead = np.zeros(net.domain_size(i), dtype=bool)
        for j in net.neighbors[i]:
            dead |= ~(net.relations[(i, j)] & ~removed[j]).any(axis=1)
        total += int(dead.sum())
    return total


def fixpoint_pruned(net: ConstraintNetwork, removed: list[np.ndarray]) -> int:
    """Values surviving the removal that AC-3 then deletes."""
    alive = [~r for r in removed]
    res = ac3(net, alive)
    return sum(int((a & ~b).sum()) for a, b in zip(alive, res.alive))


def _mask_to_bool(mask: int, d: int) -> np.ndarray:
    return np.array([(mask >> t) & 1 for t in range(d)], dtype=bool)


def _calibrate_one(net: ConstraintNetwork, profile: RemovalProfile, rng: np.random.Generator,
                   exhaustive: bool, budget: int) -> tuple[Fraction, Fraction]:
    movers = [j for j in range(net.n) if profile.k[j]]
    if not exhaustive:
        removed = [np.zeros(net.domain_size(j), dtype=bool) for j in range(net.n)]
        for j in movers:
            removed[j][rng.choice(net.domain_size(j), size=profile.k[j], replace=False)] = True
        return Fraction(first_round_dead(net, removed)), Fraction(fixpoint_pruned(net, removed))
    total = math.prod(math.comb(net.domain_size(j), profile.k[j]) for j in movers)
    if total > budget:
        raise BudgetExceeded(f"{total} joint removal outcomes exceed the budget of {budget}")
    first = fix = 0
    options = [list(colex_subsets(net.domain_size(j), profile.k[j])) for j in movers]
    for joint in product(*options):
        removed = [np.zeros(net.domain_size(j), dtype=bool) for j in range(net.n)]
        for j, m in zip(movers, joint):
            removed[j] = _mask_to_bool(m, net.domain_size(j))
        first += first_round_dead(net, removed)
        fix += fixpoint_pruned(net, removed)
    return Fraction(first, total), Fraction(fix, total)


def run_calibrate(config: GeneratorConfig, k: int, trials: int, event_vars: int = 1,
                  exhaustive: bool = False, budget: int = DEFAULT_BUDGET) -> list[CalibrationRow]:
    """One row per trial; trial t uses seed ``config.seed + t``.

    ``k`` values are removed from each of ``event_vars`` variables picked at
    random (``k`` is capped at the domain size). With ``exhaustive`` the
    observed columns are exact means over every joint removal outcome.
    """
    rows = []
    for t in range(trials):
        seed = config.seed + t
        cfg = GeneratorConfig(config.n, config.d, config.density, config.tightness, seed)
        net = generate(cfg)
        rng = np.random.Generator(np.random.PCG64([seed, 1]))
        picks = sorted(rng.choice(net.n, size=min(event_vars, net.n), replace=False).tolist())
        kk = [0] * net.n
        for j in picks:
            kk[j] = min(k, net.domain_size(j))
        profile = RemovalProfile(tuple(kk))
        counts = net.counts
        first, fix = _calibrate_one(net, profile, rng, exhaustive, budget)
        rows.append(CalibrationRow(
            trial=t,
            seed=seed,
            e_pred=expected_network(net, counts, profile),
            e_lower=bound_network(net, counts, profile),
            actual_first_round=first,
            actual_fixpoint=fix,
            e_exact=expected_network_exact(net, counts, profile),
            events=profile.as_dict(net),
        ))
    return rows


def rows_to_csv(rows: list[CalibrationRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in sorted(rows, key=lambda r: r.trial):
        w.writerow([r.trial, r.seed, f"{r.e_pred:.9g}", f"{r.e_lower:.9g}",
                    f"{float(r.actual_first_round):.9g}", f"{float(r.actual_fixpoint):.9g}"])
    return buf.getvalue()
