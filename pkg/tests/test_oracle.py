import math
from fractions import Fraction

import numpy as np
import pytest

from probcsp.core import RemovalProfile, load_network
from probcsp.oracle import (
    BudgetExceeded,
    EnumerationBudget,
    colex_subsets,
    monte_carlo_expected_network,
    oracle_expected_domain,
    oracle_expected_network,
    oracle_prob_constraint,
    oracle_prob_network,
)


def chain(p, d):
    """a - b with value 1 of a supported by the first p values of b (|D_b| = d)."""
    return load_network({
        "variables": [{"name": "a", "domain": [1]}, {"name": "b", "domain": list(range(1, d + 1))}],
        "constraints": [{"scope": ["a", "b"], "supports": [[1, v] for v in range(1, p + 1)]}],
    })


def test_colex_order_and_count():
    subs = list(colex_subsets(5, 2))
    assert len(subs) == math.comb(5, 2)
    assert subs == sorted(subs)
    assert all(bin(s).count("1") == 2 for s in subs)
    assert list(colex_subsets(4, 0)) == [0]
    assert list(colex_subsets(3, 3)) == [0b111]


@pytest.mark.parametrize("p, d, k, expected", [
    (2, 4, 2, Fraction(1, 6)),
    (0, 5, 0, Fraction(1)),
    (0, 3, 2, Fraction(1)),
    (3, 5, 2, Fraction(0)),
])
def test_oracle_prob_constraint(p, d, k, expected):
    assert oracle_prob_constraint(chain(p, d), "a", 1, "b", k) == expected


def test_oracle_budget():
    with pytest.raises(BudgetExceeded):
        oracle_prob_constraint(chain(2, 10), "a", 1, "b", 5, budget=EnumerationBudget(100))
    with pytest.raises(ValueError):
        EnumerationBudget(0)


def test_oracle_network_single_neighbour():
    net = chain(2, 5)
    prof = RemovalProfile.from_mapping(net, {"b": 3})
    assert oracle_prob_network(net, prof, "a", 1) == oracle_prob_constraint(net, "a", 1, "b", 3)


def test_oracle_star(star):
    net, prof = star
    for w in (1, 2, 3):
        assert oracle_prob_network(net, prof, "c", w) == Fraction(11, 36)
    assert oracle_expected_domain(net, prof, "c") == Fraction(11, 12)
    assert oracle_expected_network(net, prof) == Fraction(11, 12)
    assert sum(oracle_expected_domain(net, prof, i) for i in range(net.n)) == Fraction(11, 12)


def test_oracle_zero_k_neighbour_contributes_nothing(star):
    net, _ = star
    prof = RemovalProfile.from_mapping(net, {"a": 2})
    assert oracle_prob_network(net, prof, "c", 1) == Fraction(1, 6)


def test_oracle_no_constraints():
    net = load_network({"variables": [{"name": "z", "domain": [1, 2]}]})
    assert oracle_expected_network(net, RemovalProfile((1,))) == 0


def test_mc_deterministic_instance():
    # empty relation: all 2 + 3 values are unsupported in every outcome
    net = load_network({
        "variables": [{"name": "a", "domain": [1, 2]}, {"name": "b", "domain": [1, 2, 3]}],
        "constraints": [{"scope": ["a", "b"], "supports": []}],
    })
    prof = RemovalProfile.from_mapping(net, {"b": 1})
    est, err = monte_carlo_expected_network(net, prof, 500, seed=1)
    assert (est, err) == (5.0, 0.0)


def test_mc_star_and_reproducibility(star):
    net, prof = star
    est, err = monte_carlo_expected_network(net, prof, 100_000, seed=7)
    assert abs(est - 11 / 12) <= 4 * err
    assert monte_carlo_expected_network(net, prof, 100_000, seed=7) == (est, err)


def test_mc_sampler_is_uniform():
    # each of the C(4,2)=6 subsets should appear with frequency ~1/6
    from probcsp.oracle import _sample_removed

    rng = np.random.Generator(np.random.PCG64(11))
    m = _sample_removed(rng, 4, 2, 60_000)
    assert (m.sum(axis=1) == 2).all()
    keys = (m * (1 << np.arange(4))).sum(axis=1)
    _, freq = np.unique(keys, return_counts=True)
    assert len(freq) == 6
    assert np.abs(freq / 60_000 - 1 / 6).max() < 0.01


def test_mc_rejects_tiny_samples(star):
    net, prof = star
    with pytest.raises(ValueError):
        monte_carlo_expected_network(net, prof, 10, seed=0)


def test_mc_coverage_rate(star):
    net, prof = star
    hits = 0
    for seed in range(200):
        est, err = monte_carlo_expected_network(net, prof, 2000, seed=seed)
        hits += abs(est - 11 / 12) <= 4 * err
    assert hits >= 198
