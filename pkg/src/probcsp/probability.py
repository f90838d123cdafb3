"""Probabilities and expectations of arc-inconsistency under removal hypotheses.

The model: for each variable j with a hypothesised removal count k(j), the
removed values form a uniformly random k(j)-subset of ``D_j``, drawn
independently across variables. A value w of ``D_i`` becomes
arc-inconsistent on ``C_ij`` exactly when every one of its supports in
``D_j`` is removed. Because the subsets of different neighbours are
independent, the per-constraint survival probabilities multiply:
P(w) = 1 - prod_j (1 - q_j), accumulated here as P <- P + (1 - P) q_j.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np

from .core import ConstraintNetwork, RemovalProfile, SupportCounts
from .kernels import prob_scalar, prob_vector

__all__ = [
    "prob_value_constraint",
    "prob_value_constraint_exact",
    "binomial_ratio",
    "prob_value_network",
    "expected_domain",
    "expected_network",
    "expected_network_exact",
    "bound_value",
    "bound_domain",
    "bound_network",
    "ProbabilityReport",
    "analyze",
    "report_to_dict",
]


def _check_args(support_count: int, partner_domain_size: int, k: int) -> None:
    for name, x in (("support_count", support_count), ("partner_domain_size", partner_domain_size),
                    ("k", k)):
        if not isinstance(x, (int, np.integer)) or isinstance(x, bool):
            raise TypeError(f"{name} must be an integer, got {x!r}")
    if support_count < 0:
        raise ValueError(f"support_count={support_count} violates 0 <= support_count")
    if support_count > partner_domain_size:
        raise ValueError(
            f"support_count={support_count} violates support_count <= partner_domain_size={partner_domain_size}"
        )
    if k < 0:
        raise ValueError(f"k={k} violates 0 <= k")
    if k > partner_domain_size:
        raise ValueError(f"k={k} violates k <= partner_domain_size={partner_domain_size}")


def prob_value_constraint(support_count: int, partner_domain_size: int, k: int) -> float:
    """Probability that a value with ``support_count`` supports in a domain of
    ``partner_domain_size`` values loses all of them when ``k`` uniformly
    chosen values are removed from that domain.

    >>> prob_value_constraint(2, 4, 2)
    0.16666666666666666
    """
    _check_args(support_count, partner_domain_size, k)
    return prob_scalar(int(support_count), int(partner_domain_size), int(k))


def prob_value_constraint_exact(support_count: int, partner_domain_size: int, k: int) -> Fraction:
    """Same three cases and product as :func:`prob_value_constraint`, in rationals."""
    _check_args(support_count, partner_domain_size, k)
    p, d, k = int(support_count), int(partner_domain_size), int(k)
    if p == 0:
        return Fraction(1)
    if p > k:
        return Fraction(0)
    acc = Fraction(1)
    for ell in range(1, p + 1):
        acc *= Fraction(k - p + ell, d - p + ell)
    return acc


def binomial_ratio(support_count: int, partner_domain_size: int, k: int) -> Fraction:
    """C(d-p, k-p) / C(d, k): removal subsets containing every support, over all subsets."""
    _check_args(support_count, partner_domain_size, k)
    p, d = int(support_count), int(partner_domain_size)
    if k < p:
        return Fraction(0)
    return Fraction(math.comb(d - p, k - p), math.comb(d, k))


def _arc_probs(net: ConstraintNetwork, counts: SupportCounts, profile: RemovalProfile,
               i: int) -> list[tuple[int, np.ndarray]]:
    return [
        (j, prob_vector(counts.arc(i, j), net.domain_size(j), int(profile.k[j])))
        for j in net.neighbors[i]
    ]


def _combine(acc, q):
    # acc + (1 - acc) q == 1 - (1 - acc)(1 - q); the clamp keeps max(acc, q) <= result <= 1
    # under rounding, and one neighbour gives exactly q
    return np.minimum(1.0, np.maximum(np.maximum(acc, q), acc + (1.0 - acc) * q))


def _network_row(arc_probs: list[tuple[int, np.ndarray]], size: int) -> np.ndarray:
    acc = np.zeros(size)
    for _, q in arc_probs:
        acc = _combine(acc, q)
    return acc


def _lower_row(arc_probs: list[tuple[int, np.ndarray]], size: int) -> np.ndarray:
    low = np.zeros(size)
    for _, q in arc_probs:
        low = np.maximum(low, q)
    return low


def _seqsum(values) -> float:
    s = 0.0
    for x in values:
        s += float(x)
    return s


def _resolve(net: ConstraintNetwork, var, w=None) -> tuple[int, int | None]:
    i = net.index_of(var)
    return i, (None if w is None else net.value_index(i, w))


def prob_value_network(net: ConstraintNetwork, counts: SupportCounts, profile: RemovalProfile,
                       i, w: int) -> float:
    """Probability that value ``w`` of variable ``i`` loses all supports on at least one constraint."""
    i, t = _resolve(net, i, w)
    acc = 0.0
    for j in net.neighbors[i]:
        q = prob_scalar(counts.count(i, j, t), net.domain_size(j), int(profile.k[j]))
        acc = min(1.0, max(acc, q, acc + (1.0 - acc) * q))
    return acc


def expected_domain(net: ConstraintNetwork, counts: SupportCounts, profile: RemovalProfile, i) -> float:
    i, _ = _resolve(net, i)
    row = _network_row(_arc_probs(net, counts, profile, i), net.domain_size(i))
    return _seqsum(row)


def expected_network(net: ConstraintNetwork, counts: SupportCounts, profile: RemovalProfile) -> float:
    return _seqsum(expected_domain(net, counts, profile, i) for i in range(net.n))


def expected_network_exact(net: ConstraintNetwork, counts: SupportCounts,
                           profile: RemovalProfile) -> Fraction:
    """Network expectation evaluated in exact rational arithmetic."""
    total = Fraction(0)
    for i in range(net.n):
        for t in range(net.domain_size(i)):
            surv = Fraction(1)
            for j in net.neighbors[i]:
                surv *= 1 - prob_value_constraint_exact(
                    counts.count(i, j, t), net.domain_size(j), int(profile.k[j])
                )
            total += 1 - surv
    return total


def bound_value(net: ConstraintNetwork, counts: SupportCounts, profile: RemovalProfile, i, w: int) -> float:
    """Largest single-constraint probability; 0 for a variable without constraints."""
    i, t = _resolve(net, i, w)
    best = 0.0
    for j in net.neighbors[i]:
        best = max(best, prob_scalar(counts.count(i, j, t), net.domain_size(j), int(profile.k[j])))
    return best


def bound_domain(net: ConstraintNetwork, counts: SupportCounts, profile: RemovalProfile,
                 i) -> tuple[float, int]:
    i, _ = _resolve(net, i)
    size = net.domain_size(i)
    return _seqsum(_lower_row(_arc_probs(net, counts, profile, i), size)), size


def bound_network(net: ConstraintNetwork, counts: SupportCounts, profile: RemovalProfile) -> float:
    return _seqsum(bound_domain(net, counts, profile, i)[0] for i in range(net.n))


@dataclass
class ProbabilityReport:
    p_constraint: dict[tuple[int, int], np.ndarray]
    p_network: list[np.ndarray]
    p_lower: list[np.ndarray]
    e_domain: np.ndarray
    e_domain_lower: np.ndarray
    e_network: float
    e_network_lower: float


def analyze(net: ConstraintNetwork, counts: SupportCounts, profile: RemovalProfile) -> ProbabilityReport:
    """All closed-form quantities for one removal profile."""
    profile.validate(net)
    p_constraint = {}
    p_network, p_lower = [], []
    for i in range(net.n):
        arcs = _arc_probs(net, counts, profile, i)
        for j, q in arcs:
            p_constraint[(i, j)] = q
        size = net.domain_size(i)
        p_network.append(_network_row(arcs, size))
        p_lower.append(_lower_row(arcs, size))
    e_domain = np.array([_seqsum(r) for r in p_network])
    e_lower = np.array([_seqsum(r) for r in p_lower])
    return ProbabilityReport(
        p_constraint=p_constraint,
        p_network=p_network,
        p_lower=p_lower,
        e_domain=e_domain,
        e_domain_lower=e_lower,
        e_network=_seqsum(e_domain),
        e_network_lower=_seqsum(e_lower),
    )


def _sig(x: float, digits: int = 9) -> float:
    return float(f"{float(x):.{digits}g}")


def report_to_dict(net: ConstraintNetwork, report: ProbabilityReport) -> dict[str, Any]:
    values = []
    for i in range(net.n):
        for t, w in enumerate(net.domains[i]):
            values.append({
                "var": net.names[i],
                "value": w,
                "p_network": _sig(report.p_network[i][t]),
                "p_lower": _sig(report.p_lower[i][t]),
                "per_constraint": {
                    net.names[j]: _sig(report.p_constraint[(i, j)][t]) for j in net.neighbors[i]
                },
            })
    return {
        "values": values,
        "domains": [
            {"var": net.names[i], "e": _sig(report.e_domain[i]),
             "e_lower": _sig(report.e_domain_lower[i]), "size": net.domain_size(i)}
            for i in range(net.n)
        ],
        "network": {"e": _sig(report.e_network), "e_lower": _sig(report.e_network_lower)},
    }
