"""ProbAC: worklist propagation of removal hypotheses.

A variable whose hypothesised removal count is positive threatens the values
of its neighbours; each threatened value keeps the largest per-constraint
probability seen so far, and a neighbour whose expected number of
inconsistent values floors above its own removal count is re-queued with
that larger count.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np

from . import kernels
from .core import ConstraintNetwork, NetworkError, RemovalProfile, SupportCounts

__all__ = [
    "PropagationState",
    "PropagationInvariantError",
    "prob_ac",
    "propagation_trace",
    "replay_trace",
    "state_to_dict",
]


class PropagationInvariantError(RuntimeError):
    """The worklist broke the enqueue bound or the expectation drifted."""


@dataclass
class PropagationState:
    rem: np.ndarray
    p: list[np.ndarray]
    e: np.ndarray
    e_net: float
    enqueue_count: np.ndarray
    worklist: deque = field(default_factory=deque)


def _check_profile(net: ConstraintNetwork, initial: RemovalProfile) -> None:
    if not isinstance(initial, RemovalProfile):
        raise NetworkError("initial removal profile must be a RemovalProfile")
    initial.validate(net)


def _trace_capacity(counts: SupportCounts) -> int:
    # each entry of x_i scans every neighbour once; x_i enters at most |D_i| times
    ds = counts.dom_size
    n = len(ds)
    cap = int(counts.zero_support.sum()) + int(ds.sum())
    for i in range(n):
        nb = counts.nbr_idx[counts.nbr_ptr[i]:counts.nbr_ptr[i + 1]]
        cap += int(ds[i]) * int(ds[nb].sum())
    return cap


def _run(net: ConstraintNetwork, counts: SupportCounts, initial: RemovalProfile,
         record: bool, backend: str | None):
    _check_profile(net, initial)
    loop = kernels.get_loop(backend)
    cap = _trace_capacity(counts) if record else 0
    ev = (
        np.zeros(cap, np.int8),
        np.zeros(cap, np.int64),
        np.zeros(cap, np.int64),
        np.zeros(cap, np.float64),
        np.zeros(cap, np.float64),
        np.zeros(cap, np.int64),
        np.zeros(cap, np.bool_),
    )
    rem = np.array(initial.k, dtype=np.int64)
    p, e, e_net, enq, n_ev, status = loop(
        counts.nbr_ptr, counts.nbr_idx, counts.rev_ptr, counts.rev_cnt,
        counts.dom_size, counts.dom_ptr, counts.zero_support, rem, record, *ev,
    )
    if status == kernels.ENQUEUE_BOUND_EXCEEDED:
        bad = [net.names[i] for i in range(net.n) if enq[i] > counts.dom_size[i]]
        raise PropagationInvariantError(
            f"variable(s) {bad} entered the worklist more often than their domain size"
        )
    if status == kernels.EXPECTATION_DRIFT:
        raise PropagationInvariantError(
            f"incremental expectation drifted more than {kernels.DRIFT_TOL} from the row sum"
        )
    ptr = counts.dom_ptr
    state = PropagationState(
        rem=rem,
        p=[p[ptr[i]:ptr[i + 1]].copy() for i in range(net.n)],
        e=e,
        e_net=float(e_net),
        enqueue_count=enq,
    )
    return state, ev, int(n_ev)


def prob_ac(net: ConstraintNetwork, counts: SupportCounts, initial: RemovalProfile,
            backend: str | None = None) -> PropagationState:
    """Run ProbAC to its fixpoint and return the final state.

    ``p[j][t]`` is a lower bound on the probability that the t-th value of
    ``D_j`` becomes arc-inconsistent; ``e`` and ``e_net`` are the matching
    per-domain and network lower bounds on the expected counts, all
    evaluated at the final ``rem`` table.

    Values with no support on some constraint start at probability 1 (that
    holds for every removal count, including zero). The worklist is FIFO and
    a variable already queued is not added twice.
    """
    state, _, _ = _run(net, counts, initial, False, backend)
    return state


def propagation_trace(net: ConstraintNetwork, counts: SupportCounts, initial: RemovalProfile,
                      backend: str | None = None) -> list[dict[str, Any]]:
    """Event log of a ProbAC run, one record per probability update or removal-count raise."""
    _, ev, n_ev = _run(net, counts, initial, True, backend)
    kind, var, val, old, new, rem, queued = ev
    out: list[dict[str, Any]] = []
    for t in range(n_ev):
        i = int(var[t])
        if kind[t] == kernels.EV_UPDATE:
            out.append({
                "ev": "update",
                "var": net.names[i],
                "value": net.domains[i][int(val[t])],
                "old": float(old[t]),
                "new": float(new[t]),
            })
        else:
            out.append({"ev": "enqueue", "var": net.names[i], "rem": int(rem[t]),
                        "queued": bool(queued[t])})
    return out


def replay_trace(net: ConstraintNetwork, initial: RemovalProfile,
                 events: Iterable[dict[str, Any]]) -> PropagationState:
    """Rebuild the final state from the initial profile and an event log."""
    rem = np.array(initial.k, dtype=np.int64)
    enq = (rem > 0).astype(np.int64)
    p = [np.zeros(len(d)) for d in net.domains]
    for rec in events:
        i = net.index_of(rec["var"])
        if rec["ev"] == "update":
            p[i][net.value_index(i, rec["value"])] = rec["new"]
        elif rec["ev"] == "enqueue":
            rem[i] = rec["rem"]
            if rec.get("queued", True):
                enq[i] += 1
        else:
            raise ValueError(f"unknown trace event {rec['ev']!r}")
    e = np.array([sum(row.tolist()) for row in p])
    return PropagationState(rem=rem, p=p, e=e, e_net=float(sum(e.tolist())), enqueue_count=enq)


def state_to_dict(net: ConstraintNetwork, state: PropagationState, digits: int = 9) -> dict[str, Any]:
    def r(x: float) -> float:
        return float(f"{x:.{digits}g}")

    return {
        "values": [
            {"var": net.names[i], "value": w, "p_lower": r(state.p[i][t])}
            for i in range(net.n)
            for t, w in enumerate(net.domains[i])
        ],
        "domains": [
            {"var": net.names[i], "e_lower": r(state.e[i]), "size": net.domain_size(i)}
            for i in range(net.n)
        ],
        "network": {"e_lower": r(state.e_net)},
        "rem": {net.names[i]: int(state.rem[i]) for i in range(net.n)},
        "enqueue_counts": {net.names[i]: int(state.enqueue_count[i]) for i in range(net.n)},
    }
