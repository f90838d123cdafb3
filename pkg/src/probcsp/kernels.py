"""Hot loops: the per-constraint removal probability and the ProbAC worklist.

Two interchangeable backends work on the flat arrays held by
:class:`probcsp.core.SupportCounts`:

* ``numba``: scalar loops compiled with ``@njit``;
* ``numpy``: the same worklist in Python, with each arc scan vectorised.

Both perform the same floating-point operations in the same order, so their
results are bit-identical. ``PROBCSP_DISABLE_NUMBA=1`` forces the numpy path
(it is also used when numba is not installed).
"""
from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

HAVE_NUMBA = numba is not None
NUMBA_DISABLED = os.environ.get("PROBCSP_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}
DEFAULT_BACKEND = "numba" if HAVE_NUMBA and not NUMBA_DISABLED else "numpy"

# status codes returned by the worklist loops
OK = 0
ENQUEUE_BOUND_EXCEEDED = 1
EXPECTATION_DRIFT = 2

DRIFT_TOL = 1e-9

EV_UPDATE = 0
EV_ENQUEUE = 1


def prob_scalar(p, d, k):
    """Three-case removal probability, product form, left-to-right."""
    if p == 0:
        return 1.0
    if p > k:
        return 0.0
    acc = 1.0
    for ell in range(1, p + 1):
        acc *= (k - p + ell) / (d - p + ell)
    return acc


def prob_vector(counts: np.ndarray, d: int, k: int) -> np.ndarray:
    """:func:`prob_scalar` over an array of support counts (same rounding)."""
    counts = np.asarray(counts, dtype=np.int64)
    out = np.ones(counts.shape, dtype=np.float64)
    top = int(counts.max(initial=0))
    for ell in range(1, min(top, k) + 1):
        m = counts >= ell
        c = counts[m]
        out[m] *= (k - c + ell) / (d - c + ell)
    out[counts > k] = 0.0
    return out


def _prob_ac_loop(nbr_ptr, nbr_idx, rev_ptr, rev_cnt, dom_size, dom_ptr, zero_support, rem,
                  record, ev_kind, ev_var, ev_val, ev_old, ev_new, ev_rem, ev_queued):
    n = dom_size.shape[0]
    p = np.zeros(dom_ptr[n])
    e = np.zeros(n)
    e_net = 0.0
    enq = np.zeros(n, np.int64)
    queue = np.empty(max(n, 1), np.int64)
    in_q = np.zeros(n, np.bool_)
    head = 0
    size = 0
    n_ev = 0

    # values without any support on some constraint are inconsistent whatever is removed
    for j in range(n):
        for t in range(dom_ptr[j], dom_ptr[j + 1]):
            if zero_support[t]:
                if record:
                    ev_kind[n_ev] = EV_UPDATE
                    ev_var[n_ev] = j
                    ev_val[n_ev] = t - dom_ptr[j]
                    ev_old[n_ev] = p[t]
                    ev_new[n_ev] = 1.0
                    n_ev += 1
                e_net = e_net - p[t] + 1.0
                e[j] = e[j] - p[t] + 1.0
                p[t] = 1.0
    for i in range(n):
        fl = int(math.floor(e[i]))
        if fl > rem[i]:
            if record:
                ev_kind[n_ev] = EV_ENQUEUE
                ev_var[n_ev] = i
                ev_rem[n_ev] = fl
                ev_queued[n_ev] = rem[i] == 0
                n_ev += 1
            rem[i] = fl
        if rem[i] > 0:
            queue[(head + size) % n] = i
            size += 1
            in_q[i] = True
            enq[i] += 1

    while size > 0:
        i = queue[head]
        head = (head + 1) % n
        size -= 1
        in_q[i] = False
        d_i = dom_size[i]
        k = rem[i]
        for a in range(nbr_ptr[i], nbr_ptr[i + 1]):
            j = nbr_idx[a]
            base = dom_ptr[j]
            c0 = rev_ptr[a]
            e_inc = e[j]
            for v in range(dom_size[j]):
                tmp = _prob_kernel(rev_cnt[c0 + v], d_i, k)
                old = p[base + v]
                if tmp > old:
                    e_net = e_net - old + tmp
                    e_inc = e_inc - old + tmp
                    p[base + v] = tmp
                    if record:
                        ev_kind[n_ev] = EV_UPDATE
                        ev_var[n_ev] = j
                        ev_val[n_ev] = v
                        ev_old[n_ev] = old
                        ev_new[n_ev] = tmp
                        n_ev += 1
            s = 0.0
            for v in range(dom_size[j]):
                s += p[base + v]
            if abs(s - e_inc) > DRIFT_TOL:
                return p, e, e_net, enq, n_ev, EXPECTATION_DRIFT
            e_net += s - e_inc
            e[j] = s
            fl = int(math.floor(s))
            if fl > rem[j]:
                rem[j] = fl
                queued = not in_q[j]
                if queued:
                    queue[(head + size) % n] = j
                    size += 1
                    in_q[j] = True
                    enq[j] += 1
                if record:
                    ev_kind[n_ev] = EV_ENQUEUE
                    ev_var[n_ev] = j
                    ev_rem[n_ev] = fl
                    ev_queued[n_ev] = queued
                    n_ev += 1
                if enq[j] > dom_size[j]:
                    return p, e, e_net, enq, n_ev, ENQUEUE_BOUND_EXCEEDED
    return p, e, e_net, enq, n_ev, OK


if HAVE_NUMBA:
    _prob_kernel = numba.njit(cache=True)(prob_scalar)
    prob_ac_loop_numba = numba.njit(cache=True)(_prob_ac_loop)
else:  # pragma: no cover
    _prob_kernel = prob_scalar
    prob_ac_loop_numba = None


def prob_ac_loop_numpy(nbr_ptr, nbr_idx, rev_ptr, rev_cnt, dom_size, dom_ptr, zero_support, rem,
                       record, ev_kind, ev_var, ev_val, ev_old, ev_new, ev_rem, ev_queued):
    """Same contract as the compiled loop; arc scans use :func:`prob_vector`."""
    n = int(dom_size.shape[0])
    p = np.zeros(int(dom_ptr[n]))
    e = np.zeros(n)
    e_net = 0.0
    enq = np.zeros(n, np.int64)
    in_q = np.zeros(n, np.bool_)
    queue: list[int] = []
    head = 0
    n_ev = 0

    for j in range(n):
        for t in range(int(dom_ptr[j]), int(dom_ptr[j + 1])):
            if zero_support[t]:
                if record:
                    ev_kind[n_ev], ev_var[n_ev], ev_val[n_ev] = EV_UPDATE, j, t - dom_ptr[j]
                    ev_old[n_ev], ev_new[n_ev] = p[t], 1.0
                    n_ev += 1
                e_net = e_net - float(p[t]) + 1.0
                e[j] = float(e[j]) - float(p[t]) + 1.0
                p[t] = 1.0
    for i in range(n):
        fl = math.floor(e[i])
        if fl > rem[i]:
            if record:
                ev_kind[n_ev], ev_var[n_ev], ev_rem[n_ev], ev_queued[n_ev] = EV_ENQUEUE, i, fl, rem[i] == 0
                n_ev += 1
            rem[i] = fl
        if rem[i] > 0:
            queue.append(i)
            in_q[i] = True
            enq[i] += 1

    while head < len(queue):
        i = queue[head]
        head += 1
        in_q[i] = False
        d_i = int(dom_size[i])
        k = int(rem[i])
        for a in range(int(nbr_ptr[i]), int(nbr_ptr[i + 1])):
            j = int(nbr_idx[a])
            base, dj = int(dom_ptr[j]), int(dom_size[j])
            row = p[base:base + dj]
            tmp = prob_vector(rev_cnt[rev_ptr[a]:rev_ptr[a] + dj], d_i, k)
            e_inc = float(e[j])
            for v in np.flatnonzero(tmp > row).tolist():
                old, new = float(row[v]), float(tmp[v])
                e_net = e_net - old + new
                e_inc = e_inc - old + new
                row[v] = new
                if record:
                    ev_kind[n_ev], ev_var[n_ev], ev_val[n_ev] = EV_UPDATE, j, v
                    ev_old[n_ev], ev_new[n_ev] = old, new
                    n_ev += 1
            s = 0.0
            for x in row.tolist():
                s += x
            if abs(s - e_inc) > DRIFT_TOL:
                return p, e, e_net, enq, n_ev, EXPECTATION_DRIFT
            e_net += s - e_inc
            e[j] = s
            fl = math.floor(s)
            if fl > rem[j]:
                rem[j] = fl
                queued = not in_q[j]
                if queued:
                    queue.append(j)
                    in_q[j] = True
                    enq[j] += 1
                if record:
                    ev_kind[n_ev], ev_var[n_ev], ev_rem[n_ev], ev_queued[n_ev] = EV_ENQUEUE, j, fl, queued
                    n_ev += 1
                if enq[j] > dom_size[j]:
                    return p, e, e_net, enq, n_ev, ENQUEUE_BOUND_EXCEEDED
    return p, e, e_net, enq, n_ev, OK


def get_loop(backend: str | None = None):
    backend = backend or DEFAULT_BACKEND
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is not installed")
        return prob_ac_loop_numba
    if backend == "numpy":
        return prob_ac_loop_numpy
    raise ValueError(f"unknown backend {backend!r}")
