import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from probcsp import kernels
from probcsp.core import NetworkError, RemovalProfile, load_network
from probcsp.generator import random_instance
from probcsp.probability import bound_network, prob_value_constraint
from probcsp.propagation import prob_ac, propagation_trace, replay_trace, state_to_dict

from conftest import random_profile

BACKENDS = ["numpy"] + (["numba"] if kernels.HAVE_NUMBA else [])


def fixpoint_formula(net, state):
    """max over neighbours of the single-constraint probability at the final rem table."""
    out = []
    for j in range(net.n):
        row = np.zeros(net.domain_size(j))
        for i in net.neighbors[j]:
            for t in range(net.domain_size(j)):
                q = prob_value_constraint(net.counts.count(j, i, t), net.domain_size(i), int(state.rem[i]))
                row[t] = max(row[t], q)
        out.append(row)
    return out


@pytest.mark.parametrize("backend", BACKENDS)
def test_pair_hand_trace(pair, backend):
    net, prof = pair
    st_ = prob_ac(net, net.counts, prof, backend=backend)
    assert st_.rem.tolist() == [3, 3]
    assert all((row == 0.75).all() for row in st_.p)
    assert st_.e.tolist() == [3.0, 3.0] and st_.e_net == 6.0
    assert st_.enqueue_count.tolist() == [1, 1]


@pytest.mark.parametrize("backend", BACKENDS)
def test_pair_trace_shape(pair, backend):
    net, prof = pair
    log = propagation_trace(net, net.counts, prof, backend=backend)
    kinds = [(ev["ev"], ev["var"]) for ev in log]
    assert kinds == [("update", "y")] * 4 + [("enqueue", "y")] + [("update", "x")] * 4
    assert log[0] == {"ev": "update", "var": "y", "value": 1, "old": 0.0, "new": 0.75}
    assert log[4] == {"ev": "enqueue", "var": "y", "rem": 3, "queued": True}


def test_all_zero_run(pair):
    net, _ = pair
    prof = RemovalProfile.zeros(net)
    st_ = prob_ac(net, net.counts, prof)
    assert st_.e_net == 0.0 and not st_.rem.any() and not st_.enqueue_count.any()
    assert propagation_trace(net, net.counts, prof) == []


def test_isolated_variable_has_no_effect():
    net = load_network({"variables": [{"name": "z", "domain": [1, 2, 3]}]})
    st_ = prob_ac(net, net.counts, RemovalProfile((2,)))
    assert st_.rem.tolist() == [2] and st_.e_net == 0.0 and st_.enqueue_count.tolist() == [1]


def test_zero_support_values_start_certain():
    net = load_network({
        "variables": [{"name": "a", "domain": [1, 2]}, {"name": "b", "domain": [1, 2, 3]}],
        "constraints": [{"scope": ["a", "b"], "supports": [[1, 1], [1, 2], [1, 3]]}],
    })
    st_ = prob_ac(net, net.counts, RemovalProfile.zeros(net))
    # a=2 has no support at all, so a is queued with rem 1; each b value then
    # loses its single support a=1 with probability 1/2, e(b) = 1.5, rem(b) = 1
    assert st_.p[0].tolist() == [0.0, 1.0]
    assert st_.p[1].tolist() == [0.5, 0.5, 0.5]
    assert st_.rem.tolist() == [1, 1]


def test_bad_profile_rejected(pair):
    net, _ = pair
    with pytest.raises(NetworkError):
        prob_ac(net, net.counts, RemovalProfile((5, 0)))


def test_state_serialisation(pair):
    net, prof = pair
    doc = state_to_dict(net, prob_ac(net, net.counts, prof))
    assert doc["rem"] == {"x": 3, "y": 3}
    assert doc["enqueue_counts"] == {"x": 1, "y": 1}
    assert doc["network"] == {"e_lower": 6.0}
    assert doc["domains"][1] == {"var": "y", "e_lower": 3.0, "size": 4}


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_run_properties(seed):
    rng = np.random.default_rng(seed)
    net = random_instance(rng, 12, 7, 5)
    prof = random_profile(rng, net)
    st_ = prob_ac(net, net.counts, prof)
    assert (st_.enqueue_count <= net.counts.dom_size).all()
    assert (st_.rem >= np.array(prof.k)).all() and (st_.rem <= net.counts.dom_size).all()
    for j, row in enumerate(fixpoint_formula(net, st_)):
        assert np.array_equal(row, st_.p[j])
        assert st_.e[j] == pytest.approx(row.sum(), abs=1e-9)
    assert st_.e_net == pytest.approx(st_.e.sum(), abs=1e-9)

    log = propagation_trace(net, net.counts, prof)
    again = replay_trace(net, prof, log)
    assert np.array_equal(again.rem, st_.rem)
    assert np.array_equal(again.enqueue_count, st_.enqueue_count)
    for a, b in zip(again.p, st_.p):
        assert np.array_equal(a, b)
    assert again.e_net == pytest.approx(st_.e_net, abs=1e-9)

    # p entries only ever grow
    last = {}
    for ev in log:
        if ev["ev"] == "update":
            key = (ev["var"], ev["value"])
            assert ev["new"] > ev["old"] == last.get(key, 0.0)
            last[key] = ev["new"]

    # no rem raise at all: one pass, which is the max-bound of the initial profile
    if not any(ev["ev"] == "enqueue" for ev in log):
        assert st_.e_net == pytest.approx(bound_network(net, net.counts, prof), abs=1e-9)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_monotone_in_initial_profile(seed):
    rng = np.random.default_rng(seed)
    net = random_instance(rng, 10, 6, 4)
    low = random_profile(rng, net)
    high = RemovalProfile(tuple(
        int(rng.integers(k, net.domain_size(i) + 1)) for i, k in enumerate(low.k)
    ))
    a = prob_ac(net, net.counts, low)
    b = prob_ac(net, net.counts, high)
    assert (a.rem <= b.rem).all()
    assert (a.e <= b.e + 1e-12).all() and a.e_net <= b.e_net + 1e-9
    for pa, pb in zip(a.p, b.p):
        assert (pa <= pb).all()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_deterministic(seed):
    rng = np.random.default_rng(seed)
    net = random_instance(rng, 10, 6, 4)
    prof = random_profile(rng, net)
    assert propagation_trace(net, net.counts, prof) == propagation_trace(net, net.counts, prof)
