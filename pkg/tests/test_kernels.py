import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from probcsp import kernels
from probcsp.generator import random_instance
from probcsp.propagation import prob_ac, propagation_trace

from conftest import random_profile

needs_numba = pytest.mark.skipif(not kernels.HAVE_NUMBA, reason="numba not installed")


@settings(max_examples=200)
@given(st.data())
def test_vector_matches_scalar(data):
    d = data.draw(st.integers(1, 25))
    k = data.draw(st.integers(0, d))
    counts = data.draw(st.lists(st.integers(0, d), min_size=1, max_size=12))
    vec = kernels.prob_vector(np.array(counts), d, k)
    assert vec.tolist() == [kernels.prob_scalar(c, d, k) for c in counts]


@needs_numba
@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_backends_bit_identical(seed):
    rng = np.random.default_rng(seed)
    net = random_instance(rng, 15, 8, 6)
    prof = random_profile(rng, net)
    a = prob_ac(net, net.counts, prof, backend="numba")
    b = prob_ac(net, net.counts, prof, backend="numpy")
    assert np.array_equal(a.rem, b.rem) and np.array_equal(a.enqueue_count, b.enqueue_count)
    assert np.array_equal(a.e, b.e) and a.e_net == b.e_net
    assert all(np.array_equal(x, y) for x, y in zip(a.p, b.p))
    assert propagation_trace(net, net.counts, prof, backend="numba") == \
        propagation_trace(net, net.counts, prof, backend="numpy")


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_loop("fortran")


def test_env_flag_selects_numpy():
    env = dict(os.environ, PROBCSP_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "from probcsp import kernels; print(kernels.DEFAULT_BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"
