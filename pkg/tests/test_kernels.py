import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from polypl import _kernels, _kernels_py
from polypl.generate import random_kinetics, random_network


def _case(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng)
    K = random_kinetics(rng, net)
    return K.kernel, rng.uniform(-2, 2, net.m)


def test_compiled_backend_is_available():
    assert "compiled" in _kernels.available_backends()


@given(st.integers(0, 2**32 - 1))
def test_backends_agree(seed):
    kern, u = _case(seed)
    args = (kern.coef, kern.exps, kern.owner, kern.nrows, u)
    ref_r, ref_d = _kernels_py.rates_and_dlog(*args)
    for name, mod in _kernels.available_backends().items():
        r = mod.rates(*args)
        r2, d = mod.rates_and_dlog(*args)
        assert np.allclose(r, ref_r, rtol=1e-13, atol=0), name
        assert np.allclose(r2, ref_r, rtol=1e-13, atol=0), name
        assert np.allclose(d, ref_d, rtol=1e-12, atol=1e-300), name


def test_derivative_matches_finite_difference():
    kern, u = _case(7)
    _, d = _kernels_py.rates_and_dlog(kern.coef, kern.exps, kern.owner, kern.nrows, u)
    h = 1e-6
    for s in range(len(u)):
        e = np.zeros_like(u)
        e[s] = h
        fd = (_kernels_py.rates(kern.coef, kern.exps, kern.owner, kern.nrows, u + e)
              - _kernels_py.rates(kern.coef, kern.exps, kern.owner, kern.nrows, u - e)) / (2 * h)
        assert np.allclose(d[:, s], fd, rtol=1e-6, atol=1e-9)
