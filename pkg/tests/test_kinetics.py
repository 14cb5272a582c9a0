from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polypl.errors import KineticsError, NonPositiveConcentration
from polypl.generate import example1, example2, random_kinetics, random_network
from polypl.kinetics import PolyPLKinetics, canonicalize, classify, evaluate
from polypl.network import Network


def test_example1_rates_at_ones():
    _, K = example1()
    K = K.with_rates((2, 3, 5, 7))
    assert evaluate(K, (1, 1)) == (8, 12, 10, 14)


def test_example2_first_rate_at_ones():
    _, K = example2(k3=Fr(5, 2))
    assert evaluate(K, (1, 1, 1, 1))[0] == 2 + Fr(5, 2)


def test_constant_kinetics():
    K = PolyPLKinetics.power_law((1,), [(0, 0)])
    assert evaluate(K, (3, 7)) == (1,)


def test_nonpositive_point_rejected():
    _, K = example1()
    with pytest.raises(NonPositiveConcentration):
        evaluate(K, (1, 0))


def test_invalid_kinetics():
    with pytest.raises(KineticsError):
        PolyPLKinetics((0,), (((1, (1,)),),))
    with pytest.raises(KineticsError):
        PolyPLKinetics((1,), (((1, (1,)), (2, (1,))),))
    with pytest.raises(KineticsError):
        PolyPLKinetics((1,), (((-1, (1,)),),))


def test_example1_padding_of_third_reaction():
    _, K = example1()
    rep = canonicalize(K)
    assert rep.h == 4
    assert rep.reaction_terms(2) == [(1, (1, 1))] + [(Fr(1, 3), (1, 0))] * 3
    assert rep.reaction_terms(3) == [(1, (1, 1))] + [(Fr(1, 3), (0, 1))] * 3


def test_single_term_padded_into_three_copies():
    _, K = example2()
    rep = canonicalize(K)
    assert rep.h == 3
    assert rep.reaction_terms(2) == [(Fr(1, 3), (0, 1, 0, 0))] * 3


def test_full_length_reactions_unchanged_up_to_order():
    _, K = example1()
    rep = canonicalize(K)
    assert sorted(rep.reaction_terms(0)) == sorted((t.coefficient, t.orders) for t in K.terms[0])


def test_ascending_order_pads_the_other_term():
    _, K = example1()
    rep = canonicalize(K, "ascending")
    assert rep.reaction_terms(2) == [(1, (1, 0))] + [(Fr(1, 3), (1, 1))] * 3


def test_example1_is_reactant_determined():
    net, K = example1()
    cls = classify(net, canonicalize(K))
    assert cls.is_py_rdk and cls.branching_nodes == ()


def test_example2_is_not_reactant_determined():
    net, K = example2()
    cls = classify(net, canonicalize(K))
    assert cls.overall == "PY-NDK"
    s4 = net.complexes.index((0, 0, 0, 1))
    assert cls.branching_nodes == (s4,)
    assert not cls.layer_rdk[0]


def test_mass_action_single_reaction():
    net = Network.from_reactions(["A", "B"], [({"A": 1}, {"B": 1})])
    cls = classify(net, canonicalize(PolyPLKinetics.mass_action(net)))
    assert cls.is_py_rdk and cls.is_mass_action


def test_flatten_recovers_kinetics():
    _, K = example1()
    flat = canonicalize(K).flatten()
    assert flat.rate_constants == K.rate_constants
    assert [set(t) for t in flat.terms] == [set(t) for t in K.terms]


@given(st.integers(0, 2**32 - 1))
def test_layers_sum_to_rates(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng, weakly_reversible=False)
    K = random_kinetics(rng, net, reactant_determined=bool(seed % 2))
    rep = canonicalize(K)
    x = tuple(Fr(int(rng.integers(1, 6)), int(rng.integers(1, 6))) for _ in range(net.m))
    exact = evaluate(K, x)
    for i in range(net.r):
        total = sum((rep.rate_constants[i] * a * np.prod([Fr(v) ** int(f) for v, f in zip(x, F)])
                     for a, F in rep.reaction_terms(i)), Fr(0))
        assert total == exact[i]
    xf = np.exp(rng.uniform(-1, 1, net.m))
    ref = np.array([float(K.rate_constants[i]) * sum(float(t.coefficient) * np.prod(xf ** np.array(
        [float(f) for f in t.orders])) for t in K.terms[i]) for i in range(net.r)])
    assert np.allclose(rep.layer_rates(xf).sum(axis=0), ref, rtol=1e-12, atol=0)


@given(st.integers(0, 2**32 - 1))
def test_reactant_determined_generator_classifies(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng)
    K = random_kinetics(rng, net)
    assert classify(net, canonicalize(K)).is_py_rdk
