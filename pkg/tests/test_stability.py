import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import ortho_group

from polypl.equilibria import ccb_construct, solve_equilibrium
from polypl.errors import ImageNotInS, NonPositiveConcentration
from polypl.generate import example1, example2, random_kinetics, random_network
from polypl.kinetics import PolyPLKinetics, Term
from polypl.network import Network, orthonormal_basis, structural_report
from polypl.stability import (
    d_stability_falsifier,
    finite_difference_jacobian,
    jacobian,
    restrict_and_classify,
    uniqueness_from_stability,
)


def one_way():
    return Network.from_reactions(["A", "B"], [({"A": 1}, {"B": 1})])


def test_linear_jacobian():
    net = one_way()
    J = jacobian(net, PolyPLKinetics.mass_action(net), (3.0, 5.0))
    assert np.allclose(J, [[-1, 0], [1, 0]], rtol=0, atol=1e-14)
    v = restrict_and_classify(J, net.stoichiometric_basis)
    assert v.classification == "linearly_stable"
    assert np.allclose(v.restricted, [[-1]])


def test_power_rule():
    net = Network.from_reactions(["X"], [({"X": 1}, {"X": 2})])
    K = PolyPLKinetics((1,), (((1, (2,)),),))
    assert np.isclose(jacobian(net, K, (3.0,))[0, 0], 6.0)


def test_zero_jacobian_is_marginal():
    assert restrict_and_classify(np.zeros((2, 2)), [(1, -1)]).classification == "marginal"


def test_image_outside_subspace():
    with pytest.raises(ImageNotInS):
        restrict_and_classify(np.eye(2), [(1, -1)])


def test_positive_point_required():
    net = one_way()
    with pytest.raises(NonPositiveConcentration):
        jacobian(net, PolyPLKinetics.mass_action(net), (0.0, 1.0))


def test_example1_at_constructed_point():
    net, K = example1()
    K = K.with_rates(ccb_construct(net, K, (1, 1)).k)
    J = jacobian(net, K, (1.0, 1.0))
    assert np.allclose(J, finite_difference_jacobian(net, K, (1.0, 1.0)), rtol=1e-5, atol=1e-9)
    v = restrict_and_classify(J, net.stoichiometric_basis)
    # S = span(1, 1) contains the whole diagonal of balanced points, so the
    # restricted eigenvalue vanishes
    assert v.classification == "marginal"
    assert uniqueness_from_stability(net, K, v, (1.0, 1.0)).status == "skipped"


@given(st.integers(0, 2**32 - 1))
def test_jacobian_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng, weakly_reversible=bool(seed % 2))
    K = random_kinetics(rng, net, reactant_determined=False)
    c = np.exp(rng.uniform(-1, 1, net.m))
    J = jacobian(net, K, c)
    Jfd = finite_difference_jacobian(net, K, c)
    assert np.max(np.abs(J - Jfd)) <= 1e-5 * max(1.0, np.max(np.abs(J)))


@given(st.integers(0, 2**32 - 1))
def test_restricted_spectrum_ignores_basis(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng)
    K = random_kinetics(rng, net)
    c = np.exp(rng.uniform(-1, 1, net.m))
    J = jacobian(net, K, c)
    B = orthonormal_basis(net.stoichiometric_basis, net.m)
    s = B.shape[1]
    Q = ortho_group.rvs(s, random_state=seed) if s > 1 else np.array([[-1.0]])
    a = restrict_and_classify(J, net.stoichiometric_basis)
    b = restrict_and_classify(J, None, basis=B @ Q)
    ea = np.sort_complex(np.array(a.eigenvalues))
    eb = np.sort_complex(np.array(b.eigenvalues))
    assert np.max(np.abs(ea - eb)) <= 1e-9 * max(1.0, np.linalg.norm(J))


def test_reversible_pair_uniqueness():
    net = Network.from_reactions(["A", "B"], [({"A": 1}, {"B": 1}), ({"B": 1}, {"A": 1})])
    K = PolyPLKinetics.mass_action(net)
    v = restrict_and_classify(jacobian(net, K, (1.0, 1.0)), net.stoichiometric_basis)
    assert v.classification == "linearly_stable"
    rep = uniqueness_from_stability(net, K, v, (1.0, 1.0))
    assert rep.status == "passed" and rep.max_distance <= 1e-6


def test_uniqueness_skipped_for_unbalanced_point():
    net = one_way()
    K = PolyPLKinetics.mass_action(net)
    v = restrict_and_classify(jacobian(net, K, (1.0, 1.0)), net.stoichiometric_basis)
    rep = uniqueness_from_stability(net, K, v, (1.0, 1.0))
    assert rep.status == "skipped" and rep.notes


def test_falsifier_examples():
    I2 = [(1, 0), (0, 1)]
    assert d_stability_falsifier(-np.eye(2), I2).counterexample is None
    rot = d_stability_falsifier([[0, 1], [-1, 0]], I2, trials=50)
    assert rot.counterexample is None and rot.trials == 50
    hit = d_stability_falsifier([[1, 0], [0, -2]], I2)
    assert hit.counterexample is not None and hit.trials == 1
    assert np.array_equal(hit.counterexample, [1.0, 1.0])


def test_mass_action_balanced_systems_never_unstable():
    rng = np.random.default_rng(5)
    seen = 0
    while seen < 15:
        net = random_network(rng)
        if structural_report(net).deficiency != 0:
            continue
        seen += 1
        K = PolyPLKinetics.mass_action(net, [int(v) for v in rng.integers(1, 6, net.r)])
        for rec in solve_equilibrium(net, K, mode="complex_balanced", starts=4, seed=seen):
            v = restrict_and_classify(jacobian(net, K, rec.c), net.stoichiometric_basis)
            assert v.classification in ("linearly_stable", "marginal")


def test_example2_stability_is_computable():
    net, K = example2()
    K = K.with_rates(ccb_construct(net, K, (1, 1, 1, 1)).k)
    J = jacobian(net, K, (1.0,) * 4)
    v = restrict_and_classify(J, net.stoichiometric_basis)
    assert len(v.eigenvalues) == 2
    assert v.classification in ("linearly_stable", "marginal", "unstable")
