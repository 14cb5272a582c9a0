from fractions import Fraction as Fr

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from polypl.equilibria import solve_equilibrium
from polypl.errors import LayerNotRDK, NonRationalKinetics, NotCycleTerminal
from polypl.generate import example1, example2, random_kinetics, random_network, random_rational
from polypl.indices import (
    is_py_tik,
    kinetic_deficiency_bounds_check,
    kinetic_order_subspaces,
    t_matrices,
)
from polypl.kinetics import CanonicalRep, PolyPLKinetics, canonicalize, classify
from polypl.network import Network, structural_report
from polypl.star_msc import transform


def test_example1_first_layer():
    net, K = example1()
    rep = canonicalize(K)
    kd = kinetic_order_subspaces(net, rep, classify(net, rep))
    label = {net.complex_label(c): F for c, F in kd.kinetic_complexes[0].items()}
    assert label == {"X": (2, 1), "2X + Y": (1, 2), "Y": (1, 1), "X + 2Y": (1, 1)}
    assert kd.layer_bases[0] == ((1, -1),)
    assert kd.layer_dims[0] == 1 and kd.layer_deficiencies[0] == 1
    assert kd.kinetic_deficiency == sum(kd.layer_deficiencies) == 4


def test_example1_reactant_deficiency():
    net, K = example1()
    rep = canonicalize(K)
    rdd = t_matrices(net, rep)
    assert rdd.layer_ranks[0] == 3 and rdd.layer_delta_hat[0] == 1
    assert rdd.delta_hat == sum(rdd.layer_delta_hat)
    assert not is_py_tik(rdd, classify(net, rep))["py_tik"]


def test_example1_bounds():
    net, K = example1()
    rep = canonicalize(K)
    kd = kinetic_order_subspaces(net, rep)
    out = kinetic_deficiency_bounds_check(transform(net, rep), kd)
    assert out["clauses"]["upper_bound"]["bound"] == 7
    assert out["clauses"]["h_ge_m"]["applies"]
    assert out["all_hold"]


def test_example2_layers_not_reactant_determined():
    net, K = example2()
    rep = canonicalize(K)
    with pytest.raises(LayerNotRDK):
        kinetic_order_subspaces(net, rep, classify(net, rep))
    with pytest.raises(LayerNotRDK):
        t_matrices(net, rep)


def test_not_cycle_terminal():
    net = Network.from_reactions(["A", "B"], [({"A": 1}, {"B": 1})])
    with pytest.raises(NotCycleTerminal):
        kinetic_order_subspaces(net, canonicalize(PolyPLKinetics.mass_action(net)))


def test_float_orders_refused():
    net = Network.from_reactions(["A", "B"], [({"A": 1}, {"B": 1}), ({"B": 1}, {"A": 1})])
    K = PolyPLKinetics.power_law((1, 1), [(0.5, 0), (0, 1)])
    with pytest.raises(NonRationalKinetics):
        kinetic_order_subspaces(net, canonicalize(K))


def test_mass_action_reversible_pair_is_tik():
    net = Network.from_reactions(["A", "B"], [({"A": 1}, {"B": 1}), ({"B": 1}, {"A": 1})])
    rep = canonicalize(PolyPLKinetics.mass_action(net))
    out = is_py_tik(t_matrices(net, rep), classify(net, rep))
    assert out["py_tik"] and out["layer_pl_tik"] == [True]


def test_repeated_column_forces_positive_reactant_deficiency():
    net = Network.from_reactions(["A", "B"], [({"A": 1}, {"B": 1}), ({"B": 1}, {"A": 1})])
    rep = canonicalize(PolyPLKinetics.power_law((1, 1), [(1, 1), (1, 1)]))
    rdd = t_matrices(net, rep)
    assert rdd.delta_hat > 0 and not is_py_tik(rdd, classify(net, rep))["py_tik"]


@given(st.integers(0, 2**32 - 1))
def test_mass_action_indices_reduce_to_classical(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng)
    rep = canonicalize(PolyPLKinetics.mass_action(net))
    kd = kinetic_order_subspaces(net, rep)
    assert kd.kinetic_deficiency == structural_report(net).deficiency
    rdd = t_matrices(net, rep)
    Y = sympy.Matrix([list(net.complexes[y]) for y in net.reactant_complexes]).T
    L = sympy.Matrix([[int(net.linkage_class_of[y] == k) for y in net.reactant_complexes]
                      for k in range(len(net.linkage_classes))])
    assert rdd.delta_hat == len(net.reactant_complexes) - Y.col_join(L).rank()


@given(st.integers(0, 2**32 - 1))
def test_sums_and_grand_matrix(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng)
    rep = canonicalize(random_kinetics(rng, net))
    kd = kinetic_order_subspaces(net, rep)
    rdd = t_matrices(net, rep)
    assert kd.s_tilde == sum(kd.layer_dims)
    G = sympy.Matrix(rdd.grand_matrix().tolist())
    assert rdd.delta_hat == rdd.h * rdd.n_r - G.rank()
    stacked = [v for b in kd.layer_bases for v in b]
    assert len(kd.sum_basis) == (sympy.Matrix(stacked).rank() if stacked else 0)
    for p in kd.perp_basis:
        for v in stacked:
            assert sum(a * b for a, b in zip(p, v)) == 0


@given(st.integers(0, 2**32 - 1), st.randoms())
def test_species_permutation_invariance(seed, rnd):
    # the canonical layer assignment is fixed first; relabelling species
    # afterwards must not move any index
    rng = np.random.default_rng(seed)
    net = random_network(rng)
    rep = canonicalize(random_kinetics(rng, net))
    perm = list(range(net.m))
    rnd.shuffle(perm)
    net2 = Network.from_reactions([net.species[p] for p in perm],
                                  [(tuple(net.complexes[y][p] for p in perm),
                                    tuple(net.complexes[yp][p] for p in perm))
                                   for y, yp in net.reactions])
    rep2 = CanonicalRep(rep.h, rep.rate_constants, tuple(
        tuple((a, tuple(F[p] for p in perm)) for a, F in layer) for layer in rep.layers))
    a = (kinetic_order_subspaces(net, rep), t_matrices(net, rep))
    b = (kinetic_order_subspaces(net2, rep2), t_matrices(net2, rep2))
    assert (a[0].kinetic_deficiency, a[0].s_tilde, a[1].delta_hat, a[1].q_hat) == \
        (b[0].kinetic_deficiency, b[0].s_tilde, b[1].delta_hat, b[1].q_hat)


def test_tik_weakly_reversible_power_law_systems_are_complex_balanced():
    rng = np.random.default_rng(2024)
    checked = 0
    while checked < 5:
        net = random_network(rng)
        K = random_kinetics(rng, net, h_max=1)
        rep = canonicalize(K)
        if not is_py_tik(t_matrices(net, rep), classify(net, rep))["py_tik"]:
            continue
        checked += 1
        for _ in range(10):
            k = [random_rational(rng) for _ in range(net.r)]
            recs = solve_equilibrium(net, K, k, mode="complex_balanced", starts=8,
                                     seed=int(rng.integers(1 << 30)))
            assert recs, f"no complex-balanced equilibrium for {net} with k={k}"


def test_tik_with_two_layers_can_lack_complex_balanced_equilibria():
    # X <-> 2X with rates x^2 + 1 and x: each layer is PL-TIK, yet
    # x^2 - x + 1 = 0 has no real root
    net = Network.from_reactions(["X"], [({"X": 1}, {"X": 2}), ({"X": 2}, {"X": 1})])
    K = PolyPLKinetics((1, 1), (((1, (2,)), (1, (0,))), ((1, (1,)),)))
    rep = canonicalize(K)
    assert is_py_tik(t_matrices(net, rep), classify(net, rep))["py_tik"]
    assert net.is_weakly_reversible
    assert solve_equilibrium(net, K, mode="complex_balanced", starts=32, seed=0) == []
    xs = np.linspace(0.01, 100, 10000)
    assert np.all(xs**2 + 1 - xs > 0)
