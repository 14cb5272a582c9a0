import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polypl import linalg
from polypl.decomposition import check_incidence_independent, subnetwork
from polypl.equilibria import species_formation_rate
from polypl.errors import NonIntegerStoichiometry
from polypl.generate import example1, example2, random_kinetics, random_network
from polypl.kinetics import PolyPLKinetics, canonicalize
from polypl.network import Network
from polypl.star_msc import dynamic_equivalence_residual, replica_decomposition, transform


def test_example1_translation():
    net, K = example1()
    t = transform(net, canonicalize(K))
    assert t.translation == 3 and t.h == 4
    assert t.network.n == 16 and t.network.r == 16
    assert (4, 3) in t.network.complexes
    assert len(t.kinetics.terms) == 16 and all(len(tl) == 1 for tl in t.kinetics.terms)


def test_single_layer_is_identity():
    net = Network.from_reactions(["A", "B"], [({"A": 1}, {"B": 1}), ({"B": 1}, {"A": 1})])
    K = PolyPLKinetics.mass_action(net, (2, 3))
    t = transform(net, canonicalize(K))
    assert t.network == net
    assert replica_decomposition(t)["blocks"] == [[0, 1]]


def test_example_replica_decompositions():
    net, K = example1()
    rd = replica_decomposition(transform(net, canonicalize(K)))
    assert len(rd["blocks"]) == 4 and all(len(b) == 4 for b in rd["blocks"])
    assert rd["c_decomposition"] and rd["incidence_independent"]
    net, K = example2()
    rd = replica_decomposition(transform(net, canonicalize(K)))
    assert len(rd["blocks"]) == 3 and all(rd["weakly_reversible_blocks"])


def test_exact_dynamic_equivalence_example2():
    net, K = example2()
    t = transform(net, canonicalize(K))
    x = (1, 2, 3, 5)
    assert species_formation_rate(net, K, x) == species_formation_rate(t.network, t.kinetics, x)


@given(st.integers(0, 2**32 - 1))
def test_transform_invariants(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng, weakly_reversible=bool(seed % 2))
    K = random_kinetics(rng, net, reactant_determined=False)
    rep = canonicalize(K)
    t = transform(net, rep)
    assert t.network.n == rep.h * net.n and t.network.r == rep.h * net.r
    S, Ss = net.stoichiometric_basis, t.network.stoichiometric_basis
    assert len(S) == len(Ss) == linalg.rank(list(S) + list(Ss))
    for _ in range(5):
        x = np.exp(rng.uniform(-2, 2, net.m))
        assert dynamic_equivalence_residual(net, K, t, x) <= 1e-12
    rd = replica_decomposition(t)
    assert rd["c_decomposition"]
    g0 = nx.DiGraph(list(net.reactions))
    for block in rd["blocks"]:
        sub = subnetwork(t.network, block)
        assert nx.is_isomorphic(g0, nx.DiGraph(list(sub.reactions)))
        assert sub.is_weakly_reversible == net.is_weakly_reversible


def test_non_integer_stoichiometry_refused():
    net, K = example1()
    bad = Network(net.species, tuple(tuple(float(c) + 0.5 for c in y) for y in net.complexes),
                  net.reactions)
    with pytest.raises(NonIntegerStoichiometry):
        transform(bad, canonicalize(K))
