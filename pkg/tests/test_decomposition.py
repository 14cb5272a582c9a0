import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polypl.decomposition import (
    DecompositionSpec,
    block_numbers,
    check_incidence_independent,
    check_independent,
    equilibria_set_relations,
)
from polypl.equilibria import ccb_construct
from polypl.errors import InvalidPartition
from polypl.generate import example1, example2, random_kinetics, random_network
from polypl.kinetics import PolyPLKinetics, Term
from polypl.network import Network, structural_report


def disjoint_union(net_a, K_a, net_b, K_b):
    """Side-by-side copy of two systems on disjoint species; the split by
    origin is an independent C-decomposition."""
    ma, mb = net_a.m, net_b.m
    species = [f"A{i}" for i in range(ma)] + [f"B{i}" for i in range(mb)]
    pad_a = lambda v: tuple(v) + (0,) * mb  # noqa: E731
    pad_b = lambda v: (0,) * ma + tuple(v)  # noqa: E731
    reactions = [(pad_a(net_a.complexes[y]), pad_a(net_a.complexes[yp])) for y, yp in net_a.reactions]
    reactions += [(pad_b(net_b.complexes[y]), pad_b(net_b.complexes[yp])) for y, yp in net_b.reactions]
    net = Network.from_reactions(species, reactions)
    terms = [tuple(Term(t.coefficient, pad_a(t.orders)) for t in tl) for tl in K_a.terms]
    terms += [tuple(Term(t.coefficient, pad_b(t.orders)) for t in tl) for tl in K_b.terms]
    K = PolyPLKinetics(K_a.rate_constants + K_b.rate_constants, tuple(terms))
    spec = DecompositionSpec((tuple(range(net_a.r)), tuple(range(net_a.r, net.r))))
    return net, K, spec


def test_example1_linkage_classes():
    net, _ = example1()
    spec = DecompositionSpec.linkage_classes(net)
    ind = check_independent(net, spec)
    assert not ind.independent and ind.s == 1 and ind.block_ranks == (1, 1)
    inc = check_incidence_independent(net, spec)
    assert inc.incidence_independent and inc.c_decomposition
    assert inc.weakly_reversible_blocks == (True, True)


def test_example2_pairs_are_independent():
    net, _ = example2()
    ind = check_independent(net, DecompositionSpec(((0, 1), (2, 3))))
    assert ind.independent and ind.s == 2 and ind.block_ranks == (1, 1)


def test_single_block_is_trivially_independent():
    net, _ = example2()
    spec = DecompositionSpec.single_block(net)
    ind = check_independent(net, spec)
    assert ind.independent and ind.block_ranks == (ind.s,)


@pytest.mark.parametrize("blocks", [((0, 1), (1, 2, 3)), ((0, 1),), ((0, 1), (2, 9)), ((0, 1), (), (2, 3))])
def test_invalid_partitions(blocks):
    net, _ = example2()
    with pytest.raises(InvalidPartition):
        check_independent(net, DecompositionSpec(blocks))


def test_block_numbers():
    net, _ = example1()
    b = block_numbers(net, (0, 1))
    assert (b.n, b.l, b.s, b.deficiency, b.weakly_reversible) == (2, 1, 1, 0, True)


@given(st.integers(0, 2**32 - 1))
def test_linkage_classes_deficiency_bound(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng, weakly_reversible=bool(seed % 2))
    inc = check_incidence_independent(net, DecompositionSpec.linkage_classes(net))
    assert inc.incidence_independent
    assert inc.deficiency == structural_report(net).deficiency >= sum(inc.block_deficiencies)


@given(st.integers(0, 2**32 - 1), st.randoms())
def test_verdicts_ignore_block_order(seed, rnd):
    rng = np.random.default_rng(seed)
    net = random_network(rng)
    idx = list(range(net.r))
    rnd.shuffle(idx)
    cut = rnd.randint(1, net.r) if net.r > 1 else 1
    blocks = [tuple(idx[:cut]), tuple(idx[cut:])] if cut < net.r else [tuple(idx)]
    a = DecompositionSpec(tuple(blocks))
    b = DecompositionSpec(tuple(reversed(blocks)))
    ia, ib = check_independent(net, a), check_independent(net, b)
    assert ia.independent == ib.independent and ia.s == ib.s
    ca, cb = check_incidence_independent(net, a), check_incidence_independent(net, b)
    assert (ca.incidence_independent, ca.c_decomposition) == \
        (cb.incidence_independent, cb.c_decomposition)
    if ia.independent:
        assert ia.deficiency <= sum(ia.block_deficiencies)
    if ca.incidence_independent:
        assert ca.deficiency >= sum(ca.block_deficiencies)
    if ia.independent and ca.incidence_independent:
        assert ia.deficiency == sum(ia.block_deficiencies)


@given(st.integers(0, 2**32 - 1))
def test_disjoint_union_is_independent(seed):
    rng = np.random.default_rng(seed)
    na, nb = random_network(rng, m=2), random_network(rng, m=2)
    net, _, spec = disjoint_union(na, random_kinetics(rng, na), nb, random_kinetics(rng, nb))
    ind = check_independent(net, spec)
    inc = check_incidence_independent(net, spec)
    assert ind.independent and inc.c_decomposition
    assert ind.deficiency == sum(ind.block_deficiencies)


def test_example1_common_balanced_point_with_constructed_rates():
    net, K = example1()
    K = K.with_rates(ccb_construct(net, K, (1, 1)).k)
    rep = equilibria_set_relations(net, K, DecompositionSpec.linkage_classes(net), seed=3)
    assert rep.ok, rep.failures
    d = rep.checks["d_c_decomposition_converse"]
    assert d["blocks_nonempty"] == [True, True]
    assert d["witness"] is not None and d["residual"] < 1e-9


def test_example2_pairs_equilibria_relations():
    net, K = example2()
    rng = np.random.default_rng(11)
    spec = DecompositionSpec(((0, 1), (2, 3)))
    for _ in range(5):
        k = tuple(int(v) for v in rng.integers(1, 6, 4))
        rep = equilibria_set_relations(net, K.with_rates(k), spec, seed=int(rng.integers(99)))
        assert rep.ok, rep.failures
        b = rep.checks["b_whole_equilibria_balance_blocks"]
        assert b["points"] >= 1 and b["max_residual"] <= 1e-9
