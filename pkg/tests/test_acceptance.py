"""Acceptance criteria, one test per criterion, at the stated tolerances.

The terminal summary prints one PASS/FAIL line per criterion.
"""

import json
import time
from fractions import Fraction as Fr
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import ortho_group

from polypl import io
from polypl.decomposition import (
    DecompositionSpec,
    check_incidence_independent,
    check_independent,
    equilibria_set_relations,
)
from polypl.equilibria import (
    ccb_construct,
    complex_formation_rate,
    monostationarity_sign_check,
    parametrization_check,
    solve_equilibrium,
)
from polypl.generate import (
    acr_instance,
    example1,
    example2,
    pl_balanced_system,
    random_kinetics,
    random_network,
    sign_failure_instance,
)
from polypl.indices import kinetic_order_subspaces
from polypl.kinetics import PolyPLKinetics, canonicalize
from polypl.network import orthonormal_basis, structural_report
from polypl.report import Analysis, Settings, exit_status, run
from polypl.robustness import acr_audit, bcr_audit
from polypl.stability import (
    finite_difference_jacobian,
    jacobian,
    restrict_and_classify,
    uniqueness_from_stability,
)
from polypl.star_msc import dynamic_equivalence_residual, replica_decomposition, transform

from test_decomposition import disjoint_union

DATA = Path(io.__file__).parent / "data"


def rational_point(rng, m):
    return tuple(Fr(int(rng.integers(1, 9)), int(rng.integers(1, 9))) for _ in range(m))


def balanced_instances(seed, count, *, with_sign=False):
    """PL-complex-balanced systems: constructed layer weights plus CCB rates."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        net, K, x_star = pl_balanced_system(rng, h=int(rng.integers(1, 4)))
        K = K.with_rates(ccb_construct(net, K, x_star).k)
        kd = kinetic_order_subspaces(net, canonicalize(K))
        if with_sign and not monostationarity_sign_check(net, kd).holds:
            continue
        out.append((net, K, [float(v) for v in x_star], kd))
    return out


@pytest.mark.criterion(1, "structural reproduction of both examples")
def test_criterion_1_structure():
    t0 = time.perf_counter()
    for (net, _), expected in ((example1(), (2, 4, 2, 1, 1, 4)), (example2(), (4, 3, 1, 2, 0, 3))):
        sr = structural_report(net)
        assert (sr.m, sr.n, sr.linkage_classes, sr.s, sr.deficiency, sr.n_reactant) == expected
        assert sr.weakly_reversible
    assert time.perf_counter() - t0 < 1.0


@pytest.mark.criterion(2, "canonical representation golden forms")
def test_criterion_2_canonical_forms():
    rep = canonicalize(example1()[1])
    assert rep.h == 4
    assert rep.reaction_terms(2) == [(1, (1, 1))] + [(Fr(1, 3), (1, 0))] * 3
    rep = canonicalize(example2()[1])
    assert rep.h == 3
    assert rep.reaction_terms(2) == [(Fr(1, 3), (0, 1, 0, 0))] * 3


@pytest.mark.criterion(3, "STAR-MSC preserves S, dynamics and replica structure")
def test_criterion_3_star_msc():
    rng = np.random.default_rng(3)
    systems = [example1(), example2()]
    while len(systems) < 22:
        net = random_network(rng, weakly_reversible=bool(rng.integers(2)))
        systems.append((net, random_kinetics(rng, net, reactant_determined=False)))
    worst = 0.0
    for net, K in systems:
        rep = canonicalize(K)
        assert rep.h <= 4 and net.m <= 4 and net.n <= 6
        t = transform(net, rep)
        assert sorted(t.network.stoichiometric_basis) == sorted(net.stoichiometric_basis)
        for _ in range(100):
            x = np.exp(rng.uniform(-2, 2, net.m))
            worst = max(worst, dynamic_equivalence_residual(net, K, t, x))
        assert replica_decomposition(t)["c_decomposition"]
    assert worst <= 1e-12, worst


@pytest.mark.criterion(4, "constructed rates balance the chosen point")
def test_criterion_4_ccb():
    rng = np.random.default_rng(4)
    net, K = example1()
    k = ccb_construct(net, K, (1, 1)).k
    assert k == tuple(k[0] * 4 * v for v in (Fr(1, 4), Fr(1, 4), Fr(1, 2), Fr(1, 2)))
    systems = [example1(), example2()]
    while len(systems) < 22:
        net = random_network(rng)
        systems.append((net, random_kinetics(rng, net)))
    for net, K in systems:
        x = rational_point(rng, net.m)
        k = ccb_construct(net, K, x).k
        assert all(v == 0 for v in complex_formation_rate(net, K.with_rates(k), x))
        xf = np.exp(rng.uniform(-1, 1, net.m))
        kf = ccb_construct(net, K, xf).k
        g = complex_formation_rate(net, K.with_rates(kf), xf)
        assert np.max(np.abs(g)) <= 1e-12


@pytest.mark.criterion(5, "log-parametrization of layer-balanced points")
def test_criterion_5_parametrization():
    off = []
    for i, (net, K, x_star, kd) in enumerate(balanced_instances(5, 10)):
        report = parametrization_check(net, canonicalize(K), kd, x_star, 20, seed=i)
        assert report.on_manifold_max <= 1e-8, report.on_manifold_max
        if report.off_manifold_min is not None:
            off.append(report.off_manifold_min)
    print(f"off-manifold residual minima: {['%.2e' % v for v in off]}")


@pytest.mark.criterion(6, "decomposition deficiency relations and equilibria intersection")
def test_criterion_6_decompositions():
    rng = np.random.default_rng(6)
    for _ in range(20):
        net = random_network(rng, weakly_reversible=bool(rng.integers(2)))
        inc = check_incidence_independent(net, DecompositionSpec.linkage_classes(net))
        assert inc.deficiency >= sum(inc.block_deficiencies)
    for i in range(10):
        parts = []
        for _ in range(2):
            net = random_network(rng, m=2)
            K = random_kinetics(rng, net)
            K = K.with_rates(ccb_construct(net, K, rational_point(rng, net.m)).k)
            parts.append((net, K))
        net, K, spec = disjoint_union(*parts[0], *parts[1])
        ind = check_independent(net, spec)
        assert ind.independent and ind.deficiency <= sum(ind.block_deficiencies)
        rep = equilibria_set_relations(net, K, spec, seed=i)
        b = rep.checks["b_whole_equilibria_balance_blocks"]
        assert b["points"] >= 1 and b["max_residual"] <= 1e-9
        assert not rep.failures, rep.failures


@pytest.mark.criterion(7, "sign criterion agrees with multi-start solving")
def test_criterion_7_sign_criterion():
    for i, (net, K, x_star, _) in enumerate(balanced_instances(7, 10, with_sign=True)):
        recs = solve_equilibrium(net, K, mode="PL_complex_balanced", starts=32, seed=i,
                                 within_class_of=x_star)
        pts = [np.array(r.c) for r in recs if r.kind == "PL_complex_balanced"]
        assert pts
        for a in pts:
            for b in pts:
                assert np.linalg.norm(a - b) <= 1e-6 * max(1.0, np.linalg.norm(a))
    net, K = sign_failure_instance()
    verdict = monostationarity_sign_check(net, kinetic_order_subspaces(net, canonicalize(K)))
    assert not verdict.holds and verdict.witness == (1, -1)


@pytest.mark.criterion(8, "analytic Jacobian and basis-independent restricted spectrum")
def test_criterion_8_jacobian():
    rng = np.random.default_rng(8)
    for t in range(100):
        net = random_network(rng, weakly_reversible=bool(t % 2))
        K = random_kinetics(rng, net, reactant_determined=False)
        c = np.exp(rng.uniform(-1, 1, net.m))
        J = jacobian(net, K, c)
        Jfd = finite_difference_jacobian(net, K, c)
        assert np.max(np.abs(J - Jfd)) <= 1e-5 * max(1.0, np.max(np.abs(J)))
        B = orthonormal_basis(net.stoichiometric_basis, net.m)
        s = B.shape[1]
        Q = ortho_group.rvs(s, random_state=t) if s > 1 else np.array([[-1.0]])
        ea = np.sort_complex(np.array(restrict_and_classify(J, None, basis=B).eigenvalues))
        eb = np.sort_complex(np.array(restrict_and_classify(J, None, basis=B @ Q).eigenvalues))
        assert np.max(np.abs(ea - eb)) <= 1e-9 * max(1.0, np.linalg.norm(J))


@pytest.mark.criterion(9, "linearly stable balanced points are unique in their class")
def test_criterion_9_stability_uniqueness():
    rng = np.random.default_rng(9)
    instances = [(net, K, x_star) for net, K, x_star, _ in balanced_instances(9, 12)]
    while len(instances) < 20:
        net = random_network(rng)
        if structural_report(net).deficiency:
            continue
        K = PolyPLKinetics.mass_action(net, [int(v) for v in rng.integers(1, 6, net.r)])
        instances.append((net, K, list(np.exp(rng.uniform(-1, 1, net.m)))))
    stable = 0
    for i, (net, K, x_star) in enumerate(instances):
        recs = solve_equilibrium(net, K, mode="PL_complex_balanced", starts=8, seed=i,
                                 within_class_of=x_star)
        for rec in recs:
            verdict = restrict_and_classify(jacobian(net, K, rec.c), net.stoichiometric_basis)
            report = uniqueness_from_stability(net, K, verdict, rec.c, seed=i)
            assert report.status != "failed", report.notes
            stable += report.status == "passed"
        doc = io.ModelDocument(
            species=list(net.species),
            reactions=[io.ReactionEntry(
                dict(zip(net.species, net.complexes[y])), dict(zip(net.species, net.complexes[yp])),
                K.rate_constants[q],
                [(t.coefficient, dict(zip(net.species, t.orders))) for t in K.terms[q]])
                for q, (y, yp) in enumerate(net.reactions)])
        assert exit_status(run("stability", doc, Settings(seed=i, starts=8))) != 3
    assert stable >= 3, f"only {stable} linearly stable instances exercised"


@pytest.mark.criterion(10, "ACR and BCR audits on constructed instances")
def test_criterion_10_robustness():
    net, K = acr_instance(1, 2)
    rng = np.random.default_rng(10)
    pts = []
    for total in np.linspace(2.5, 12.0, 32):
        b = float(rng.uniform(0.2, 0.8)) * total
        pts += solve_equilibrium(net, K, starts=4, seed=int(rng.integers(1 << 30)),
                                 within_class_of=(total - b, b))
    pts = [r for r in pts if r.kind != "none"]
    assert len(pts) >= 30
    report = acr_audit(net, K, equilibria=pts)
    assert "A" in report.acr_species and not report.failures
    assert report.acr_species["A"]["empirical_spread"] <= 1e-6
    assert report.acr_species["A"]["equilibria_sampled"] >= 30
    report = bcr_audit(net, K, report=report, seed=10)
    assert list(report.bcr_species) == ["A"] and not report.failures
    assert report.m_acr <= report.m_bcr <= report.s


@pytest.mark.criterion(11, "reports carry the documented discrepancy flags")
def test_criterion_11_discrepancy_flags():
    rep = run("all", io.parse(DATA / "example1.json"), Settings(seed=0, starts=8))
    mismatch = [c for c in rep["caveats"]
                if c["code"] == "claim_mismatch" and c["claim"] == "kinetic_deficiency"]
    assert mismatch and mismatch[0]["claimed"] == 0 and mismatch[0]["computed"] == 4
    assert mismatch[0]["layer_values"] == [1, 1, 1, 1]
    assert rep["indices"]["kinetic_order"]["layer_kinetic_deficiencies"] == [1, 1, 1, 1]
    rep = run("all", io.parse(DATA / "example2.json"), Settings(seed=0, starts=8))
    assert rep["canonical"]["classification"]["overall"] == "PY-NDK"
    assert any(c["code"] == "kinetics.py_ndk" for c in rep["caveats"])
    json.dumps(rep)
