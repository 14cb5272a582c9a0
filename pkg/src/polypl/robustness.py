"""SF-pairs and concentration-robustness audits (ACR and BCR) for poly-PL systems."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg
from .decomposition import DecompositionSpec, check_independent, subnetwork
from .equilibria import TOL_RESIDUAL, solve_equilibrium
from .errors import InvariantViolation, PreconditionUnmet
from .indices import KineticOrderData, kinetic_order_subspaces
from .kinetics import CanonicalRep, PolyPLKinetics, canonicalize, classify
from .network import Network, structural_report

TOL_SPREAD = 1e-6


@dataclass(frozen=True)
class SFPair:
    reactions: tuple[int, int]
    species: int
    species_name: str
    layers: tuple[int, ...]
    linked: bool
    nonterminal: bool

    def as_dict(self) -> dict:
        return {"reactions": list(self.reactions), "species": self.species_name,
                "layers": list(self.layers), "linked": self.linked,
                "nonterminal": self.nonterminal}


def _differing(F1, F2) -> list[int]:
    return [s for s, (a, b) in enumerate(zip(F1, F2)) if a != b]


def find_sf_pairs(net: Network, rep: CanonicalRep, *, loose: bool = False) -> list[SFPair]:
    """Reaction pairs whose rows in some layer differ in exactly one species.

    With ``loose`` a pair qualifies for every species in which its rows
    differ, whatever happens in the other coordinates.
    """
    nonterminal = set(structural_report(net).nonterminal_complexes)
    lc = net.linkage_class_of
    out = []
    for i in range(net.r):
        for i2 in range(i + 1, net.r):
            hits: dict[int, list[int]] = {}
            for j in range(rep.h):
                diff = _differing(rep.layers[j][i][1], rep.layers[j][i2][1])
                if len(diff) == 1 or (loose and diff):
                    for s in diff:
                        hits.setdefault(s, []).append(j)
            y, y2 = net.reactions[i][0], net.reactions[i2][0]
            for s in sorted(hits):
                out.append(SFPair((i, i2), s, net.species[s], tuple(hits[s]),
                                  lc[y] == lc[y2], y in nonterminal and y2 in nonterminal))
    return out


def _block_kinetics(K: PolyPLKinetics, block: Sequence[int]) -> PolyPLKinetics:
    return PolyPLKinetics(tuple(K.rate_constants[j] for j in block),
                          tuple(K.terms[j] for j in block))


def _layer_equilibrated(net: Network, rep: CanonicalRep, x, tol: float) -> bool:
    from .equilibria import float_matrices

    N = float_matrices(net)[2]
    layers = rep.layer_rates(x)
    scale = 1.0 + float(np.max(np.abs(layers.sum(axis=0))))
    return all(float(np.max(np.abs(N @ layers[j]), initial=0.0)) <= 10 * tol * scale
               for j in range(rep.h))


def spread(values: Sequence[float]) -> float:
    """Relative spread ``(max - min) / max|v|`` of a sample."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return 0.0
    return float((v.max() - v.min()) / max(float(np.max(np.abs(v))), 1e-300))


def sample_equilibria(net: Network, K: PolyPLKinetics, mode: str, *, starts: int = 16,
                      classes: int = 3, seed: int = 0,
                      tol: float = TOL_RESIDUAL) -> list[np.ndarray]:
    """Free multi-start plus starts restricted to ``classes`` random classes."""
    rng = np.random.default_rng(seed)
    recs = list(solve_equilibrium(net, K, mode=mode, starts=starts, rng=rng, tol_residual=tol))
    for _ in range(classes):
        c0 = np.exp(rng.uniform(-1.0, 1.0, net.m))
        recs += solve_equilibrium(net, K, mode=mode, starts=max(4, starts // 4), rng=rng,
                                  tol_residual=tol, within_class_of=c0)
    return [np.array(r.c) for r in recs]


@dataclass
class RobustnessReport:
    s: int
    sf_pairs: list = field(default_factory=list)
    loose_only_pairs: list = field(default_factory=list)
    acr_species: dict = field(default_factory=dict)
    bcr_species: dict = field(default_factory=dict)
    acr_ran: bool = False
    bcr_ran: bool = False
    p_z_dim: int | None = None
    caveats: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def m_acr(self) -> int:
        return len(self.acr_species)

    @property
    def m_bcr(self) -> int:
        return len(self.bcr_species)

    def as_dict(self) -> dict:
        return {"sf_pairs": [p.as_dict() for p in self.sf_pairs],
                "loose_reading_extra_pairs": [p.as_dict() for p in self.loose_only_pairs],
                "acr_species": self.acr_species, "bcr_species": self.bcr_species,
                "m_ACR": self.m_acr if self.acr_ran else None,
                "m_BCR": self.m_bcr if self.bcr_ran else None, "s": self.s,
                "P_Z_dim": self.p_z_dim,
                "caveats": list(self.caveats), "failures": list(self.failures)}


def _sf_report(net: Network, rep: CanonicalRep) -> RobustnessReport:
    report = RobustnessReport(len(net.stoichiometric_basis))
    report.sf_pairs = find_sf_pairs(net, rep)
    strict = {(p.reactions, p.species) for p in report.sf_pairs}
    report.loose_only_pairs = [p for p in find_sf_pairs(net, rep, loose=True)
                               if (p.reactions, p.species) not in strict]
    if report.loose_only_pairs:
        report.caveats.append("loose 'rows differ in X' reading adds "
                              f"{len(report.loose_only_pairs)} pair(s); not used for certificates")
    return report


def acr_audit(net: Network, K: PolyPLKinetics, spec: DecompositionSpec | None = None, *,
              report: RobustnessReport | None = None, equilibria=None, starts: int = 16,
              seed: int = 0, tol: float = TOL_RESIDUAL) -> RobustnessReport:
    """Certify ACR species block by block over an independent decomposition.

    A block certifies species X when (deficiency 0, weakly reversible, PY-RDK,
    sampled PL-equilibrated, linked SF-pair in X) or (deficiency 1, PY-RDK,
    sampled PL-equilibrated, nonterminal SF-pair in X). Every certificate
    must survive an empirical check on solved equilibria of the whole system.
    """
    spec = spec or DecompositionSpec.single_block(net)
    report = report or _sf_report(net, canonicalize(K))
    ind = check_independent(net, spec)
    if not ind.independent:
        raise PreconditionUnmet(f"decomposition {spec.name or spec.blocks} is not independent")
    pts = ([np.asarray(getattr(e, "c", e), dtype=float) for e in equilibria]
           if equilibria is not None else
           sample_equilibria(net, K, "positive", starts=starts, seed=seed, tol=tol))
    if not pts:
        raise PreconditionUnmet("no positive equilibrium found; ACR audit needs one")
    report.acr_ran = True
    candidates: dict[str, list] = {}
    for b, block in enumerate(spec.blocks):
        sub = subnetwork(net, block)
        Kb = _block_kinetics(K, block)
        rep_b = canonicalize(Kb)
        cls = classify(sub, rep_b)
        sr = structural_report(sub)
        where = f"block {b}"
        if not cls.is_py_rdk:
            report.caveats.append(f"{where}: kinetics is {cls.overall}; no certificate")
            continue
        sub_pts = [x for x in pts if _layer_equilibrated(sub, rep_b, x, tol)]
        if len(sub_pts) < len(pts):
            report.caveats.append(f"{where}: some equilibria are not layer-equilibrated "
                                  "(PLE hypothesis fails on the sample); no certificate")
            continue
        pairs = find_sf_pairs(sub, rep_b)
        if sr.deficiency == 0:
            if not sr.weakly_reversible:
                report.caveats.append(f"{where}: deficiency 0 but not weakly reversible")
                continue
            chosen = [p for p in pairs if p.linked]
            rule = "deficiency_zero_linked_sf_pair"
            if pairs and not chosen:
                report.caveats.append(f"{where}: SF-pairs present but none linked")
        elif sr.deficiency == 1:
            chosen = [p for p in pairs if p.nonterminal]
            rule = "deficiency_one_nonterminal_sf_pair"
            if pairs and not chosen:
                report.caveats.append(f"{where}: SF-pairs present but none nonterminal")
        else:
            report.caveats.append(f"{where}: deficiency {sr.deficiency}; no applicable rule")
            continue
        for p in chosen:
            candidates.setdefault(p.species_name, []).append({
                "rule": rule, "block": b, "block_reactions": list(block),
                "pair": [block[p.reactions[0]], block[p.reactions[1]]],
                "layers": list(p.layers),
                "hypotheses": "PLE sampled on solved equilibria, not proven"})
    for name, certs in sorted(candidates.items()):
        s = net.species.index(name)
        sp = spread([x[s] for x in pts])
        if sp > TOL_SPREAD:
            report.failures.append(
                f"ACR certificate in {name} contradicted by equilibria (spread {sp:.3e})")
            continue
        report.acr_species[name] = {"certificates": certs, "empirical_spread": sp,
                                    "equilibria_sampled": len(pts)}
    _check_counts(net, report)
    return report


def bcr_audit(net: Network, K: PolyPLKinetics, kd: KineticOrderData | None = None, *,
              report: RobustnessReport | None = None, equilibria=None, starts: int = 16,
              seed: int = 0, tol: float = TOL_RESIDUAL) -> RobustnessReport:
    """BCR in X iff ``e_X`` lies in ``P_Z``, the sum of the layer kinetic-order
    subspaces (exact rank test), for systems sampled to be PL-complex balanced."""
    rep = canonicalize(K)
    kd = kd or kinetic_order_subspaces(net, rep, classify(net, rep))
    report = report or _sf_report(net, rep)
    if equilibria is not None:
        pts = [np.asarray(getattr(e, "c", e), dtype=float) for e in equilibria]
    else:
        pts = sample_equilibria(net, K, "complex_balanced", starts=starts, seed=seed, tol=tol)
    if not pts:
        raise PreconditionUnmet("no complex-balanced equilibrium found; BCR audit needs one")
    from .equilibria import classify_point
    kinds = [classify_point(net, K, rep, x, tol).kind for x in pts]
    if any(k != "PL_complex_balanced" for k in kinds):
        raise PreconditionUnmet("a complex-balanced equilibrium is not layer-wise balanced; "
                                "the system is not sampled PL-complex balanced")
    report.bcr_ran = True
    PZ = kd.sum_basis
    report.p_z_dim = len(PZ)
    for s, name in enumerate(net.species):
        e = [Fraction(int(t == s)) for t in range(net.m)]
        if linalg.span_contains(PZ, e, dim=net.m):
            sp = spread([x[s] for x in pts])
            report.bcr_species[name] = {"P_Z_basis": [[str(v) for v in b] for b in PZ],
                                        "empirical_spread": sp,
                                        "equilibria_sampled": len(pts)}
            if sp > TOL_SPREAD:
                report.failures.append(f"BCR in {name} contradicted by equilibria "
                                       f"(spread {sp:.3e})")
    if len(PZ) == net.m:
        report.caveats.append("P_Z is the whole space: unique complex-balanced equilibrium")
    _check_counts(net, report)
    return report


def _check_counts(net: Network, report: RobustnessReport) -> None:
    """``m_ACR <= m_BCR <= dim P_Z`` on weakly reversible systems.

    BCR species X have ``e_X`` in P_Z, so their count is bounded by its
    dimension. The further bound by ``s`` fails whenever P_Z is larger than
    S (a unique complex-balanced equilibrium gives BCR in every species),
    so it is reported rather than enforced.
    """
    if not (report.acr_ran and report.bcr_ran and net.is_weakly_reversible):
        return
    if not report.m_acr <= report.m_bcr <= report.p_z_dim:
        raise InvariantViolation(
            f"m_ACR={report.m_acr}, m_BCR={report.m_bcr}, dim P_Z={report.p_z_dim} out of order")
    if report.m_bcr > report.s:
        note = f"m_BCR={report.m_bcr} exceeds s={report.s} (P_Z has dimension {report.p_z_dim})"
        if note not in report.caveats:
            report.caveats.append(note)


def robustness_report(net: Network, K: PolyPLKinetics, spec: DecompositionSpec | None = None,
                      *, starts: int = 16, seed: int = 0,
                      tol: float = TOL_RESIDUAL) -> RobustnessReport:
    """Run both audits, turning unmet preconditions into caveats."""
    rep = canonicalize(K)
    report = _sf_report(net, rep)
    try:
        acr_audit(net, K, spec, report=report, starts=starts, seed=seed, tol=tol)
    except PreconditionUnmet as exc:
        report.caveats.append(f"ACR audit skipped: {exc}")
    try:
        bcr_audit(net, K, report=report, starts=starts, seed=seed, tol=tol)
    except PreconditionUnmet as exc:
        report.caveats.append(f"BCR audit skipped: {exc}")
    return report
