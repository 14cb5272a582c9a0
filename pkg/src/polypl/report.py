"""Assembly of analysis reports from a parsed model document."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import linalg
from .decomposition import (
    DecompositionSpec,
    check_incidence_independent,
    check_independent,
    equilibria_set_relations,
)
from .equilibria import (
    TOL_DEDUP,
    TOL_RESIDUAL,
    ccb_construct,
    monostationarity_sign_check,
    parametrization_check,
    solve_equilibrium,
)
from .errors import PolyPLError, PreconditionUnmet
from .indices import is_py_tik, kinetic_deficiency_bounds_check, kinetic_order_subspaces, t_matrices
from .io import ModelDocument, jsonable
from .kinetics import canonicalize, classify
from .network import structural_report
from .robustness import robustness_report
from .stability import (
    d_stability_falsifier,
    finite_difference_jacobian,
    jacobian,
    restrict_and_classify,
    uniqueness_from_stability,
)
from .star_msc import dynamic_equivalence_residual, replica_decomposition, transform

COMMANDS = ("analyze", "canonical", "star-msc", "indices", "decompose", "equilibria",
            "stability", "robustness", "all")
SECTIONS = ("analyze", "canonical", "star-msc", "indices", "decompose", "equilibria",
            "stability", "robustness")


@dataclass(frozen=True)
class Settings:
    seed: int = 0
    starts: int = 32
    tol_residual: float = TOL_RESIDUAL
    tol_dedup: float = TOL_DEDUP
    lex: str = "descending"
    rates: str = "given"
    trials: int = 20

    @classmethod
    def from_options(cls, options: dict, **overrides) -> "Settings":
        base = {k: options[k] for k in ("seed", "starts", "tol_residual", "tol_dedup", "lex",
                                         "rates", "trials") if k in options}
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**base)

    def rng(self, section: str) -> np.random.Generator:
        return np.random.default_rng([self.seed, SECTIONS.index(section)])


def _frac(v):
    return jsonable(v) if isinstance(v, Fraction) else float(v)


class Analysis:
    """Lazily computed pieces shared by the report sections."""

    def __init__(self, doc: ModelDocument, settings: Settings):
        self.doc = doc
        self.settings = settings
        self.net = doc.network()
        self.K = doc.kinetics()
        self.K.check_network(self.net)
        self.caveats: list = []
        self.failures: list = []
        self.rate_assignment = None
        if settings.rates == "ccb":
            point = doc.options.get("ccb_point", [1] * self.net.m)
            self.rate_assignment = ccb_construct(self.net, self.K, point)
            self.K = self.K.with_rates(self.rate_assignment.k)
        self.rep = canonicalize(self.K, settings.lex)
        self.cls = classify(self.net, self.rep)
        self._kd = self._rdd = self._eq = None

    def caveat(self, code: str, message: str, **extra) -> None:
        self.caveats.append({"code": code, "message": message, **extra})

    @property
    def kd(self):
        if self._kd is None:
            self._kd = kinetic_order_subspaces(self.net, self.rep, self.cls)
        return self._kd

    @property
    def rdd(self):
        if self._rdd is None:
            self._rdd = t_matrices(self.net, self.rep)
        return self._rdd

    # sections -------------------------------------------------------------

    def analyze(self) -> dict:
        net = self.net
        out = structural_report(net).as_dict()
        out["species"] = list(net.species)
        out["complexes"] = [net.complex_label(i) for i in range(net.n)]
        out["reactions"] = [net.reaction_label(j) for j in range(net.r)]
        out["stoichiometric_basis"] = jsonable(net.stoichiometric_basis)
        out["provenance"] = "exact"
        return out

    def canonical(self) -> dict:
        layers = [[{"a": _frac(a), "F": [_frac(f) for f in F]} for a, F in layer]
                  for layer in self.rep.layers]
        out = {"h": self.rep.h, "lex": self.rep.lex,
               "rate_constants": [_frac(k) for k in self.rep.rate_constants],
               "layers": layers, "classification": self.cls.as_dict(),
               "provenance": "exact" if self.K.is_exact else "float"}
        if self.rate_assignment is not None:
            out["rate_assignment"] = self.rate_assignment.as_dict()
        if not self.cls.is_py_rdk:
            self.caveat("kinetics.py_ndk",
                        "kinetics is not reactant-determined in every canonical layer",
                        classification=self.cls.overall)
        return out

    def star_msc(self) -> dict:
        net = self.net
        t = transform(net, self.rep)
        S = net.stoichiometric_basis
        Ss = t.network.stoichiometric_basis
        same = len(S) == len(Ss) == len(linalg.row_space_basis(list(S) + list(Ss), net.m))
        rng = self.settings.rng("star-msc")
        resid = max(dynamic_equivalence_residual(net, self.K, t, np.exp(rng.uniform(-2, 2, net.m)))
                    for _ in range(self.settings.trials))
        rd = replica_decomposition(t)
        out = {"translation": t.translation, "h": t.h,
               "complexes": t.network.n, "reactions": t.network.r,
               "same_stoichiometric_subspace": same,
               "dynamic_equivalence_max_residual": resid,
               "replica_blocks": rd["blocks"], "c_decomposition": rd["c_decomposition"],
               "incidence_independent": rd["incidence_independent"],
               "weakly_reversible_replicas": rd["weakly_reversible_blocks"]}
        if not same:
            self.failures.append("translated network changed the stoichiometric subspace")
        if not rd["c_decomposition"]:
            self.failures.append("replica decomposition is not a C-decomposition")
        try:
            out["kinetic_deficiency_bounds"] = kinetic_deficiency_bounds_check(t, self.kd)
        except PreconditionUnmet as exc:
            out["kinetic_deficiency_bounds"] = None
            self.caveat(exc.code, f"kinetic deficiency bounds skipped: {exc}")
        return out

    def indices(self) -> dict:
        out: dict = {}
        try:
            out["kinetic_order"] = self.kd.as_dict()
        except PreconditionUnmet as exc:
            out["kinetic_order"] = None
            self.caveat(exc.code, f"kinetic order subspaces unavailable: {exc}")
        try:
            rdd = self.rdd
            out["reactant_deficiency"] = rdd.as_dict()
            out["py_tik"] = is_py_tik(rdd, self.cls)
        except PreconditionUnmet as exc:
            out["reactant_deficiency"] = None
            self.caveat(exc.code, f"kinetic reactant deficiency unavailable: {exc}")
        out["provenance"] = "exact"
        return out

    def decompose(self) -> dict:
        specs = [DecompositionSpec.linkage_classes(self.net)]
        specs += [DecompositionSpec(tuple(map(tuple, b)), name)
                  for name, b in self.doc.decompositions.items()]
        out = {}
        rng_seed = int(self.settings.rng("decompose").integers(2**31))
        for spec in specs:
            ind = check_independent(self.net, spec)
            inc = check_incidence_independent(self.net, spec)
            rel = equilibria_set_relations(self.net, self.K, spec,
                                           starts=max(4, self.settings.starts // 2),
                                           seed=rng_seed, tol=self.settings.tol_residual)
            self.failures += [f"{spec.name}: {f}" for f in rel.failures]
            for c in rel.caveats:
                self.caveat("decomposition.caveat", f"{spec.name}: {c}")
            out[spec.name] = {"blocks": [list(b) for b in spec.blocks],
                              "independence": ind.as_dict(),
                              "incidence": inc.as_dict(),
                              "set_relations": rel.as_dict()}
        return out

    def equilibria(self) -> dict:
        if self._eq is not None:
            return self._eq
        st = self.settings
        out: dict = {"rates": "ccb_constructed" if self.rate_assignment else "given"}
        rng = st.rng("equilibria")
        for mode in ("positive", "complex_balanced", "PL_complex_balanced"):
            recs = solve_equilibrium(self.net, self.K, mode=mode, starts=st.starts, rng=rng,
                                     lex=st.lex, tol_residual=st.tol_residual,
                                     tol_dedup=st.tol_dedup)
            out[mode] = [r.as_dict() for r in recs]
        pl = out["PL_complex_balanced"]
        try:
            kd = self.kd
        except PreconditionUnmet:
            kd = None
        if pl and kd is not None:
            pc = parametrization_check(self.net, self.rep, kd, pl[0]["c"], st.trials,
                                       seed=st.seed)
            out["parametrization"] = pc.as_dict()
            if not pc.on_manifold_ok:
                self.failures.append("log-parametrized points left the balanced set")
        if kd is not None:
            try:
                out["sign_criterion"] = monostationarity_sign_check(self.net, kd).as_dict()
            except PreconditionUnmet as exc:
                self.caveat(exc.code, f"sign criterion skipped: {exc}")
        if not out["positive"]:
            self.caveat("equilibria.none_found", f"no positive equilibrium in {st.starts} starts")
        self._eq = out
        return out

    def stability(self) -> dict:
        eq = self.equilibria()
        points = [r for r in eq["PL_complex_balanced"]] or eq["positive"]
        out = []
        S = self.net.stoichiometric_basis
        for k, rec in enumerate(points[:5]):
            c = np.array(rec["c"])
            J = jacobian(self.net, self.K, c)
            Jfd = finite_difference_jacobian(self.net, self.K, c)
            fd_err = float(np.max(np.abs(J - Jfd)) / max(1.0, float(np.max(np.abs(J)))))
            verdict = restrict_and_classify(J, S)
            entry = {"c": rec["c"], "kind": rec["kind"], "jacobian": J.tolist(),
                     "finite_difference_relative_error": fd_err,
                     "verdict": verdict.as_dict()}
            uniq = uniqueness_from_stability(self.net, self.K, verdict, c,
                                             starts=self.settings.starts,
                                             seed=self.settings.seed + k,
                                             tol_residual=self.settings.tol_residual,
                                             tol_dedup=self.settings.tol_dedup)
            entry["uniqueness"] = uniq.as_dict()
            if uniq.failed:
                self.failures.append(f"second balanced equilibrium in the class of {rec['c']}")
            entry["d_stability"] = d_stability_falsifier(J, S, 200,
                                                         seed=self.settings.seed).as_dict()
            entry["d_stability"]["evaluated_at"] = rec["c"]
            out.append(entry)
        return {"points": out}

    def robustness(self) -> dict:
        name = self.doc.options.get("decomposition")
        spec = None
        if name is not None:
            if name not in self.doc.decompositions:
                from .errors import SchemaError
                raise SchemaError(f"options.decomposition: unknown decomposition {name!r}")
            spec = DecompositionSpec(tuple(map(tuple, self.doc.decompositions[name])), name)
        rr = robustness_report(self.net, self.K, spec, starts=self.settings.starts,
                               seed=self.settings.seed, tol=self.settings.tol_residual)
        self.failures += rr.failures
        for c in rr.caveats:
            self.caveat("robustness.caveat", c)
        return rr.as_dict()

    # claims ---------------------------------------------------------------

    def check_claims(self) -> None:
        claims = self.doc.claims
        if not claims:
            return
        computed: dict = {}
        sr = structural_report(self.net)
        computed["deficiency"] = sr.deficiency
        computed["weakly_reversible"] = sr.weakly_reversible
        computed["classification"] = self.cls.overall
        try:
            computed["kinetic_deficiency"] = self.kd.kinetic_deficiency
            computed["layer_kinetic_deficiencies"] = list(self.kd.layer_deficiencies)
        except PreconditionUnmet:
            computed["kinetic_deficiency"] = None
        try:
            computed["kinetic_reactant_deficiency"] = self.rdd.delta_hat
            computed["py_tik"] = is_py_tik(self.rdd, self.cls)["py_tik"]
        except PreconditionUnmet:
            computed["kinetic_reactant_deficiency"] = None
            computed["py_tik"] = False
        for key, claimed in claims.items():
            value = computed.get(key)
            if jsonable(claimed) != jsonable(value):
                extra = {}
                if key == "kinetic_deficiency" and "layer_kinetic_deficiencies" in computed:
                    extra["layer_values"] = computed["layer_kinetic_deficiencies"]
                self.caveat("claim_mismatch",
                            f"claimed {key} = {jsonable(claimed)} but computed {jsonable(value)}",
                            claim=key, claimed=jsonable(claimed), computed=jsonable(value),
                            **extra)


def run(command: str, doc: ModelDocument, settings: Settings | None = None) -> dict:
    """Build the report for one subcommand.

    In ``all`` mode an unmet precondition inside a section is recorded and the
    other sections still run; for single subcommands it propagates.
    """
    if command not in COMMANDS:
        raise ValueError(f"unknown command {command!r}")
    settings = settings or Settings.from_options(doc.options)
    a = Analysis(doc, settings)
    sections = SECTIONS if command == "all" else (command,)
    report: dict = {"model": doc.name, "command": command,
                    "settings": {"seed": settings.seed, "starts": settings.starts,
                                 "tol_residual": settings.tol_residual,
                                 "tol_dedup": settings.tol_dedup, "lex": settings.lex,
                                 "rates": settings.rates}}
    for name in sections:
        fn = getattr(a, name.replace("-", "_"))
        if command == "all":
            try:
                report[name] = fn()
            except PreconditionUnmet as exc:
                report[name] = {"skipped": str(exc), "code": exc.code}
                a.caveat(exc.code, f"{name}: {exc}")
        else:
            report[name] = fn()
    a.check_claims()
    report["caveats"] = a.caveats
    report["failures"] = a.failures
    return jsonable(report)


def exit_status(report: dict) -> int:
    return 3 if report.get("failures") else 0


def error_report(exc: PolyPLError) -> dict:
    return {"error": {"code": exc.code, "message": str(exc), "exit_status": exc.exit_status}}
