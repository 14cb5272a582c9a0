"""Poly-PL kinetics, its canonical power-law layers, and kinetic classification.

A poly-PL rate is ``K_i(x) = k_i * sum_j a_ij * x**F_ij``. The canonical
representation pads every reaction to the same number ``h`` of terms by
splitting its last term into equal parts, which yields ``h`` power-law
kinetics ("layers") whose sum is ``K``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import KineticsError, NonPositiveConcentration, NonRationalKinetics
from .network import Network

LEX_ORDERS = ("descending", "ascending")


def _num(x, what: str):
    if isinstance(x, bool):
        raise KineticsError(f"{what}: boolean is not a number")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        if not np.isfinite(x):
            raise KineticsError(f"{what}: {x} is not finite")
        return x
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError:
            raise KineticsError(f"{what}: cannot parse {x!r}")
    if hasattr(x, "item"):
        return _num(x.item(), what)
    raise KineticsError(f"{what}: {x!r} is not a number")


def _exact(x) -> bool:
    return isinstance(x, Fraction)


@dataclass(frozen=True)
class Term:
    """One monomial ``a * x**F`` of a poly-PL rate."""

    coefficient: object
    orders: tuple


@dataclass(frozen=True)
class PolyPLKinetics:
    """Rate constants plus, per reaction, a list of monomial terms.

    Numbers are kept as Fractions when given exactly (ints, Fractions,
    rational strings) and as floats otherwise. Terms with zero coefficient
    are dropped on construction.
    """

    rate_constants: tuple
    terms: tuple

    def __post_init__(self):
        ks = tuple(_num(k, f"rate constant {i}") for i, k in enumerate(self.rate_constants))
        if len(ks) != len(self.terms):
            raise KineticsError(
                f"{len(ks)} rate constants for {len(self.terms)} reactions")
        for i, k in enumerate(ks):
            if not k > 0:
                raise KineticsError(f"reaction {i}: rate constant {k} is not positive")
        m = None
        norm = []
        for i, tl in enumerate(self.terms):
            out = []
            seen = set()
            for t in tl:
                if not isinstance(t, Term):
                    a, F = t
                    t = Term(a, F)
                a = _num(t.coefficient, f"reaction {i} coefficient")
                if a < 0:
                    raise KineticsError(f"reaction {i}: negative coefficient {a}")
                F = tuple(_num(f, f"reaction {i} kinetic order") for f in t.orders)
                if m is None:
                    m = len(F)
                elif len(F) != m:
                    raise KineticsError(
                        f"reaction {i}: kinetic-order vector of length {len(F)}, expected {m}")
                if F in seen:
                    raise KineticsError(f"reaction {i}: repeated kinetic-order vector {F}")
                seen.add(F)
                if a == 0:
                    continue
                out.append(Term(a, F))
            if not out:
                raise KineticsError(f"reaction {i} has no term with positive coefficient")
            norm.append(tuple(out))
        object.__setattr__(self, "rate_constants", ks)
        object.__setattr__(self, "terms", tuple(norm))

    @classmethod
    def mass_action(cls, net: Network, k: Sequence | None = None) -> "PolyPLKinetics":
        k = [1] * net.r if k is None else list(k)
        return cls(tuple(k), tuple((Term(1, net.reactant(j)),) for j in range(net.r)))

    @classmethod
    def power_law(cls, k: Sequence, F: Sequence[Sequence]) -> "PolyPLKinetics":
        return cls(tuple(k), tuple((Term(1, tuple(row)),) for row in F))

    @property
    def r(self) -> int:
        return len(self.terms)

    @property
    def m(self) -> int:
        return len(self.terms[0][0].orders)

    @property
    def term_counts(self) -> tuple[int, ...]:
        return tuple(len(t) for t in self.terms)

    @property
    def h(self) -> int:
        return max(self.term_counts)

    @cached_property
    def is_exact(self) -> bool:
        return all(_exact(k) for k in self.rate_constants) and all(
            _exact(t.coefficient) and all(_exact(f) for f in t.orders)
            for tl in self.terms for t in tl)

    @cached_property
    def has_integer_orders(self) -> bool:
        return all(_exact(f) and f.denominator == 1
                   for tl in self.terms for t in tl for f in t.orders)

    def require_rational(self) -> None:
        if not all(_exact(f) for tl in self.terms for t in tl for f in t.orders):
            raise NonRationalKinetics(
                "structural computations need rational kinetic orders; got floats")

    def with_rates(self, k: Sequence) -> "PolyPLKinetics":
        return PolyPLKinetics(tuple(k), self.terms)

    def check_network(self, net: Network) -> None:
        if self.r != net.r or self.m != net.m:
            raise KineticsError(
                f"kinetics has r={self.r}, m={self.m}; network has r={net.r}, m={net.m}")

    @cached_property
    def kernel(self) -> "MonomialKernel":
        """Flattened monomials with coefficients ``k_i * a_ij``."""
        return MonomialKernel.build(
            [(i, float(k) * float(t.coefficient), t.orders)
             for i, (k, tl) in enumerate(zip(self.rate_constants, self.terms)) for t in tl],
            self.r, self.m)

    @cached_property
    def interaction_kernel(self) -> "MonomialKernel":
        """Flattened monomials of the interaction map (all rate constants 1)."""
        return MonomialKernel.build(
            [(i, float(t.coefficient), t.orders)
             for i, tl in enumerate(self.terms) for t in tl],
            self.r, self.m)


@dataclass(frozen=True)
class MonomialKernel:
    """Monomial sums in the layout consumed by the compiled kernels."""

    coef: np.ndarray
    exps: np.ndarray
    owner: np.ndarray
    nrows: int

    @classmethod
    def build(cls, items, nrows: int, m: int) -> "MonomialKernel":
        coef = np.ascontiguousarray([c for _, c, _ in items], dtype=np.float64)
        exps = np.ascontiguousarray(
            np.array([[float(f) for f in F] for _, _, F in items], dtype=np.float64)
            .reshape(len(items), m))
        owner = np.ascontiguousarray([o for o, _, _ in items], dtype=np.intp)
        return cls(coef, exps, owner, nrows)

    def rates_log(self, u: np.ndarray) -> np.ndarray:
        return _kernels.rates(self.coef, self.exps, self.owner, self.nrows,
                              np.ascontiguousarray(u, dtype=np.float64))

    def rates_and_dlog(self, u: np.ndarray):
        """Row values and their derivatives with respect to ``u = log x``."""
        return _kernels.rates_and_dlog(self.coef, self.exps, self.owner, self.nrows,
                                       np.ascontiguousarray(u, dtype=np.float64))


def _positive(x) -> list:
    x = list(x)
    if any(not v > 0 for v in x):
        raise NonPositiveConcentration(f"concentrations must be strictly positive: {x}")
    return x


def _exact_power(x: Sequence[Fraction], F: Sequence[Fraction]) -> Fraction:
    out = Fraction(1)
    for xs, f in zip(x, F):
        if f:
            out *= xs ** int(f)
    return out


def _exact_inputs(K: PolyPLKinetics, x) -> bool:
    return K.is_exact and K.has_integer_orders and all(
        isinstance(v, (int, Rational)) and not isinstance(v, bool) for v in x)


def evaluate(K: PolyPLKinetics, x, *, interaction: bool = False):
    """Rate vector ``K(x)`` (or the interaction map when ``interaction``).

    Returns a tuple of Fractions when the kinetics, the point and the
    exponents are all exact integers/rationals; otherwise a float array.
    """
    x = _positive(x)
    if len(x) != K.m:
        raise NonPositiveConcentration(f"point has length {len(x)}, expected {K.m}")
    if _exact_inputs(K, x):
        xf = [Fraction(v) for v in x]
        return tuple(
            (1 if interaction else k) * sum((t.coefficient * _exact_power(xf, t.orders)
                                             for t in tl), Fraction(0))
            for k, tl in zip(K.rate_constants, K.terms))
    kern = K.interaction_kernel if interaction else K.kernel
    return kern.rates_log(np.log(np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class CanonicalRep:
    """``h`` power-law layers; ``layers[j][i] = (a_ij, F_ij)`` for reaction i."""

    h: int
    rate_constants: tuple
    layers: tuple
    lex: str = "descending"

    @property
    def r(self) -> int:
        return len(self.rate_constants)

    @property
    def m(self) -> int:
        return len(self.layers[0][0][1])

    def layer_rows(self, j: int) -> list[tuple]:
        """Kinetic-order matrix of layer ``j`` (one row per reaction)."""
        return [F for _, F in self.layers[j]]

    def layer_kinetics(self, j: int) -> PolyPLKinetics:
        """Layer ``j`` as a single-term kinetics with the same rate constants."""
        return PolyPLKinetics(self.rate_constants,
                              tuple((Term(a, F),) for a, F in self.layers[j]))

    def reaction_terms(self, i: int) -> list[tuple]:
        return [self.layers[j][i] for j in range(self.h)]

    def flatten(self) -> PolyPLKinetics:
        """Back to a poly-PL kinetics, merging the equal padded copies."""
        terms = []
        for i in range(self.r):
            acc: dict[tuple, object] = {}
            for a, F in self.reaction_terms(i):
                acc[F] = acc[F] + a if F in acc else a
            terms.append(tuple(Term(a, F) for F, a in acc.items()))
        return PolyPLKinetics(self.rate_constants, tuple(terms))

    @cached_property
    def layer_kernel(self) -> MonomialKernel:
        """All layers stacked; row ``j * r + i`` is layer j of reaction i."""
        r = self.r
        return MonomialKernel.build(
            [(j * r + i, float(self.rate_constants[i]) * float(a), F)
             for j in range(self.h) for i, (a, F) in enumerate(self.layers[j])],
            self.h * r, self.m)

    def layer_rates(self, x) -> np.ndarray:
        """Float array of shape (h, r) with ``k_i a_ij x**F_ij``."""
        u = np.log(np.asarray(_positive(x), dtype=float))
        return self.layer_kernel.rates_log(u).reshape(self.h, self.r)


def canonicalize(K: PolyPLKinetics, lex: str = "descending") -> CanonicalRep:
    """Canonical PL-representation of ``K``.

    Terms of each reaction are sorted lexicographically by kinetic-order
    vector (``lex`` picks the direction); reactions with fewer than
    ``h = max h_i`` terms get their last term replaced by ``h - h_i + 1``
    equal copies carrying ``a / (h - h_i + 1)`` each.
    """
    if lex not in LEX_ORDERS:
        raise ValueError(f"lex must be one of {LEX_ORDERS}, got {lex!r}")
    h = K.h
    per_reaction = []
    for tl in K.terms:
        ordered = sorted(tl, key=lambda t: t.orders, reverse=(lex == "descending"))
        pad = h - len(ordered) + 1
        last = ordered[-1]
        a = last.coefficient
        share = a / pad if _exact(a) else float(a) / pad
        row = [(t.coefficient, t.orders) for t in ordered[:-1]]
        row += [(share, last.orders)] * pad
        per_reaction.append(row)
    layers = tuple(tuple(per_reaction[i][j] for i in range(K.r)) for j in range(h))
    return CanonicalRep(h, K.rate_constants, layers, lex)


@dataclass(frozen=True)
class KineticClassification:
    layer_rdk: tuple[bool, ...]
    coefficients_match: bool
    branching_nodes: tuple[int, ...]
    is_mass_action: bool
    violations: tuple = field(default=())

    @property
    def overall(self) -> str:
        return "PY-RDK" if self.is_py_rdk else "PY-NDK"

    @property
    def is_py_rdk(self) -> bool:
        return all(self.layer_rdk) and self.coefficients_match

    def as_dict(self) -> dict:
        return {
            "overall": self.overall,
            "layer_pl_rdk": list(self.layer_rdk),
            "branching_coefficients_match": self.coefficients_match,
            "branching_nodes": list(self.branching_nodes),
            "is_mass_action": self.is_mass_action,
            "violations": [dict(v) for v in self.violations],
        }


def classify(net: Network, rep: CanonicalRep) -> KineticClassification:
    """Reactant-determinedness of every layer and of the poly-PL system."""
    by_reactant: dict[int, list[int]] = {}
    for i, (y, _) in enumerate(net.reactions):
        by_reactant.setdefault(y, []).append(i)
    branching = tuple(sorted(y for y, rs in by_reactant.items() if len(rs) >= 2))
    layer_rdk = []
    violations = []
    coeff_ok = True
    for j in range(rep.h):
        ok = True
        for y in branching:
            rs = by_reactant[y]
            rows = {rep.layers[j][i][1] for i in rs}
            if len(rows) > 1:
                ok = False
                violations.append({"kind": "kinetic_orders", "layer": j, "complex": y,
                                   "reactions": rs})
            coeffs = {rep.layers[j][i][0] for i in rs}
            if len(coeffs) > 1:
                coeff_ok = False
                violations.append({"kind": "coefficients", "layer": j, "complex": y,
                                   "reactions": rs})
        layer_rdk.append(ok)
    mass_action = rep.h == 1 and all(
        tuple(rep.layers[0][i][1]) == tuple(Fraction(c) for c in net.reactant(i))
        for i in range(net.r))
    return KineticClassification(tuple(layer_rdk), coeff_ok, branching, mass_action,
                                 tuple(violations))
