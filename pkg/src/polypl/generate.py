"""Random and hand-built poly-PL systems for tests, benchmarks and demos."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import NetworkValidationError
from .kinetics import PolyPLKinetics, Term
from .network import Network


def _species(m: int) -> list[str]:
    return [f"X{i + 1}" for i in range(m)]


def _complexes(rng: np.random.Generator, m: int, n: int, max_coef: int) -> list[tuple]:
    seen: set[tuple] = set()
    while len(seen) < n:
        c = tuple(int(v) for v in rng.integers(0, max_coef + 1, m))
        if any(c):
            seen.add(c)
    return sorted(seen)


def random_network(rng: np.random.Generator, *, m: int | None = None, n: int | None = None,
                   weakly_reversible: bool = True, max_coef: int = 2,
                   attempts: int = 200) -> Network:
    """Random network with m <= 4 species and n <= 6 complexes.

    Weakly reversible networks are unions of directed cycles (with random
    extra reverse arcs) over a random partition of the complexes.
    """
    for _ in range(attempts):
        mm = m or int(rng.integers(1, 5))
        nn = min(n or int(rng.integers(2, 7)), (max_coef + 1) ** mm - 1)
        cx = _complexes(rng, mm, nn, max_coef)
        order = list(rng.permutation(nn))
        arcs: list[tuple[int, int]] = []
        if weakly_reversible:
            groups = [order]
            if nn >= 4 and rng.random() < 0.5:
                cut = int(rng.integers(2, nn - 1))
                groups = [order[:cut], order[cut:]]
            for g in groups:
                for a, b in zip(g, g[1:] + g[:1]):
                    arcs.append((a, b))
                    if len(g) > 2 and rng.random() < 0.3:
                        arcs.append((b, a))
        else:
            for a, b in zip(order, order[1:]):
                arcs.append((a, b) if rng.random() < 0.7 else (b, a))
            if rng.random() < 0.5:
                arcs.append((order[-1], order[0]))
        arcs = list(dict.fromkeys(arcs))
        try:
            return Network.from_reactions(_species(mm), [(cx[a], cx[b]) for a, b in arcs])
        except NetworkValidationError:
            continue
    raise RuntimeError("could not generate a valid network")


def _distinct_rows(rng: np.random.Generator, m: int, h: int, low: int = 0,
                   high: int = 2) -> list[tuple[int, ...]]:
    rows: set[tuple] = set()
    while len(rows) < h:
        rows.add(tuple(int(v) for v in rng.integers(low, high + 1, m)))
    return sorted(rows, reverse=True)


def random_rational(rng: np.random.Generator, low: int = 1, high: int = 9) -> Fraction:
    return Fraction(int(rng.integers(low, high + 1)), int(rng.integers(low, high + 1)))


def random_kinetics(rng: np.random.Generator, net: Network, *, h_max: int = 3,
                    reactant_determined: bool = True) -> PolyPLKinetics:
    """Random exact poly-PL kinetics with 1..h_max terms per reaction.

    With ``reactant_determined`` every reaction leaving a complex gets the
    same term list, so each canonical layer is reactant-determined.
    """
    per_complex: dict[int, tuple] = {}
    terms = []
    for y, _ in net.reactions:
        if y not in per_complex or not reactant_determined:
            h = int(rng.integers(1, h_max + 1))
            rows = _distinct_rows(rng, net.m, h)
            per_complex[y] = tuple(Term(random_rational(rng), F) for F in rows)
        terms.append(per_complex[y])
    k = tuple(random_rational(rng) for _ in range(net.r))
    return PolyPLKinetics(k, tuple(terms))


def pl_balanced_system(rng: np.random.Generator, net: Network | None = None, *, h: int = 2,
                       x_star=None) -> tuple[Network, PolyPLKinetics, tuple]:
    """Weakly reversible reactant-determined system whose CCB rates at
    ``x_star`` balance every canonical layer there.

    Each reactant complex gets ``h`` distinct kinetic-order rows; the term in
    sorted position j has coefficient ``w_j / x_star**F`` so that all its
    monomials take the value ``w_j`` at ``x_star``. The returned kinetics
    still carries placeholder rate constants (all 1).
    """
    net = net or random_network(rng)
    if x_star is None:
        x_star = tuple(random_rational(rng, 1, 4) for _ in range(net.m))
    weights = [random_rational(rng) for _ in range(h)]
    per_complex: dict[int, tuple] = {}
    terms = []
    for y, _ in net.reactions:
        if y not in per_complex:
            rows = _distinct_rows(rng, net.m, h)
            out = []
            for w, F in zip(weights, rows):
                mono = Fraction(1)
                for xs, f in zip(x_star, F):
                    mono *= Fraction(xs) ** f
                out.append(Term(w / mono, F))
            per_complex[y] = tuple(out)
        terms.append(per_complex[y])
    return net, PolyPLKinetics(tuple([1] * net.r), tuple(terms)), tuple(x_star)


def example1() -> tuple[Network, PolyPLKinetics]:
    """Two species, two reversible pairs, four-term Hill-derived rates."""
    net = Network.from_reactions(["X", "Y"], [
        ({"X": 1}, {"X": 2, "Y": 1}), ({"X": 2, "Y": 1}, {"X": 1}),
        ({"Y": 1}, {"X": 1, "Y": 2}), ({"X": 1, "Y": 2}, {"Y": 1})])
    K = PolyPLKinetics((1, 1, 1, 1), (
        ((1, (1, 0)), (1, (2, 0)), (1, (1, 1)), (1, (2, 1))),
        ((1, (0, 1)), (1, (1, 1)), (1, (0, 2)), (1, (1, 2))),
        ((1, (1, 1)), (1, (1, 0))),
        ((1, (1, 1)), (1, (0, 1)))))
    return net, K


def example2(k3=1) -> tuple[Network, PolyPLKinetics]:
    """Enzyme mechanism S1+S2 <-> S4 <-> S1+S3 with polynomial rates."""
    S = ["S1", "S2", "S3", "S4"]
    net = Network.from_reactions(S, [
        ({"S1": 1, "S2": 1}, {"S4": 1}), ({"S4": 1}, {"S1": 1, "S2": 1}),
        ({"S4": 1}, {"S1": 1, "S3": 1}), ({"S1": 1, "S3": 1}, {"S4": 1})])
    K = PolyPLKinetics((1, 1, 1, 1), (
        ((1, (1, 1, 0, 0)), (k3, (1, 2, 0, 0)), (1, (1, 1, 0, 1))),
        ((1, (0, 0, 1, 0)), (k3, (0, 1, 1, 0)), (1, (0, 0, 1, 1))),
        ((1, (0, 1, 0, 0)),),
        ((1, (0, 0, 0, 1)),)))
    return net, K


def acr_instance(k1=1, k2=2) -> tuple[Network, PolyPLKinetics]:
    """A <-> B with rates k1(AB + AB^2) and k2(B + B^2): ACR in A at k2/k1."""
    net = Network.from_reactions(["A", "B"], [({"A": 1}, {"B": 1}), ({"B": 1}, {"A": 1})])
    K = PolyPLKinetics((k1, k2), (((1, (1, 1)), (1, (1, 2))),
                                  ((1, (0, 1)), (1, (0, 2)))))
    return net, K


def sign_failure_instance() -> tuple[Network, PolyPLKinetics]:
    """A <-> B with orders 0 and (1, 1): the sign pattern (+, -) lies in S and
    in the complement of the kinetic-order subspace."""
    net = Network.from_reactions(["A", "B"], [({"A": 1}, {"B": 1}), ({"B": 1}, {"A": 1})])
    return net, PolyPLKinetics.power_law((1, 1), [(0, 0), (1, 1)])
