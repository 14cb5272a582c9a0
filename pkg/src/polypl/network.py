"""Reaction network data model and its graph/stoichiometric invariants."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import linalg
from .errors import (
    DimensionMismatch,
    DuplicateComplex,
    NegativeStoichiometry,
    NetworkValidationError,
    NonIntegerStoichiometry,
    OrphanComplex,
    OrphanSpecies,
    SelfLoopReaction,
)
from .linalg import RationalMatrix


@dataclass(frozen=True)
class Network:
    """Species, complexes (integer vectors) and reactions (index pairs).

    Instances built through :func:`validate` or :meth:`from_reactions` have
    complexes in ascending lexicographic order; reactions keep the order in
    which they were declared.
    """

    species: tuple[str, ...]
    complexes: tuple[tuple[int, ...], ...]
    reactions: tuple[tuple[int, int], ...]

    @classmethod
    def from_reactions(
        cls,
        species: Sequence[str],
        reactions: Iterable[tuple],
    ) -> "Network":
        """Build a validated network from (reactant, product) pairs.

        Each complex may be a sequence of length m or a mapping from species
        name to coefficient.
        """
        species = tuple(species)
        complexes: list[tuple] = []
        index: dict[tuple, int] = {}
        pairs = []
        for k, (y, yp) in enumerate(reactions):
            ends = []
            for c in (y, yp):
                vec = _complex_vector(c, species, k)
                if vec not in index:
                    index[vec] = len(complexes)
                    complexes.append(vec)
                ends.append(index[vec])
            pairs.append(tuple(ends))
        return validate(cls(species, tuple(complexes), tuple(pairs)))

    @property
    def m(self) -> int:
        return len(self.species)

    @property
    def n(self) -> int:
        return len(self.complexes)

    @property
    def r(self) -> int:
        return len(self.reactions)

    def reactant(self, j: int) -> tuple[int, ...]:
        return self.complexes[self.reactions[j][0]]

    def product(self, j: int) -> tuple[int, ...]:
        return self.complexes[self.reactions[j][1]]

    def reaction_vector(self, j: int) -> tuple[int, ...]:
        return tuple(b - a for a, b in zip(self.reactant(j), self.product(j)))

    @cached_property
    def reactant_complexes(self) -> tuple[int, ...]:
        """Distinct reactant complex indices in canonical complex order."""
        return tuple(sorted({y for y, _ in self.reactions}))

    def complex_label(self, i: int) -> str:
        terms = []
        for name, c in zip(self.species, self.complexes[i]):
            if c == 1:
                terms.append(name)
            elif c:
                terms.append(f"{c}{name}")
        return " + ".join(terms) if terms else "0"

    def reaction_label(self, j: int) -> str:
        y, yp = self.reactions[j]
        return f"{self.complex_label(y)} -> {self.complex_label(yp)}"

    @cached_property
    def stoichiometric_basis(self) -> list[tuple[Fraction, ...]]:
        """Exact basis (RREF rows) of the stoichiometric subspace S."""
        return linalg.row_space_basis(
            [self.reaction_vector(j) for j in range(self.r)], dim=self.m
        )

    @cached_property
    def linkage_classes(self) -> tuple[tuple[int, ...], ...]:
        """Connected components of the undirected reaction graph (union-find)."""
        parent = list(range(self.n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for y, yp in self.reactions:
            ra, rb = find(y), find(yp)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
        groups: dict[int, list[int]] = {}
        for i in range(self.n):
            groups.setdefault(find(i), []).append(i)
        return tuple(tuple(g) for g in sorted(groups.values()))

    @cached_property
    def linkage_class_of(self) -> tuple[int, ...]:
        out = [0] * self.n
        for k, lc in enumerate(self.linkage_classes):
            for i in lc:
                out[i] = k
        return tuple(out)

    @cached_property
    def strong_linkage_classes(self) -> tuple[tuple[int, ...], ...]:
        return _tarjan(self.n, self.reactions)

    @cached_property
    def terminal_classes(self) -> tuple[tuple[int, ...], ...]:
        comp = {}
        for k, scc in enumerate(self.strong_linkage_classes):
            for i in scc:
                comp[i] = k
        has_exit = set()
        for y, yp in self.reactions:
            if comp[y] != comp[yp]:
                has_exit.add(comp[y])
        return tuple(
            scc for k, scc in enumerate(self.strong_linkage_classes) if k not in has_exit
        )

    @cached_property
    def is_weakly_reversible(self) -> bool:
        return len(self.strong_linkage_classes) == len(self.linkage_classes)

    def reverse(self) -> "Network":
        return validate(Network(self.species, self.complexes,
                                tuple((b, a) for a, b in self.reactions)))


def _complex_vector(c, species: Sequence[str], reaction_index: int) -> tuple:
    if isinstance(c, Mapping):
        unknown = set(c) - set(species)
        if unknown:
            raise NetworkValidationError(
                f"reaction {reaction_index}: unknown species {sorted(unknown)}"
            )
        return tuple(c.get(s, 0) for s in species)
    vec = tuple(c)
    if len(vec) != len(species):
        raise DimensionMismatch(
            f"reaction {reaction_index}: complex {vec} has length {len(vec)}, "
            f"expected {len(species)}"
        )
    return vec


def _as_stoich(x, where: str) -> int:
    if isinstance(x, bool):
        raise NonIntegerStoichiometry(f"{where}: coefficient {x!r} is not an integer")
    if isinstance(x, int):
        v = x
    elif isinstance(x, (Rational, float)) and x == int(x):
        v = int(x)
    elif isinstance(x, str):
        try:
            f = Fraction(x)
        except ValueError:
            raise NonIntegerStoichiometry(f"{where}: coefficient {x!r} is not a number")
        if f.denominator != 1:
            raise NonIntegerStoichiometry(f"{where}: coefficient {x} is not an integer")
        v = int(f)
    else:
        raise NonIntegerStoichiometry(f"{where}: coefficient {x} is not an integer")
    if v < 0:
        raise NegativeStoichiometry(f"{where}: coefficient {v} is negative")
    return v


def validate(net: Network, *, allow_orphan_species: bool = False) -> Network:
    """Check the network invariants and return it in canonical form.

    Complexes are reordered lexicographically (ascending) and reactions are
    re-indexed accordingly. All problems are collected; the first one is
    raised with the full list available as ``exc.issues``.
    """
    issues: list[NetworkValidationError] = []
    species = tuple(str(s) for s in net.species)
    if len(set(species)) != len(species):
        dup = sorted({s for s in species if species.count(s) > 1})
        issues.append(NetworkValidationError(f"duplicate species names {dup}"))
    m = len(species)
    complexes = []
    for i, c in enumerate(net.complexes):
        c = tuple(c)
        if len(c) != m:
            raise DimensionMismatch(f"complex {i} has length {len(c)}, expected {m}")
        try:
            complexes.append(tuple(_as_stoich(x, f"complex {i}") for x in c))
        except NetworkValidationError as exc:
            issues.append(exc)
            complexes.append(tuple(0 for _ in c))
    seen: dict[tuple, int] = {}
    for i, c in enumerate(complexes):
        if c in seen:
            issues.append(DuplicateComplex(
                f"complex {i} duplicates complex {seen[c]}: {c}"))
        else:
            seen[c] = i
    reactions = []
    for j, (y, yp) in enumerate(net.reactions):
        if not (0 <= y < len(complexes) and 0 <= yp < len(complexes)):
            issues.append(NetworkValidationError(
                f"reaction {j} references a complex index out of range"))
            continue
        if y == yp or complexes[y] == complexes[yp]:
            issues.append(SelfLoopReaction(
                f"reaction {j} has identical reactant and product complex {complexes[y]}"))
        reactions.append((y, yp))
    used = {i for pair in reactions for i in pair}
    for i in range(len(complexes)):
        if i not in used:
            issues.append(OrphanComplex(f"complex {i} {complexes[i]} occurs in no reaction"))
    if not allow_orphan_species:
        for s in range(m):
            if not any(complexes[i][s] for i in used):
                issues.append(OrphanSpecies(f"species {species[s]!r} occurs in no complex"))
    if issues:
        first = issues[0]
        first.issues = issues
        raise first

    order = sorted(range(len(complexes)), key=lambda i: complexes[i])
    new_index = {old: new for new, old in enumerate(order)}
    return Network(
        species,
        tuple(complexes[i] for i in order),
        tuple((new_index[y], new_index[yp]) for y, yp in reactions),
    )


def _tarjan(n: int, arcs: Sequence[tuple[int, int]]) -> tuple[tuple[int, ...], ...]:
    """Strongly connected components (iterative Tarjan), each sorted."""
    succ: list[list[int]] = [[] for _ in range(n)]
    for a, b in arcs:
        succ[a].append(b)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[tuple[int, ...]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, i = work[-1]
            if i < len(succ[v]):
                work[-1] = (v, i + 1)
                w = succ[v][i]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    u = work[-1][0]
                    low[u] = min(low[u], low[v])
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        comp.append(w)
                        if w == v:
                            break
                    comps.append(tuple(sorted(comp)))
    return tuple(sorted(comps))


def matrices(net: Network) -> tuple[RationalMatrix, RationalMatrix, RationalMatrix]:
    """Map of complexes Y (m x n), incidence matrix I_a (n x r), N = Y I_a."""
    Y = RationalMatrix.from_columns(net.complexes, rows=net.m)
    Ia = RationalMatrix(
        [[(i == yp) - (i == y) for (y, yp) in net.reactions] for i in range(net.n)],
        cols=net.r,
    )
    N = RationalMatrix.from_columns(
        [net.reaction_vector(j) for j in range(net.r)], rows=net.m
    )
    return Y, Ia, N


@dataclass(frozen=True)
class StructuralReport:
    m: int
    n: int
    r: int
    linkage_classes: int
    strong_linkage_classes: int
    terminal_classes: int
    s: int
    deficiency: int
    weakly_reversible: bool
    t_minimal: bool
    cycle_terminal: bool
    terminal_complexes: tuple[int, ...]
    nonterminal_complexes: tuple[int, ...]
    n_reactant: int

    def as_dict(self) -> dict:
        return {
            "m": self.m, "n": self.n, "r": self.r,
            "l": self.linkage_classes, "sl": self.strong_linkage_classes,
            "t": self.terminal_classes, "s": self.s, "deficiency": self.deficiency,
            "weakly_reversible": self.weakly_reversible,
            "t_minimal": self.t_minimal, "cycle_terminal": self.cycle_terminal,
            "terminal_complexes": list(self.terminal_complexes),
            "nonterminal_complexes": list(self.nonterminal_complexes),
            "n_r": self.n_reactant,
        }


def structural_report(net: Network) -> StructuralReport:
    s = len(net.stoichiometric_basis)
    n, l = net.n, len(net.linkage_classes)
    terminal = tuple(sorted(i for scc in net.terminal_classes for i in scc))
    nonterminal = tuple(i for i in range(n) if i not in set(terminal))
    n_r = len(net.reactant_complexes)
    report = StructuralReport(
        m=net.m, n=n, r=net.r,
        linkage_classes=l,
        strong_linkage_classes=len(net.strong_linkage_classes),
        terminal_classes=len(net.terminal_classes),
        s=s,
        deficiency=n - l - s,
        weakly_reversible=net.is_weakly_reversible,
        t_minimal=len(net.terminal_classes) == l,
        cycle_terminal=n_r == n,
        terminal_complexes=terminal,
        nonterminal_complexes=nonterminal,
        n_reactant=n_r,
    )
    if report.deficiency < 0:
        from .errors import InvariantViolation
        raise InvariantViolation(f"negative deficiency {report.deficiency}")
    return report


def _is_exact(v) -> bool:
    return all(isinstance(x, (int, Rational)) and not isinstance(x, bool) for x in v)


def stoichiometric_class_membership(net: Network, c, c0, *, tol: float = 1e-9) -> bool:
    """Whether ``c - c0`` lies in the stoichiometric subspace.

    Exact for rational inputs; floats use an orthogonal-projection test with
    tolerance ``tol`` relative to ``max(1, |c - c0|)``.
    """
    c, c0 = list(c), list(c0)
    if len(c) != net.m or len(c0) != net.m:
        raise DimensionMismatch(f"concentration vectors must have length {net.m}")
    if any(x <= 0 for x in c) or any(x <= 0 for x in c0):
        from .errors import NonPositiveConcentration
        raise NonPositiveConcentration("concentrations must be strictly positive")
    if _is_exact(c) and _is_exact(c0):
        d = [Fraction(a) - Fraction(b) for a, b in zip(c, c0)]
        return linalg.span_contains(net.stoichiometric_basis, d, dim=net.m)
    d = np.asarray(c, dtype=float) - np.asarray(c0, dtype=float)
    B = orthonormal_basis(net.stoichiometric_basis, net.m)
    resid = d - B @ (B.T @ d)
    return float(np.linalg.norm(resid)) <= tol * max(1.0, float(np.linalg.norm(d)))


def orthonormal_basis(basis: Sequence[Sequence], dim: int) -> np.ndarray:
    """Float orthonormal basis (columns) of the span of exact vectors."""
    if not basis:
        return np.zeros((dim, 0))
    A = np.array([[float(x) for x in v] for v in basis]).T
    q, _ = np.linalg.qr(A)
    return q[:, : len(basis)]
