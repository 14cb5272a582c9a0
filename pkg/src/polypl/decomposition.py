"""Network decompositions: independence, incidence independence and the
pointwise relations between equilibria of the whole and of its blocks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidPartition, InvariantViolation
from .network import Network, validate


@dataclass(frozen=True)
class DecompositionSpec:
    """Partition of reaction indices into blocks."""

    blocks: tuple[tuple[int, ...], ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(tuple(int(i) for i in b) for b in self.blocks))

    @classmethod
    def linkage_classes(cls, net: Network) -> "DecompositionSpec":
        lc = net.linkage_class_of
        blocks: dict[int, list[int]] = {}
        for j, (y, _) in enumerate(net.reactions):
            blocks.setdefault(lc[y], []).append(j)
        return cls(tuple(sorted(tuple(b) for b in blocks.values())), name="linkage_classes")

    @classmethod
    def single_block(cls, net: Network) -> "DecompositionSpec":
        return cls((tuple(range(net.r)),), name="whole_network")


def check_partition(net: Network, spec: DecompositionSpec) -> None:
    seen: set[int] = set()
    for b, block in enumerate(spec.blocks):
        if not block:
            raise InvalidPartition(f"block {b} is empty")
        for j in block:
            if not 0 <= j < net.r:
                raise InvalidPartition(f"block {b}: reaction index {j} out of range")
            if j in seen:
                raise InvalidPartition(f"reaction {j} appears in more than one block")
            seen.add(j)
    missing = sorted(set(range(net.r)) - seen)
    if missing:
        raise InvalidPartition(f"reactions {missing} are not covered by any block")


def subnetwork(net: Network, block: Sequence[int]) -> Network:
    """Induced subnetwork; the ambient species list is kept so that rates and
    concentration vectors stay in the parent's coordinates."""
    used = sorted({c for j in block for c in net.reactions[j]})
    pos = {c: k for k, c in enumerate(used)}
    sub = Network(net.species, tuple(net.complexes[c] for c in used),
                  tuple((pos[net.reactions[j][0]], pos[net.reactions[j][1]]) for j in block))
    return validate(sub, allow_orphan_species=True)


def block_species(net: Network, block: Sequence[int]) -> list[str]:
    used = {c for j in block for c in net.reactions[j]}
    return [s for k, s in enumerate(net.species) if any(net.complexes[c][k] for c in used)]


@dataclass(frozen=True)
class BlockNumbers:
    n: int
    l: int
    s: int
    deficiency: int
    weakly_reversible: bool
    complexes: frozenset


def block_numbers(net: Network, block: Sequence[int]) -> BlockNumbers:
    sub = subnetwork(net, block)
    s = len(sub.stoichiometric_basis)
    l = len(sub.linkage_classes)
    return BlockNumbers(sub.n, l, s, sub.n - l - s, sub.is_weakly_reversible,
                        frozenset(c for j in block for c in net.reactions[j]))


@dataclass(frozen=True)
class IndependenceVerdict:
    independent: bool
    s: int
    block_ranks: tuple[int, ...]
    deficiency: int
    block_deficiencies: tuple[int, ...]

    def as_dict(self) -> dict:
        return {"independent": self.independent, "s": self.s,
                "block_s": list(self.block_ranks), "deficiency": self.deficiency,
                "block_deficiencies": list(self.block_deficiencies),
                "deficiency_le_sum": self.deficiency <= sum(self.block_deficiencies)}


def check_independent(net: Network, spec: DecompositionSpec) -> IndependenceVerdict:
    """Independent iff ``s == sum(s_i)``; then ``delta <= sum(delta_i)``."""
    check_partition(net, spec)
    nums = [block_numbers(net, b) for b in spec.blocks]
    s = len(net.stoichiometric_basis)
    deficiency = net.n - len(net.linkage_classes) - s
    v = IndependenceVerdict(s == sum(b.s for b in nums), s, tuple(b.s for b in nums),
                            deficiency, tuple(b.deficiency for b in nums))
    if v.independent and v.deficiency > sum(v.block_deficiencies):
        raise InvariantViolation(
            f"independent decomposition with deficiency {deficiency} > sum "
            f"{sum(v.block_deficiencies)}")
    return v


@dataclass(frozen=True)
class IncidenceVerdict:
    incidence_independent: bool
    incidence_rank: int
    block_incidence_ranks: tuple[int, ...]
    deficiency: int
    block_deficiencies: tuple[int, ...]
    c_decomposition: bool
    weakly_reversible_blocks: tuple[bool, ...]

    def as_dict(self) -> dict:
        return {"incidence_independent": self.incidence_independent,
                "n_minus_l": self.incidence_rank,
                "block_n_minus_l": list(self.block_incidence_ranks),
                "deficiency": self.deficiency,
                "block_deficiencies": list(self.block_deficiencies),
                "deficiency_ge_sum": self.deficiency >= sum(self.block_deficiencies),
                "c_decomposition": self.c_decomposition,
                "weakly_reversible_blocks": list(self.weakly_reversible_blocks)}


def check_incidence_independent(net: Network, spec: DecompositionSpec) -> IncidenceVerdict:
    """Incidence independent iff ``n - l == sum(n_i - l_i)``."""
    check_partition(net, spec)
    nums = [block_numbers(net, b) for b in spec.blocks]
    rank_ia = net.n - len(net.linkage_classes)
    block_ranks = tuple(b.n - b.l for b in nums)
    deficiency = rank_ia - len(net.stoichiometric_basis)
    c_dec = all(not (nums[a].complexes & nums[b].complexes)
                for a in range(len(nums)) for b in range(a + 1, len(nums)))
    v = IncidenceVerdict(rank_ia == sum(block_ranks), rank_ia, block_ranks, deficiency,
                         tuple(b.deficiency for b in nums), c_dec,
                         tuple(b.weakly_reversible for b in nums))
    if v.c_decomposition and not v.incidence_independent:
        raise InvariantViolation("C-decomposition that is not incidence independent")
    if v.incidence_independent and v.deficiency < sum(v.block_deficiencies):
        raise InvariantViolation(
            f"incidence independent decomposition with deficiency {deficiency} < sum "
            f"{sum(v.block_deficiencies)}")
    return v


@dataclass
class SetRelationReport:
    independent: bool
    incidence_independent: bool
    c_decomposition: bool
    checks: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    caveats: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def as_dict(self) -> dict:
        return {"independent": self.independent,
                "incidence_independent": self.incidence_independent,
                "c_decomposition": self.c_decomposition,
                "checks": self.checks, "failures": self.failures,
                "caveats": self.caveats, "ok": self.ok}


def _block_matrix(net: Network, spec: DecompositionSpec, kind: str) -> np.ndarray:
    """Stack per-block copies of N (``kind='f'``) or I_a (``'g'``) over reactions."""
    from .equilibria import float_matrices

    _, Ia, N = float_matrices(net)
    base = N if kind == "f" else Ia
    rows = []
    for block in spec.blocks:
        part = np.zeros_like(base)
        part[:, list(block)] = base[:, list(block)]
        rows.append(part)
    return np.vstack(rows)


def equilibria_set_relations(net: Network, K, spec: DecompositionSpec, *,
                             starts: int = 16, seed: int = 0,
                             tol: float = 1e-9) -> SetRelationReport:
    """Check equilibria-set relations pointwise at solved equilibria.

    (a) common equilibria of all blocks are equilibria of the whole;
    (b) under independence every equilibrium of the whole balances each block;
    (c) under incidence independence every complex-balanced equilibrium of the
        whole is complex balanced in each block;
    (d) for a weakly reversible C-decomposition whose blocks all have
        complex-balanced equilibria, the whole has one.
    """
    from . import equilibria as eq

    ind = check_independent(net, spec)
    inc = check_incidence_independent(net, spec)
    rep = SetRelationReport(ind.independent, inc.incidence_independent, inc.c_decomposition)
    rng = np.random.default_rng(seed)
    Fblk = _block_matrix(net, spec, "f")
    Gblk = _block_matrix(net, spec, "g")

    def scaled(M, x):
        rates = K.kernel.rates_log(np.log(x))
        return float(np.max(np.abs(M @ rates), initial=0.0)) / (1.0 + float(np.max(rates)))

    _, _, N = eq.float_matrices(net)
    _, Ia, _ = eq.float_matrices(net)

    # (a)
    pts = eq.multistart(K.kernel, Fblk, net.m, starts, rng, tol=tol)
    worst = max((scaled(N, x) for x in pts), default=None)
    rep.checks["a_block_equilibria_in_whole"] = {"points": len(pts), "max_residual": worst}
    if worst is not None and worst > tol:
        rep.failures.append("(a) a common block equilibrium is not an equilibrium of the whole")
    # (b)
    if ind.independent:
        pts = eq.multistart(K.kernel, N, net.m, starts, rng, tol=tol)
        worst = max((scaled(Fblk, x) for x in pts), default=None)
        rep.checks["b_whole_equilibria_balance_blocks"] = {
            "points": len(pts), "max_residual": worst,
            "witnesses": [list(map(float, x)) for x in pts[:3]]}
        if worst is not None and worst > tol:
            rep.failures.append("(b) an equilibrium of the whole fails a block")
        if not pts:
            rep.caveats.append("(b) no positive equilibrium found for the whole network")
    # (c)
    def balanced_points():
        return [np.asarray(r.c, dtype=float) for r in
                eq.solve_equilibrium(net, K, mode="complex_balanced", starts=starts, rng=rng,
                                     tol_residual=tol)]

    if inc.incidence_independent:
        pts = balanced_points()
        worst = max((scaled(Gblk, x) for x in pts), default=None)
        rep.checks["c_complex_balanced_blocks"] = {"points": len(pts), "max_residual": worst}
        if worst is not None and worst > tol:
            rep.failures.append("(c) a complex-balanced equilibrium fails a block")
    # (d)
    if inc.c_decomposition and all(inc.weakly_reversible_blocks):
        nonempty = []
        for b, block in enumerate(spec.blocks):
            Gb = np.zeros_like(Ia)
            Gb[:, list(block)] = Ia[:, list(block)]
            nonempty.append(bool(eq.multistart(K.kernel, Gb, net.m, starts, rng, tol=tol)))
        entry = {"blocks_nonempty": nonempty}
        if all(nonempty):
            pts = balanced_points()
            entry["witness"] = list(map(float, pts[0])) if pts else None
            entry["residual"] = scaled(Ia, pts[0]) if pts else None
            if not pts:
                rep.failures.append("(d) blocks complex balanced but no global witness found")
        rep.checks["d_c_decomposition_converse"] = entry
    return rep
