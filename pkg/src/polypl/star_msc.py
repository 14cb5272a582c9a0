"""Translation transform of a poly-PL system into a single-term power-law system.

Each canonical layer ``j`` (0-based) is placed on a copy of the network whose
complexes are shifted by ``j * M`` in every species, ``M`` being one more
than the largest stoichiometric coefficient. Shifts cancel in reaction
vectors, so the stoichiometric subspace is unchanged, and the summed layer
rates reproduce the original dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decomposition import DecompositionSpec, check_incidence_independent
from .errors import NonIntegerStoichiometry
from .kinetics import CanonicalRep, PolyPLKinetics, Term
from .network import Network, matrices


@dataclass(frozen=True)
class StarMscTransform:
    translation: int
    h: int
    original: Network
    network: Network
    kinetics: PolyPLKinetics
    replica_map: tuple[tuple[int, ...], ...]

    def replica_complexes(self, j: int) -> set[int]:
        return {c for i in self.replica_map[j] for c in self.network.reactions[i]}


def transform(net: Network, rep: CanonicalRep) -> StarMscTransform:
    if any(not isinstance(x, int) for y in net.complexes for x in y):
        raise NonIntegerStoichiometry("translation needs integer stoichiometric coefficients")
    M = 1 + max(max(y) for y in net.complexes)
    reactions = []
    rates = []
    terms = []
    for j in range(rep.h):
        shift = j * M
        for i, (y, yp) in enumerate(net.reactions):
            reactions.append((tuple(c + shift for c in net.complexes[y]),
                              tuple(c + shift for c in net.complexes[yp])))
            a, F = rep.layers[j][i]
            rates.append(rep.rate_constants[i] * a)
            terms.append((Term(1, F),))
    star = Network.from_reactions(net.species, reactions)
    replica_map = tuple(tuple(j * net.r + i for i in range(net.r)) for j in range(rep.h))
    return StarMscTransform(M, rep.h, net, star, PolyPLKinetics(tuple(rates), tuple(terms)),
                            replica_map)


def replica_decomposition(t: StarMscTransform) -> dict:
    """Partition of the transformed reactions into replicas, with certificate."""
    spec = DecompositionSpec(t.replica_map, name="replicas")
    verdict = check_incidence_independent(t.network, spec)
    sets = [t.replica_complexes(j) for j in range(t.h)]
    disjoint = all(not (sets[a] & sets[b]) for a in range(t.h) for b in range(a + 1, t.h))
    return {
        "decomposition": spec,
        "blocks": [list(b) for b in spec.blocks],
        "c_decomposition": disjoint and verdict.c_decomposition,
        "incidence_independent": verdict.incidence_independent,
        "weakly_reversible_blocks": list(verdict.weakly_reversible_blocks),
    }


def dynamic_equivalence_residual(net: Network, K: PolyPLKinetics, t: StarMscTransform,
                                 x) -> float:
    """Relative max-norm gap between ``N* K*(x)`` and ``N K(x)``."""
    from .equilibria import species_formation_rate

    f = np.asarray(species_formation_rate(net, K, x), dtype=float)
    fs = np.asarray(species_formation_rate(t.network, t.kinetics, x), dtype=float)
    scale = max(1.0, float(np.max(np.abs(K.kernel.rates_log(np.log(np.asarray(x, float)))))))
    return float(np.max(np.abs(f - fs))) / scale
