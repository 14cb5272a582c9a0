"""Kinetic order subspaces, kinetic deficiency, T-matrices and kinetic
reactant deficiency of poly-PL systems (all exact)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import linalg
from .errors import InvariantViolation, LayerNotRDK, NonRationalKinetics, NotCycleTerminal
from .kinetics import CanonicalRep, KineticClassification, canonicalize
from .linalg import RationalMatrix
from .network import Network


def _require_exact(rep: CanonicalRep) -> None:
    for layer in rep.layers:
        for _, F in layer:
            if not all(isinstance(f, Fraction) for f in F):
                raise NonRationalKinetics(
                    "structural computations need rational kinetic orders; got floats")


def _row(F) -> str:
    return "(" + ", ".join(str(f) for f in F) + ")"


def _layer_map(net: Network, rep: CanonicalRep, j: int) -> dict[int, tuple]:
    """Reactant complex -> shared kinetic-order row in layer j."""
    out: dict[int, tuple] = {}
    for i, (y, _) in enumerate(net.reactions):
        F = rep.layers[j][i][1]
        if y in out and out[y] != F:
            raise LayerNotRDK(
                j, y,
                f"layer {j}: reactions leaving complex {net.complex_label(y)!r} have "
                f"different kinetic orders {_row(out[y])} and {_row(F)}")
        out.setdefault(y, F)
    return out


@dataclass(frozen=True)
class KineticOrderData:
    kinetic_complexes: tuple[dict, ...]
    layer_bases: tuple[tuple, ...]
    n: int
    l: int
    m: int

    @property
    def h(self) -> int:
        return len(self.layer_bases)

    @property
    def layer_dims(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.layer_bases)

    @property
    def layer_deficiencies(self) -> tuple[int, ...]:
        return tuple(self.n - self.l - s for s in self.layer_dims)

    @property
    def s_tilde(self) -> int:
        return sum(self.layer_dims)

    @property
    def kinetic_deficiency(self) -> int:
        return sum(self.layer_deficiencies)

    @property
    def sum_basis(self) -> list:
        """Basis of the sum of all layer subspaces inside R^m."""
        return linalg.row_space_basis([v for b in self.layer_bases for v in b], dim=self.m)

    @property
    def perp_basis(self) -> list:
        """Basis of the intersection of the layer complements."""
        return linalg.orthogonal_complement(self.sum_basis, self.m)

    def layer_perp_basis(self, j: int) -> list:
        return linalg.orthogonal_complement(list(self.layer_bases[j]), self.m)

    def as_dict(self) -> dict:
        return {
            "layer_dims": list(self.layer_dims),
            "layer_kinetic_deficiencies": list(self.layer_deficiencies),
            "s_tilde": self.s_tilde,
            "kinetic_deficiency": self.kinetic_deficiency,
            "sum_identity_holds": self.kinetic_deficiency == sum(self.layer_deficiencies),
            "layer_bases": [[[str(x) for x in v] for v in b] for b in self.layer_bases],
        }


def kinetic_order_subspaces(net: Network, rep: CanonicalRep,
                            classification: KineticClassification | None = None
                            ) -> KineticOrderData:
    _require_exact(rep)
    reactants = set(net.reactant_complexes)
    missing = sorted({yp for _, yp in net.reactions} - reactants)
    if missing:
        labels = [net.complex_label(c) for c in missing]
        raise NotCycleTerminal(f"product complexes {labels} are not reactant complexes")
    kmaps, bases = [], []
    for j in range(rep.h):
        if classification is not None and not classification.layer_rdk[j]:
            bad = next(v for v in classification.violations
                       if v["layer"] == j and v["kind"] == "kinetic_orders")
            raise LayerNotRDK(j, bad["complex"],
                              f"layer {j} is not reactant-determined at complex "
                              f"{net.complex_label(bad['complex'])!r}")
        ymap = _layer_map(net, rep, j)
        diffs = [tuple(b - a for a, b in zip(ymap[y], ymap[yp])) for y, yp in net.reactions]
        kmaps.append(ymap)
        bases.append(tuple(linalg.row_space_basis(diffs, dim=net.m)))
    return KineticOrderData(tuple(kmaps), tuple(bases), net.n, len(net.linkage_classes), net.m)


def kinetic_deficiency_bounds_check(t, kd: KineticOrderData) -> dict:
    """Kinetic deficiency of the translated system against three bounds."""
    star_rep = canonicalize(t.kinetics)
    star_kd = kinetic_order_subspaces(t.network, star_rep)
    net = t.original
    h, n, l, m = t.h, net.n, len(net.linkage_classes), net.m
    s = len(net.stoichiometric_basis)
    s_star = len(t.network.stoichiometric_basis)
    dstar = star_kd.kinetic_deficiency
    deficiency_star = t.network.n - len(t.network.linkage_classes) - s_star
    clauses = {
        "upper_bound": {"holds": dstar <= h * (n - l) - 1, "bound": h * (n - l) - 1,
                        "applies": True},
        "h_ge_m": {"applies": h >= m, "holds": dstar >= kd.kinetic_deficiency,
                   "kinetic_deficiency": kd.kinetic_deficiency},
        "open_network": {"applies": s == m, "holds": dstar >= deficiency_star,
                         "deficiency_star": deficiency_star},
    }
    return {"kinetic_deficiency_star": dstar, "s_tilde_star": star_kd.s_tilde,
            "s_star": s_star, "s": s, "clauses": clauses,
            "all_hold": all(c["holds"] or not c["applies"] for c in clauses.values())}


@dataclass(frozen=True)
class ReactantDeficiencyData:
    reactant_complexes: tuple[int, ...]
    T: tuple[RationalMatrix, ...]
    T_hat: tuple[RationalMatrix, ...]
    layer_ranks: tuple[int, ...]
    n_r: int

    @property
    def h(self) -> int:
        return len(self.T)

    @property
    def q_hat(self) -> int:
        return sum(self.layer_ranks)

    @property
    def delta_hat(self) -> int:
        return self.h * self.n_r - self.q_hat

    @property
    def layer_delta_hat(self) -> tuple[int, ...]:
        return tuple(self.n_r - q for q in self.layer_ranks)

    def grand_matrix(self) -> RationalMatrix:
        """The block-diagonal matrix of all augmented T-matrices."""
        rows = []
        width = self.h * self.n_r
        for j, B in enumerate(self.T_hat):
            for i in range(B.rows):
                row = [0] * width
                row[j * self.n_r:(j + 1) * self.n_r] = B.row(i)
                rows.append(row)
        return RationalMatrix(rows, cols=width)

    def as_dict(self) -> dict:
        return {"n_r": self.n_r, "layer_q_hat": list(self.layer_ranks),
                "layer_delta_hat": list(self.layer_delta_hat), "q_hat": self.q_hat,
                "delta_hat": self.delta_hat,
                "sum_formula_holds": self.delta_hat == sum(self.layer_delta_hat)}


def t_matrices(net: Network, rep: CanonicalRep) -> ReactantDeficiencyData:
    _require_exact(rep)
    reactants = net.reactant_complexes
    n_r = len(reactants)
    lc = net.linkage_class_of
    L_T = [[Fraction(int(lc[y] == k)) for y in reactants] for k in range(len(net.linkage_classes))]
    Ts, T_hats, ranks = [], [], []
    for j in range(rep.h):
        ymap = _layer_map(net, rep, j)
        T = RationalMatrix.from_columns([ymap[y] for y in reactants], rows=net.m)
        T_hat = RationalMatrix(T.tolist() + L_T, cols=n_r)
        Ts.append(T)
        T_hats.append(T_hat)
        ranks.append(linalg.rank(T_hat))
    data = ReactantDeficiencyData(tuple(reactants), tuple(Ts), tuple(T_hats), tuple(ranks), n_r)
    if data.delta_hat != sum(data.layer_delta_hat):
        raise InvariantViolation("kinetic reactant deficiency is not the sum over layers")
    return data


def is_py_tik(rdd: ReactantDeficiencyData, classification: KineticClassification) -> dict:
    layer_tik = [classification.layer_rdk[j] and d == 0
                 for j, d in enumerate(rdd.layer_delta_hat)]
    flag = classification.is_py_rdk and rdd.delta_hat == 0
    return {"py_tik": flag, "layer_pl_tik": layer_tik,
            "equivalent_by_layers": flag == (classification.is_py_rdk and all(layer_tik))}
