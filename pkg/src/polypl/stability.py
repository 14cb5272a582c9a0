"""Jacobians of poly-PL systems and linear stability on the stoichiometric subspace."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .equilibria import (
    TOL_DEDUP,
    TOL_RESIDUAL,
    classify_point,
    float_matrices,
    solve_equilibrium,
)
from .errors import ImageNotInS, NonPositiveConcentration
from .kinetics import PolyPLKinetics, canonicalize, classify
from .network import Network, orthonormal_basis

TOL_MARGIN = 1e-8
TOL_IMAGE = 1e-9
FD_STEP = 1e-6


def _point(c) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if np.any(~(c > 0)):
        raise NonPositiveConcentration(f"Jacobian needs a positive point, got {c.tolist()}")
    return c


def jacobian(net: Network, K: PolyPLKinetics, c) -> np.ndarray:
    """Analytic ``J = N dK/dc`` at a positive point."""
    K.check_network(net)
    c = _point(c)
    _, dlog = K.kernel.rates_and_dlog(np.log(c))
    return float_matrices(net)[2] @ (dlog / c[None, :])


def finite_difference_jacobian(net: Network, K: PolyPLKinetics, c,
                               step: float = FD_STEP) -> np.ndarray:
    """Central differences with step ``step * c_s`` in coordinate s."""
    c = _point(c)
    N = float_matrices(net)[2]
    f = lambda x: N @ K.kernel.rates_log(np.log(x))
    J = np.empty((net.m, net.m))
    for s in range(net.m):
        e = np.zeros(net.m)
        e[s] = step * c[s]
        J[:, s] = (f(c + e) - f(c - e)) / (2 * e[s])
    return J


@dataclass(frozen=True)
class StabilityVerdict:
    eigenvalues: tuple[complex, ...]
    classification: str
    restricted: np.ndarray
    basis: np.ndarray

    def as_dict(self) -> dict:
        return {"eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
                "classification": self.classification,
                "restricted_matrix": self.restricted.tolist(),
                "basis": self.basis.tolist()}


def classify_spectrum(eigenvalues, tol_margin: float = TOL_MARGIN) -> str:
    re = [z.real for z in eigenvalues]
    if any(x > tol_margin for x in re):
        return "unstable"
    if all(x < -tol_margin for x in re):
        return "linearly_stable"
    return "marginal"


def restrict_and_classify(J, S_basis, *, basis: np.ndarray | None = None,
                          tol_margin: float = TOL_MARGIN) -> StabilityVerdict:
    """Eigenvalues of ``J`` restricted to S, via ``B^T J B`` with B orthonormal.

    ``basis`` may supply a specific orthonormal basis (its columns span S).
    """
    J = np.asarray(J, dtype=float)
    m = J.shape[0]
    B = orthonormal_basis(S_basis, m) if basis is None else np.asarray(basis, dtype=float)
    P = B @ B.T
    leak = float(np.linalg.norm((np.eye(m) - P) @ J))
    if leak > TOL_IMAGE * max(1.0, float(np.linalg.norm(J))):
        raise ImageNotInS(f"image of J leaves S (off-subspace norm {leak:.3e})")
    M = B.T @ J @ B
    eig = tuple(complex(z) for z in np.linalg.eigvals(M)) if M.size else ()
    eig = tuple(sorted(eig, key=lambda z: (z.real, z.imag)))
    return StabilityVerdict(eig, classify_spectrum(eig, tol_margin), M, B)


@dataclass
class UniquenessReport:
    status: str
    points: list = field(default_factory=list)
    max_distance: float = 0.0
    notes: list = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return self.status == "failed"

    def as_dict(self) -> dict:
        return {"status": self.status, "points": [list(map(float, p)) for p in self.points],
                "max_distance": self.max_distance, "notes": list(self.notes)}


def uniqueness_from_stability(net: Network, K: PolyPLKinetics, verdict: StabilityVerdict,
                              c_star, *, starts: int = 32, seed: int = 0,
                              tol_residual: float = TOL_RESIDUAL,
                              tol_dedup: float = TOL_DEDUP) -> UniquenessReport:
    """Search the stoichiometric class of ``c_star`` for a second equilibrium.

    Runs only on weakly reversible PY-RDK systems, when ``c_star`` is
    layer-balanced and ``verdict`` is linearly stable; otherwise reports
    ``skipped``. A second layer-balanced point in
    the class is reported as ``failed``; other extra equilibria become notes.
    """
    c_star = np.asarray(c_star, dtype=float)
    rep = canonicalize(K)
    if not net.is_weakly_reversible:
        return UniquenessReport("skipped", notes=["network is not weakly reversible"])
    kinetics_class = classify(net, rep)
    if not kinetics_class.is_py_rdk:
        return UniquenessReport("skipped", notes=[f"kinetics is {kinetics_class.overall}, "
                                                  "not PY-RDK"])
    rec = classify_point(net, K, rep, c_star, tol_residual)
    if rec.kind != "PL_complex_balanced":
        return UniquenessReport("skipped", notes=["point is not PL-complex balanced"])
    if verdict.classification != "linearly_stable":
        return UniquenessReport("skipped", notes=[f"verdict is {verdict.classification}"])
    found = solve_equilibrium(net, K, mode="positive", starts=starts, seed=seed,
                              tol_residual=tol_residual, tol_dedup=tol_dedup,
                              within_class_of=c_star)
    pts = [np.array(r.c) for r in found]
    report = UniquenessReport("passed", pts)
    for r, x in zip(found, pts):
        d = float(np.linalg.norm(x - c_star) / max(1.0, np.linalg.norm(c_star)))
        report.max_distance = max(report.max_distance, d)
        if d > tol_dedup:
            if r.kind == "PL_complex_balanced":
                report.status = "failed"
                report.notes.append(f"second PL-complex-balanced point {x.tolist()}")
            else:
                report.notes.append(f"additional equilibrium of kind {r.kind}: {x.tolist()}")
    return report


@dataclass(frozen=True)
class FalsifierResult:
    counterexample: np.ndarray | None
    trials: int
    seed: int
    max_real_part: float

    def as_dict(self) -> dict:
        return {"method": "randomized falsification (not a proof)",
                "counterexample_diagonal": None if self.counterexample is None
                else self.counterexample.tolist(),
                "trials": self.trials, "seed": self.seed,
                "max_real_part": self.max_real_part,
                "message": "counterexample found" if self.counterexample is not None
                else f"no counterexample in {self.trials} trials"}


def d_stability_falsifier(A, S_basis: Sequence, trials: int = 200, *, seed: int = 0,
                          tol: float = TOL_MARGIN) -> FalsifierResult:
    """Random positive diagonal ``D`` (log-uniform in [1e-2, 1e2]) with an
    eigenvalue of ``(A D)|_S`` having positive real part. D = I is tried first."""
    A = np.asarray(A, dtype=float)
    m = A.shape[0]
    B = orthonormal_basis(S_basis, m)
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for t in range(trials):
        d = np.ones(m) if t == 0 else np.exp(rng.uniform(np.log(1e-2), np.log(1e2), m))
        M = B.T @ (A * d[None, :]) @ B
        if not M.size:
            break
        top = float(np.max(np.linalg.eigvals(M).real))
        worst = max(worst, top)
        if top > tol:
            return FalsifierResult(d, t + 1, seed, worst)
    return FalsifierResult(None, trials, seed, float(worst))
