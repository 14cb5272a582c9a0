"""Formation rates, equilibrium solving and complex-balancing constructions.

The solver is a damped Gauss-Newton iteration in log-concentration
coordinates ``u = log x`` (positivity is automatic). Each residual has the
form ``M @ rates(u)``, with ``M`` being N (positive equilibria), I_a (complex
balancing) or a block-diagonal stack of I_a (layer-wise balancing).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import linalg
from .errors import (
    DimensionCapExceeded,
    InvariantViolation,
    LPInfeasible,
    NoConvergence,
    NotWeaklyReversible,
    PreconditionUnmet,
)
from .kinetics import CanonicalRep, MonomialKernel, PolyPLKinetics, canonicalize, evaluate
from .linalg import RationalMatrix
from .network import Network, matrices, orthonormal_basis

TOL_RESIDUAL = 1e-9
TOL_DEDUP = 1e-6
TOL_PARAMETRIZATION = 1e-8
MAX_ITER = 200
MAX_HALVINGS = 60
LOG_BOUND = 60.0
TOL_STEP = 1e-6
MODES = ("positive", "complex_balanced", "PL_complex_balanced")


@lru_cache(maxsize=512)
def float_matrices(net: Network) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    Y, Ia, N = matrices(net)
    conv = lambda M: np.array([[float(x) for x in M.row(i)] for i in range(M.rows)],
                              dtype=float).reshape(M.rows, M.cols)
    return conv(Y), conv(Ia), conv(N)


def species_formation_rate(net: Network, K: PolyPLKinetics, x):
    """``f(x) = N K(x)``; exact tuple when the rates are exact."""
    K.check_network(net)
    rates = evaluate(K, x)
    if isinstance(rates, tuple):
        return matrices(net)[2] @ rates
    return float_matrices(net)[2] @ rates


def complex_formation_rate(net: Network, K: PolyPLKinetics, x):
    """``g(x) = I_a K(x)``; asserts ``Y g(x) == f(x)``."""
    K.check_network(net)
    rates = evaluate(K, x)
    if isinstance(rates, tuple):
        Y, Ia, N = matrices(net)
        g = Ia @ rates
        if Y @ g != N @ rates:
            raise InvariantViolation("Y g(x) != f(x)")
        return g
    Y, Ia, N = float_matrices(net)
    g = Ia @ rates
    f = N @ rates
    if not np.allclose(Y @ g, f, rtol=1e-12, atol=1e-12 * (1 + np.max(np.abs(rates)))):
        raise InvariantViolation("Y g(x) != f(x)")
    return g


@dataclass(frozen=True)
class EquilibriumRecord:
    c: tuple[float, ...]
    f_residual: float
    g_residual: float
    kind: str
    layer_residuals: tuple[float, ...] = ()
    scale: float = 1.0

    def as_dict(self) -> dict:
        return {"c": list(self.c), "f_residual": self.f_residual,
                "g_residual": self.g_residual, "kind": self.kind,
                "layer_residuals": list(self.layer_residuals)}


def _stacked_incidence(Ia: np.ndarray, h: int) -> np.ndarray:
    n, r = Ia.shape
    out = np.zeros((h * n, h * r))
    for j in range(h):
        out[j * n:(j + 1) * n, j * r:(j + 1) * r] = Ia
    return out


def residual_system(net: Network, K: PolyPLKinetics, mode: str,
                    rep: CanonicalRep | None = None) -> tuple[MonomialKernel, np.ndarray]:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    _, Ia, N = float_matrices(net)
    if mode == "positive":
        return K.kernel, N
    if mode == "complex_balanced":
        return K.kernel, Ia
    rep = rep or canonicalize(K)
    return rep.layer_kernel, _stacked_incidence(Ia, rep.h)


def classify_point(net: Network, K: PolyPLKinetics, rep: CanonicalRep, x,
                   tol: float = TOL_RESIDUAL) -> EquilibriumRecord:
    x = np.asarray(x, dtype=float)
    _, Ia, N = float_matrices(net)
    rates = K.kernel.rates_log(np.log(x))
    scale = 1.0 + float(np.max(np.abs(rates)))
    f_res = float(np.max(np.abs(N @ rates), initial=0.0))
    g_res = float(np.max(np.abs(Ia @ rates), initial=0.0))
    layers = rep.layer_rates(x)
    layer_res = tuple(float(np.max(np.abs(Ia @ layers[j]), initial=0.0)) for j in range(rep.h))
    if max(layer_res) <= tol * scale:
        kind = "PL_complex_balanced"
    elif g_res <= tol * scale:
        kind = "complex_balanced"
    elif f_res <= tol * scale:
        kind = "positive"
    else:
        kind = "none"
    return EquilibriumRecord(tuple(float(v) for v in x), f_res, g_res, kind, layer_res, scale)


def newton(kernel: MonomialKernel, M: np.ndarray, u0: np.ndarray, *,
           tol: float = TOL_RESIDUAL, constraint=None,
           max_iter: int = MAX_ITER, max_halvings: int = MAX_HALVINGS):
    """Damped Gauss-Newton on ``M @ rates(u) = 0`` (plus optional linear
    constraint ``W (exp(u) - c0) = 0``).

    Returns ``(u, converged)``. Steps are minimum-norm least-squares
    solutions, so singular or rectangular Jacobians are fine. Convergence
    needs the scaled residual below ``tol`` and the next step below
    ``TOL_STEP`` in log coordinates.
    """
    if constraint is not None:
        W, c0 = constraint
        cscale = 1.0 + float(np.max(np.abs(c0)))

    def system(u):
        rates, D = kernel.rates_and_dlog(u)
        R, J = M @ rates, M @ D
        if constraint is not None:
            x = np.exp(u)
            R = np.concatenate([R, W @ (x - c0)])
            J = np.vstack([J, W * x[None, :]])
        return R, J, rates

    def done(R, rates):
        scale = 1.0 + float(np.max(np.abs(rates)))
        k = M.shape[0]
        ok = float(np.max(np.abs(R[:k]), initial=0.0)) <= tol * scale
        if constraint is not None:
            ok = ok and float(np.max(np.abs(R[k:]), initial=0.0)) <= tol * cscale
        return ok

    k = M.shape[0]

    absM = np.abs(M)

    def weighted(R, J, w):
        # each rate row is scaled by its gross flux, so the step sees relative
        # imbalance even where all rates are tiny (approach to the boundary)
        R, J = R.copy(), J.copy()
        R[:k] *= w
        J[:k] *= w[:, None]
        return R, J

    u = np.array(u0, dtype=float)
    R, J, rates = system(u)
    if not np.all(np.isfinite(R)):
        return u, False
    for _ in range(max_iter):
        w = 1.0 / np.maximum(absM @ rates, 1e-300)
        Rw, Jw = weighted(R, J, w)
        step = np.linalg.lstsq(Jw, -Rw, rcond=None)[0]
        if done(R, rates):
            # near the boundary every rate is tiny and the residual test alone
            # passes far from a root; the Newton step tells them apart
            if np.max(np.abs(step), initial=0.0) <= TOL_STEP:
                Rn, _, _ = system(u + step)
                if np.all(np.isfinite(Rn)) and \
                        np.linalg.norm(weighted(Rn, J, w)[0]) < np.linalg.norm(Rw):
                    u = u + step
                return u, True
        merit = np.linalg.norm(Rw)
        lam = 1.0
        for _ in range(max_halvings):
            un = u + lam * step
            if np.max(np.abs(un)) <= LOG_BOUND:
                Rn, Jn, rn = system(un)
                if np.all(np.isfinite(Rn)) and np.linalg.norm(weighted(Rn, Jn, w)[0]) < merit:
                    break
            lam *= 0.5
        else:
            return u, False
        u, R, J, rates = un, Rn, Jn, rn
    return u, False


def dedup_sorted(points: Sequence[np.ndarray], tol: float = TOL_DEDUP) -> list[np.ndarray]:
    kept: list[np.ndarray] = []
    for x in points:
        if all(np.linalg.norm(x - y) >= tol * max(np.linalg.norm(x), np.linalg.norm(y))
               for y in kept):
            kept.append(x)
    return sorted(kept, key=lambda v: tuple(v))


def class_constraint(net: Network, c0) -> tuple[np.ndarray, np.ndarray]:
    """Rows spanning the complement of S, anchored at ``c0``."""
    perp = linalg.orthogonal_complement(net.stoichiometric_basis, net.m)
    W = orthonormal_basis(perp, net.m).T
    return W, np.asarray(c0, dtype=float)


def multistart(kernel: MonomialKernel, M: np.ndarray, m: int, starts: int,
               rng: np.random.Generator, *, tol: float = TOL_RESIDUAL,
               tol_dedup: float = TOL_DEDUP, constraint=None) -> list[np.ndarray]:
    """Converged points from ``starts`` random log-space starts in [-2, 2]^m."""
    found = []
    for u0 in rng.uniform(-2.0, 2.0, size=(starts, m)):
        u, ok = newton(kernel, M, u0, tol=tol, constraint=constraint)
        if ok:
            found.append(np.exp(u))
    return dedup_sorted(found, tol_dedup)


def complex_factorization(net: Network, K: PolyPLKinetics):
    """Write ``K_q(x) = c_q * psi_y(x)`` with ``y`` the reactant of q.

    Possible when every reaction leaving a complex carries the same term list
    up to a positive factor and the network is weakly reversible. Returns
    ``(psi_kernel, log_kappa)``, where ``psi_kernel`` evaluates psi at the
    reactant complexes and ``kappa`` spans the kernel of the rate-weighted
    Laplacian on each linkage class. Complex balancing then reads
    ``log psi_y(x) = log kappa_y + mu_L`` with one free ``mu`` per linkage
    class. Returns None when the factorization does not exist.
    """
    if not net.is_weakly_reversible:
        return None
    base: dict[int, list] = {}
    factor = []
    for q, (y, _) in enumerate(net.reactions):
        terms = sorted(((t.orders, float(t.coefficient)) for t in K.terms[q]))
        if y not in base:
            base[y] = terms
            factor.append(1.0)
            continue
        ref = base[y]
        if [F for F, _ in ref] != [F for F, _ in terms]:
            return None
        ratios = [a / b for (_, a), (_, b) in zip(terms, ref)]
        if max(ratios) - min(ratios) > 1e-12 * max(ratios):
            return None
        factor.append(ratios[0])
    n = net.n
    A = np.zeros((n, n))
    for q, (y, yp) in enumerate(net.reactions):
        w = float(K.rate_constants[q]) * factor[q]
        A[yp, y] += w
        A[y, y] -= w
    kappa = np.zeros(n)
    for block in net.linkage_classes:
        idx = list(block)
        sub = A[np.ix_(idx, idx)]
        v = np.linalg.svd(sub)[2][-1]
        v = np.abs(v) / np.max(np.abs(v))
        kappa[idx] = v
    reactants = list(net.reactant_complexes)
    items = [(row, a, tuple(float(f) for f in F)) for row, y in enumerate(reactants)
             for F, a in base[y]]
    kernel = MonomialKernel.build(items, len(reactants), net.m)
    lk = np.log(kappa[reactants])
    blocks = np.array([net.linkage_class_of[y] for y in reactants])
    return kernel, lk, blocks, len(net.linkage_classes)


def _factored_newton(kernel, lk, blocks, nl, z0, constraint, tol):
    m = z0.size - nl
    E = np.zeros((lk.size, nl))
    E[np.arange(lk.size), blocks] = 1.0

    def system(z):
        u, mu = z[:m], z[m:]
        psi, D = kernel.rates_and_dlog(u)
        R = np.log(psi) - lk - E @ mu
        J = np.hstack([D / psi[:, None], -E])
        if constraint is not None:
            W, c0 = constraint
            x = np.exp(u)
            scale = 1.0 + float(np.max(np.abs(c0)))
            R = np.concatenate([R, W @ (x - c0) / scale])
            J = np.vstack([J, np.hstack([W * x[None, :], np.zeros((W.shape[0], nl))]) / scale])
        return R, J

    z = z0.copy()
    R, J = system(z)
    for _ in range(MAX_ITER):
        if not np.all(np.isfinite(R)):
            return z, False
        merit = np.linalg.norm(R)
        if merit <= tol:
            return z, True
        step = np.linalg.lstsq(J, -R, rcond=None)[0]
        lam = 1.0
        for _ in range(MAX_HALVINGS):
            zn = z + lam * step
            if np.max(np.abs(zn[:m])) <= LOG_BOUND:
                Rn, Jn = system(zn)
                if np.all(np.isfinite(Rn)) and np.linalg.norm(Rn) < merit:
                    break
            lam *= 0.5
        else:
            return z, False
        z, R, J = zn, Rn, Jn
    return z, bool(np.linalg.norm(R) <= tol)


def _factored_multistart(net, factored, kernel, M, starts, rng, *, tol, tol_dedup, constraint):
    """Solve the log-form complex-balance system, then confirm each candidate
    with the ordinary Newton iteration on ``I_a @ rates``."""
    psi_kernel, lk, blocks, nl = factored
    found = []
    for u0 in rng.uniform(-2.0, 2.0, size=(starts, net.m)):
        z0 = np.concatenate([u0, np.zeros(nl)])
        z, ok = _factored_newton(psi_kernel, lk, blocks, nl, z0, constraint, tol)
        if not ok:
            continue
        u, ok = newton(kernel, M, z[:net.m], tol=tol, constraint=constraint)
        if ok:
            found.append(np.exp(u))
    return dedup_sorted(found, tol_dedup)


def solve_equilibrium(net: Network, K: PolyPLKinetics, k: Sequence | None = None,
                      mode: str = "positive", starts: int = 32, *, seed: int = 0,
                      rng: np.random.Generator | None = None, lex: str = "descending",
                      tol_residual: float = TOL_RESIDUAL, tol_dedup: float = TOL_DEDUP,
                      within_class_of=None, strict: bool = False) -> list[EquilibriumRecord]:
    """Multi-start equilibrium search.

    Args:
        k: optional rate constants replacing those of ``K``.
        mode: ``positive`` (f = 0), ``complex_balanced`` (g = 0) or
            ``PL_complex_balanced`` (every canonical layer balanced).
        within_class_of: restrict to the stoichiometric class of this point.
        strict: raise :class:`NoConvergence` instead of returning ``[]``.

    Returns:
        Deduplicated records sorted by concentration vector.
    """
    K.check_network(net)
    if k is not None:
        K = K.with_rates(k)
    rep = canonicalize(K, lex)
    kernel, M = residual_system(net, K, mode, rep)
    rng = rng if rng is not None else np.random.default_rng(seed)
    constraint = class_constraint(net, within_class_of) if within_class_of is not None else None
    if constraint is not None and constraint[0].shape[0] == 0:
        constraint = None
    factored = complex_factorization(net, K) if mode == "complex_balanced" else None
    if factored is not None:
        pts = _factored_multistart(net, factored, kernel, M, starts, rng, tol=tol_residual,
                                   tol_dedup=tol_dedup, constraint=constraint)
    elif mode == "complex_balanced" and not net.is_weakly_reversible:
        pts = []
    else:
        pts = multistart(kernel, M, net.m, starts, rng, tol=tol_residual, tol_dedup=tol_dedup,
                         constraint=constraint)
    if not pts and strict:
        raise NoConvergence(f"no start out of {starts} converged in mode {mode}")
    records = [classify_point(net, K, rep, x, tol_residual) for x in pts]
    for rec in records:
        if rec.kind in ("complex_balanced", "PL_complex_balanced") and \
                rec.f_residual > 10 * tol_residual * rec.scale * max(1, net.m):
            raise InvariantViolation("complex-balanced point with nonzero species formation rate")
    return records


@dataclass(frozen=True)
class RateAssignment:
    k: tuple
    provenance: str
    flux: tuple = ()

    def as_dict(self) -> dict:
        return {"k": [_jsonable(v) for v in self.k], "provenance": self.provenance,
                "kernel_vector": [_jsonable(v) for v in self.flux]}


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else v.numerator
    return float(v)


def ccb_construct(net: Network, K: PolyPLKinetics, x_star) -> RateAssignment:
    """Rate constants making ``x_star`` a complex-balanced equilibrium.

    A strictly positive ``b`` with ``I_a b = 0`` is found by exact LP (it exists
    exactly when the network is weakly reversible); then
    ``k_q = b_q / I_q(x_star)`` with ``I`` the interaction map.
    """
    K.check_network(net)
    if not net.is_weakly_reversible:
        raise NotWeaklyReversible("conditional complex balancing needs a weakly reversible network")
    _, Ia, _ = matrices(net)
    b = linalg.kernel_signed(Ia, [1] * net.r)
    if b is None:
        raise LPInfeasible("no positive vector in Ker I_a for a weakly reversible network")
    inter = evaluate(K, x_star, interaction=True)
    if isinstance(inter, tuple):
        k = tuple(bq / iq for bq, iq in zip(b, inter))
        if Ia @ tuple(kq * iq for kq, iq in zip(k, inter)) != tuple(Fraction(0) for _ in range(net.n)):
            raise InvariantViolation("constructed rates do not balance x*")
    else:
        k = tuple(float(bq) / iq for bq, iq in zip(b, inter))
        g = float_matrices(net)[1] @ (np.array(k) * inter)
        if np.max(np.abs(g), initial=0.0) > 1e-12 * max(1.0, float(max(b))):
            raise InvariantViolation("constructed rates do not balance x*")
    return RateAssignment(k, "ccb_constructed", tuple(b))


def layer_residual(net: Network, rep: CanonicalRep, x) -> float:
    """Max layer-wise complex formation rate, relative to ``1 + max rate``."""
    _, Ia, _ = float_matrices(net)
    layers = rep.layer_rates(x)
    scale = 1.0 + float(np.max(np.abs(layers.sum(axis=0))))
    return max(float(np.max(np.abs(Ia @ layers[j]), initial=0.0)) for j in range(rep.h)) / scale


def complex_residual(net: Network, rep: CanonicalRep, x) -> float:
    _, Ia, _ = float_matrices(net)
    rates = rep.layer_rates(x).sum(axis=0)
    return float(np.max(np.abs(Ia @ rates), initial=0.0)) / (1.0 + float(np.max(np.abs(rates))))


@dataclass
class ParametrizationReport:
    trials: int
    on_manifold_max: float
    on_manifold_ok: bool
    off_manifold_min: float | None
    off_manifold_ok: bool | None
    perp_dim: int
    layer_checks: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def parametrization_check(net: Network, rep: CanonicalRep, kd, c_star, trials: int = 20, *,
                          seed: int = 0, tol: float = TOL_PARAMETRIZATION,
                          off_threshold: float = 1e-4) -> ParametrizationReport:
    """Sample the log-parametrized set through a layer-balanced point.

    Points ``exp(log c* + v)`` with ``v`` orthogonal to every layer's kinetic
    order subspace must stay layer-balanced; unit moves inside the sum of
    those subspaces are expected to break the balance.
    """
    c_star = np.asarray(getattr(c_star, "c", c_star), dtype=float)
    if layer_residual(net, rep, c_star) > tol:
        raise PreconditionUnmet("starting point is not layer-wise complex balanced")
    rng = np.random.default_rng(seed)
    P = orthonormal_basis(kd.perp_basis, net.m)
    Sb = orthonormal_basis(kd.sum_basis, net.m)
    logc = np.log(c_star)
    on = [0.0]
    for _ in range(trials):
        v = P @ rng.normal(size=P.shape[1]) if P.shape[1] else np.zeros(net.m)
        on.append(layer_residual(net, rep, np.exp(logc + v)))
    off = []
    if Sb.shape[1]:
        for _ in range(trials):
            w = Sb @ rng.normal(size=Sb.shape[1])
            w /= np.linalg.norm(w)
            off.append(layer_residual(net, rep, np.exp(logc + w)))
    layer_checks = []
    for j in range(kd.h):
        Pj = orthonormal_basis(kd.layer_perp_basis(j), net.m)
        hits = 0
        for _ in range(trials):
            v = Pj @ rng.normal(size=Pj.shape[1]) if Pj.shape[1] else np.zeros(net.m)
            hits += complex_residual(net, rep, np.exp(logc + v)) <= tol
        layer_checks.append({"layer": j, "perp_dim": Pj.shape[1],
                             "complex_balanced_fraction": hits / max(trials, 1)})
    return ParametrizationReport(
        trials=trials, on_manifold_max=max(on), on_manifold_ok=max(on) <= tol,
        off_manifold_min=min(off) if off else None,
        off_manifold_ok=(min(off) >= off_threshold) if off else None,
        perp_dim=P.shape[1], layer_checks=layer_checks)


@dataclass(frozen=True)
class SignCriterionVerdict:
    holds: bool
    witness: tuple[int, ...] | None
    patterns_checked: int

    def as_dict(self) -> dict:
        return {"holds": self.holds,
                "witness": list(self.witness) if self.witness else None,
                "patterns_checked": self.patterns_checked}


def sign_criterion(S_basis: Sequence, perp_bases: Sequence[Sequence], m: int,
                   cap: int = 12) -> SignCriterionVerdict:
    """Search for a nonzero sign pattern realized in S and in every given space.

    Patterns are enumerated up to global sign (all spaces are linear), with
    the first nonzero entry positive.
    """
    if m > cap:
        raise DimensionCapExceeded(f"sign enumeration capped at m={cap}, got m={m}")
    checked = 0
    if not S_basis:
        return SignCriterionVerdict(True, None, 0)
    for pattern in itertools.product((0, 1, -1), repeat=m):
        nz = next((s for s in pattern if s), 0)
        if nz != 1:
            continue
        checked += 1
        if linalg.feasible_signed(S_basis, pattern, dim=m) is None:
            continue
        if all(linalg.feasible_signed(list(P), pattern, dim=m) is not None for P in perp_bases):
            return SignCriterionVerdict(False, pattern, checked)
    return SignCriterionVerdict(True, None, checked)


def monostationarity_sign_check(net: Network, kd, cap: int = 12) -> SignCriterionVerdict:
    """Sign criterion for at most one layer-balanced equilibrium per class."""
    perps = [kd.layer_perp_basis(j) for j in range(kd.h)]
    return sign_criterion(net.stoichiometric_basis, perps, net.m, cap)
