"""Temporal prey-predator model with hunting cooperation.

Reaction terms, coexistence equilibria (roots of a cubic), linear stability,
and the transcritical / saddle-node / Hopf / Bogdanov-Takens thresholds.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, NumericalError

NONHYPERBOLIC_TOL = 1e-10   # |trace| or |det| below this -> NonHyperbolic
ROOT_MERGE_TOL = 1e-9       # cubic roots closer than this count as a tangency
COMPLEX_PAIR_TOL = 1e-4     # conjugate pairs this close to the axis get a tangency check
DEGENERATE_COEF_TOL = 1e-14  # leading polynomial coefficients below this are dropped
NEWTON_RESIDUAL_TOL = 1e-14
FIXED_POINT_TOL = 1e-12
FIXED_POINT_MAX_ITER = 200


@dataclass(frozen=True)
class ModelParams:
    """The five scalars defining a model instance.

    eta: per-capita prey growth rate, kappa: carrying capacity,
    alpha: hunting cooperation, d: predator diffusion ratio,
    sigma: Gaussian kernel width (0 recovers the local model).
    """

    eta: float
    kappa: float
    alpha: float
    d: float = 1.0
    sigma: float = 0.0

    def __post_init__(self):
        if not (self.eta > 0 and self.kappa > 0 and self.alpha > 0):
            raise ConfigError("eta, kappa and alpha must be strictly positive")
        if not self.d > 0:
            raise ConfigError("d must be strictly positive")
        if self.sigma < 0:
            raise ConfigError("sigma must be non-negative")


class EquilibriumKind(Enum):
    TRIVIAL = "Trivial"
    AXIAL = "Axial"
    COEXISTENCE = "Coexistence"


class Stability(Enum):
    STABLE = "Stable"
    SADDLE = "Saddle"
    UNSTABLE = "Unstable"
    NONHYPERBOLIC = "NonHyperbolic"


@dataclass(frozen=True)
class Equilibrium:
    u_star: float
    v_star: float
    kind: EquilibriumKind
    stability: Optional[Stability] = None


@dataclass(frozen=True)
class JacobianSummary:
    a11: float
    a12: float
    a21: float
    a22: float
    trace: float
    det: float


@dataclass(frozen=True)
class TemporalThresholds:
    """Bifurcation thresholds for one (kappa, alpha) slice; absent means infeasible."""

    kappa_tc: float = 1.0
    eta_sn: Optional[float] = None
    alpha_h: Optional[float] = None
    bt: Optional[tuple[float, float]] = None  # (alpha_bt, eta_bt)


def reaction_rates(u: float, v: float, p: ModelParams) -> tuple[float, float]:
    """Reaction terms (du/dt, dv/dt) of the well-mixed system."""
    predation = (1.0 + p.alpha * v) * u * v
    du = p.eta * u * (1.0 - u / p.kappa) - predation
    dv = predation - v
    return du, dv


def cubic_coefficients(p: ModelParams) -> np.ndarray:
    """Coefficients (descending) of the coexistence polynomial in u."""
    return np.array([
        p.alpha * p.eta,
        -p.alpha * p.kappa * p.eta,
        -p.kappa,
        p.kappa,
    ])


def _polish_root(coefs: np.ndarray, x: float) -> float:
    dcoefs = np.polyder(coefs)
    for _ in range(60):
        r = np.polyval(coefs, x)
        if abs(r) <= NEWTON_RESIDUAL_TOL:
            break
        dr = np.polyval(dcoefs, x)
        if dr == 0.0:
            break
        x -= r / dr
    return x


def _tangency_candidates(coefs: np.ndarray, roots: np.ndarray, p: ModelParams) -> list[float]:
    """A fold's double root appears as a conjugate pair hugging the real axis.

    For each such pair, locate the nearby extremum of the polynomial (Newton on
    the derivative) and accept it only if it passes the equilibrium residual
    bound; genuinely complex pairs fail that bound and are discarded.
    """
    out = []
    dcoefs = np.polyder(coefs)
    d2coefs = np.polyder(dcoefs)
    for r in roots:
        if not 0.0 < r.imag <= COMPLEX_PAIR_TOL * max(1.0, abs(r)):
            continue
        u = r.real
        for _ in range(60):
            d1 = np.polyval(dcoefs, u)
            d2 = np.polyval(d2coefs, u)
            if d2 == 0.0 or abs(d1) < 1e-16:
                break
            u -= d1 / d2
        if not 0.0 < u < 1.0:
            continue
        # reaction residual of the candidate: |N1| = |phi(u)| / (alpha kappa u)
        if abs(np.polyval(coefs, u)) <= 1e-10 * p.alpha * p.kappa * u:
            out.append(float(u))
    return out


def coexistence_equilibria(p: ModelParams) -> list[Equilibrium]:
    """All coexistence states (u*, v*) with 0 < u* < 1, classified.

    Returns 0, 1 or 2 points; a tangency (double root) is reported once and
    flagged NonHyperbolic.
    """
    coefs = cubic_coefficients(p)
    while len(coefs) > 1 and abs(coefs[0]) < DEGENERATE_COEF_TOL:
        coefs = coefs[1:]
    if len(coefs) <= 1:
        return []
    roots = np.roots(coefs)  # companion-matrix eigenvalues
    real = [float(_polish_root(coefs, r.real)) for r in roots
            if abs(r.imag) <= ROOT_MERGE_TOL * max(1.0, abs(r))]
    tangent = [t for t in _tangency_candidates(coefs, roots, p) if 0.0 < t < 1.0]
    real = sorted(r for r in real if 0.0 < r < 1.0)

    merged: list[tuple[float, bool]] = []
    for r in real:
        if merged and abs(r - merged[-1][0]) <= ROOT_MERGE_TOL:
            merged[-1] = ((merged[-1][0] + r) / 2.0, True)
        else:
            merged.append((r, False))
    for t in tangent:
        if not any(abs(t - r) <= ROOT_MERGE_TOL for r, _ in merged):
            merged.append((t, True))
    merged.sort()
    if len(merged) > 2:
        raise NumericalError(f"found {len(merged)} coexistence roots; at most two can exist")

    out = []
    for u_star, tangent in merged:
        v_star = (1.0 / p.alpha) * (1.0 / u_star - 1.0)
        e = Equilibrium(u_star, v_star, EquilibriumKind.COEXISTENCE)
        stab, _ = classify_equilibrium(e, p)
        if tangent:
            stab = Stability.NONHYPERBOLIC
        out.append(Equilibrium(u_star, v_star, EquilibriumKind.COEXISTENCE, stab))
    return out


def stable_coexistence(p: ModelParams) -> Equilibrium:
    """The unique stable coexistence point; raises if none is stable."""
    stable = [e for e in coexistence_equilibria(p) if e.stability is Stability.STABLE]
    if not stable:
        raise NumericalError("no stable coexistence equilibrium for these parameters")
    if len(stable) > 1:
        raise NumericalError("ambiguous: more than one stable coexistence equilibrium")
    return stable[0]


def jacobian_summary(e: Equilibrium, p: ModelParams) -> JacobianSummary:
    """Community-matrix entries at an equilibrium, with trace and determinant."""
    if e.kind is EquilibriumKind.COEXISTENCE:
        u, v = e.u_star, e.v_star
        a11 = -p.eta * u / p.kappa
        a12 = -(1.0 + 2.0 * p.alpha * v) * u
        a21 = (1.0 + p.alpha * v) * v
        a22 = p.alpha * u * v
    else:
        u, v = e.u_star, e.v_star
        a11 = p.eta * (1.0 - 2.0 * u / p.kappa) - (1.0 + p.alpha * v) * v
        a12 = -(1.0 + 2.0 * p.alpha * v) * u
        a21 = (1.0 + p.alpha * v) * v
        a22 = (1.0 + 2.0 * p.alpha * v) * u - 1.0
    return JacobianSummary(a11, a12, a21, a22, a11 + a22, a11 * a22 - a12 * a21)


def classify_equilibrium(e: Equilibrium, p: ModelParams) -> tuple[Stability, JacobianSummary]:
    """Stable iff trace < 0 and det > 0; Saddle iff det < 0.

    det < 0 always means a hyperbolic saddle; the trace tolerance only
    matters on the det > 0 side where a zero trace is a center candidate.
    """
    js = jacobian_summary(e, p)
    if abs(js.det) < NONHYPERBOLIC_TOL:
        return Stability.NONHYPERBOLIC, js
    if js.det < 0.0:
        return Stability.SADDLE, js
    if abs(js.trace) < NONHYPERBOLIC_TOL:
        return Stability.NONHYPERBOLIC, js
    if js.trace < 0.0:
        return Stability.STABLE, js
    return Stability.UNSTABLE, js


def trivial_equilibrium() -> Equilibrium:
    return Equilibrium(0.0, 0.0, EquilibriumKind.TRIVIAL)


def axial_equilibrium(p: ModelParams) -> Equilibrium:
    return Equilibrium(p.kappa, 0.0, EquilibriumKind.AXIAL)


def saddle_node_threshold(p: ModelParams, u_star: float) -> float:
    """Growth rate at which the fold with tangency abscissa u_star occurs.

    u_star = 1 (the feasibility boundary of the predator component) is allowed.
    """
    if not 0.0 < u_star <= 1.0:
        raise ConfigError("u_star must lie in (0, 1]")
    return p.kappa * (2.0 - u_star) / (p.alpha * u_star**3)


def _fold_abscissa(kappa: float) -> Optional[float]:
    # Tangency of the two non-trivial nullclines: 2u^2 - (3+kappa)u + 2kappa = 0.
    disc = (3.0 + kappa) ** 2 - 16.0 * kappa
    if disc < 0.0:
        return None
    u = ((3.0 + kappa) - np.sqrt(disc)) / 4.0
    if not 0.0 < u < 1.0:
        return None
    return float(u)


def solve_saddle_node(p: ModelParams) -> tuple[float, Equilibrium]:
    """Self-consistent fold: eta_sn plus the tangent equilibrium.

    Damped fixed-point iteration on the tangency abscissa, with a bisection
    fallback on the cubic discriminant along an eta sweep.
    """
    u = 0.5
    converged = False
    for _ in range(FIXED_POINT_MAX_ITER):
        u_new = 0.5 * u + 0.5 * (2.0 * u * u + 2.0 * p.kappa) / (3.0 + p.kappa)
        if abs(u_new - u) < FIXED_POINT_TOL:
            u = u_new
            converged = True
            break
        u = u_new
    if not converged or not 0.0 < u < 1.0:
        u_b = _bisect_fold(p)
        if u_b is None:
            raise NumericalError("no saddle-node point: fold abscissa infeasible")
        u = u_b
    eta_sn = saddle_node_threshold(p, u)
    v = (1.0 / p.alpha) * (1.0 / u - 1.0)
    eq = Equilibrium(u, v, EquilibriumKind.COEXISTENCE, Stability.NONHYPERBOLIC)
    return eta_sn, eq


def _bisect_fold(p: ModelParams) -> Optional[float]:
    # Bracket the eta where the pair of coexistence roots appears/disappears,
    # then return the merged-root abscissa at the fold.
    def n_roots(eta):
        q = ModelParams(eta, p.kappa, p.alpha, p.d, p.sigma)
        return len(coexistence_equilibria(q))

    lo, hi = 1e-6, 1e6
    if n_roots(lo) == n_roots(hi):
        return None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if n_roots(mid) == n_roots(lo):
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13 * max(1.0, hi):
            break
    q = ModelParams(hi, p.kappa, p.alpha, p.d, p.sigma)
    eqs = coexistence_equilibria(q)
    if not eqs:
        q = ModelParams(lo, p.kappa, p.alpha, p.d, p.sigma)
        eqs = coexistence_equilibria(q)
    if len(eqs) == 2:
        return 0.5 * (eqs[0].u_star + eqs[1].u_star)
    return eqs[0].u_star if eqs else None


def _branch_root(p: ModelParams, u_prev: float) -> Optional[float]:
    eqs = coexistence_equilibria(p)
    if not eqs:
        return None
    return min((e.u_star for e in eqs), key=lambda u: abs(u - u_prev))


def hopf_threshold(p: ModelParams, e: Equilibrium) -> float:
    """Cooperation level at which the branch through e loses stability via Hopf.

    Solves trace(J*) = 0 self-consistently in alpha by damped fixed-point
    iteration (alpha <- eta / (kappa v*)), falling back to bisection on the
    trace along an alpha sweep.  Requires det(J*) > 0 at the threshold.
    """
    if e.kind is not EquilibriumKind.COEXISTENCE:
        raise ConfigError("Hopf threshold requires a coexistence equilibrium")
    if jacobian_summary(e, p).det <= 0.0:
        raise NumericalError("Hopf threshold requires det(J*) > 0 at the starting point")
    alpha = p.alpha
    u = e.u_star
    converged = False
    for _ in range(FIXED_POINT_MAX_ITER):
        q = ModelParams(p.eta, p.kappa, alpha, p.d, p.sigma)
        u_new = _branch_root(q, u)
        if u_new is None:
            converged = False
            break
        u = u_new
        v = (1.0 / alpha) * (1.0 / u - 1.0)
        alpha_new = 0.5 * alpha + 0.5 * p.eta / (p.kappa * v)
        if abs(alpha_new - alpha) < FIXED_POINT_TOL * max(1.0, abs(alpha)):
            alpha = alpha_new
            converged = True
            break
        alpha = alpha_new

    if not converged:
        alpha = _bisect_trace(p, e)

    q = ModelParams(p.eta, p.kappa, alpha, p.d, p.sigma)
    u_fin = _branch_root(q, u if converged else e.u_star)
    if u_fin is None:
        raise NumericalError("Hopf iteration left the coexistence region")
    v_fin = (1.0 / alpha) * (1.0 / u_fin - 1.0)
    js = jacobian_summary(
        Equilibrium(u_fin, v_fin, EquilibriumKind.COEXISTENCE), q)
    if js.det <= 0.0:
        raise NumericalError("Hopf threshold rejected: det(J*) <= 0 at trace zero")
    return alpha


def _trace_on_branch(p: ModelParams, alpha: float, u_prev: float) -> Optional[float]:
    q = ModelParams(p.eta, p.kappa, alpha, p.d, p.sigma)
    u = _branch_root(q, u_prev)
    if u is None:
        return None
    v = (1.0 / alpha) * (1.0 / u - 1.0)
    return jacobian_summary(Equilibrium(u, v, EquilibriumKind.COEXISTENCE), q).trace


def _bisect_trace(p: ModelParams, e: Equilibrium) -> float:
    alphas = np.geomspace(p.alpha / 50.0, p.alpha * 50.0, 400)
    u_prev = e.u_star
    prev = None
    bracket = None
    for a in alphas:
        tr = _trace_on_branch(p, a, u_prev)
        if tr is None:
            prev = None
            continue
        if prev is not None and prev[1] * tr < 0.0:
            bracket = (prev[0], a)
            break
        prev = (a, tr)
    if bracket is None:
        raise NumericalError("no trace sign change found along the alpha sweep")
    lo, hi = bracket
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        tm = _trace_on_branch(p, mid, u_prev)
        tl = _trace_on_branch(p, lo, u_prev)
        if tm is None or tl is None:
            raise NumericalError("coexistence branch lost during trace bisection")
        if tl * tm <= 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo < FIXED_POINT_TOL * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def bt_point(p: ModelParams) -> tuple[float, float]:
    """Bogdanov-Takens point (alpha_bt, eta_bt): trace and det vanish together."""
    u = _fold_abscissa(p.kappa)
    if u is None:
        raise NumericalError("no fold abscissa: Bogdanov-Takens point infeasible")
    eta_bt = p.kappa * (1.0 - u) / u          # trace = 0 at the fold abscissa
    alpha_bt = p.kappa * (2.0 - u) / (eta_bt * u**3)
    if eta_bt <= 0.0 or alpha_bt <= 0.0:
        raise NumericalError("Bogdanov-Takens point outside the positive cone")
    return alpha_bt, eta_bt


def solve_hopf(eta: float, kappa: float) -> Optional[tuple[float, float, float]]:
    """Hopf threshold (alpha_h, u_h, v_h) at fixed (eta, kappa), if feasible.

    trace(J*) = 0 forces u* = kappa/(kappa+eta); alpha follows from the
    coexistence cubic.
    """
    if kappa + eta <= 1.0:
        return None
    u = kappa / (kappa + eta)
    denom = eta * u * u * (u - kappa)
    if denom == 0.0:
        return None
    alpha = kappa * (u - 1.0) / denom
    if alpha <= 0.0:
        return None
    v = (1.0 / alpha) * (1.0 / u - 1.0)
    return alpha, u, v


def temporal_thresholds(p: ModelParams) -> TemporalThresholds:
    """All temporal bifurcation thresholds reachable from p."""
    eta_sn = None
    bt = None
    if _fold_abscissa(p.kappa) is not None:
        eta_sn, _ = solve_saddle_node(p)
        try:
            bt = bt_point(p)
        except NumericalError:
            bt = None
    alpha_h = None
    hopf = solve_hopf(p.eta, p.kappa)
    if hopf is not None:
        alpha, u, v = hopf
        q = ModelParams(p.eta, p.kappa, alpha, p.d, p.sigma)
        js = jacobian_summary(Equilibrium(u, v, EquilibriumKind.COEXISTENCE), q)
        if js.det > 0.0:
            alpha_h = alpha
    return TemporalThresholds(1.0, eta_sn, alpha_h, bt)


@dataclass(frozen=True)
class SurfacePoint:
    eta: float
    kappa: float
    alpha: float
    surface: str  # TC, SN, HB or BT
    u_star: float
    v_star: float


@dataclass
class SurfaceScan:
    points: list[SurfacePoint] = field(default_factory=list)
    skipped: int = 0


def bifurcation_surface_scan(
    eta_range: tuple[float, float],
    kappa_range: tuple[float, float],
    alpha_range: tuple[float, float],
    n: int = 20,
) -> SurfaceScan:
    """Sample the TC plane, SN and HB surfaces and the BT curve over a box.

    Output ordering is lexicographic in grid indices regardless of evaluation
    order; infeasible cells are skipped and counted.
    """
    etas = np.linspace(*eta_range, n)
    kappas = np.linspace(*kappa_range, n)
    alphas = np.linspace(*alpha_range, n)
    scan = SurfaceScan()

    if kappa_range[0] <= 1.0 <= kappa_range[1]:
        for eta in etas:
            for alpha in alphas:
                scan.points.append(SurfacePoint(eta, 1.0, alpha, "TC", 1.0, 0.0))

    for kappa in kappas:
        u_f = _fold_abscissa(kappa)
        for alpha in alphas:
            if u_f is None:
                scan.skipped += 1
                continue
            eta_sn = kappa * (2.0 - u_f) / (alpha * u_f**3)
            if not eta_range[0] <= eta_sn <= eta_range[1]:
                scan.skipped += 1
                continue
            v_f = (1.0 / alpha) * (1.0 / u_f - 1.0)
            scan.points.append(SurfacePoint(eta_sn, kappa, alpha, "SN", u_f, v_f))

    for eta in etas:
        for kappa in kappas:
            hopf = solve_hopf(eta, kappa)
            if hopf is None:
                scan.skipped += 1
                continue
            alpha_h, u_h, v_h = hopf
            q = ModelParams(eta, kappa, alpha_h)
            js = jacobian_summary(Equilibrium(u_h, v_h, EquilibriumKind.COEXISTENCE), q)
            if js.det <= 0.0 or not alpha_range[0] <= alpha_h <= alpha_range[1]:
                scan.skipped += 1
                continue
            scan.points.append(SurfacePoint(eta, kappa, alpha_h, "HB", u_h, v_h))

    for kappa in kappas:
        u_f = _fold_abscissa(kappa)
        if u_f is None or u_f >= 1.0:
            scan.skipped += 1
            continue
        eta_bt = kappa * (1.0 - u_f) / u_f
        alpha_bt = kappa * (2.0 - u_f) / (eta_bt * u_f**3)
        if not (eta_range[0] <= eta_bt <= eta_range[1]
                and alpha_range[0] <= alpha_bt <= alpha_range[1]):
            scan.skipped += 1
            continue
        v_f = (1.0 / alpha_bt) * (1.0 / u_f - 1.0)
        scan.points.append(SurfacePoint(eta_bt, kappa, alpha_bt, "BT", u_f, v_f))

    return scan


def nullclines(p: ModelParams, n: int = 200) -> np.ndarray:
    """Sampled non-trivial nullclines u = n1(v) and u = n2(v); rows (v, n1, n2)."""
    disc = 1.0 + 4.0 * p.alpha * p.eta
    v_max = (-1.0 + np.sqrt(disc)) / (2.0 * p.alpha)  # where n1 reaches u = 0
    v = np.linspace(0.0, v_max, n)
    n1 = (p.kappa / p.eta) * (p.eta - (1.0 + p.alpha * v) * v)
    n2 = 1.0 / (1.0 + p.alpha * v)
    return np.column_stack([v, n1, n2])
