"""Amplitude equations for the three resonant modes near the Turing threshold.

Computes the eigenvector pair, the adjoint pair, the quadratic and cubic
resonance coefficients, the relaxation time and the mode-interaction
coefficients (tau0, h0, m1, m2), the branch-selection thresholds mu1..mu4,
and integrates the coupled phase/amplitude system.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .dispersion import TuringPoint, kernel_fourier, linearization
from .errors import NumericalError
from .model import Equilibrium, ModelParams

ADJUGATE_DET_GUARD = 1e-12
PHASE_FREEZE_TOL = 1e-12     # below this any mode amplitude freezes the phase equation
ODE_RTOL = 1e-9
ODE_ATOL = 1e-12
CONVERGENCE_RATE_TOL = 1e-10  # max state change per unit time at a fixed point


class PatternTarget(Enum):
    PREY = "PreyComponent"
    PREDATOR = "PredatorComponent"


class BranchKind(Enum):
    HOMOGENEOUS = "Homogeneous"
    STRIPE = "Stripe"
    HEX_H0 = "HexH0"
    HEX_HPI = "HexHpi"
    MIXED = "Mixed"


@dataclass(frozen=True)
class WnaCoefficients:
    """Everything the amplitude equations need, for one (params, sigma) instance."""

    f1: float
    g1: float
    f2: float
    g2: float
    F1: float
    G1: float
    xi_u0: float
    xi_v0: float
    xi_u1: float
    xi_v1: float
    xi_u2: float
    xi_v2: float
    F2: float
    G2: float
    F3: float
    G3: float
    F4: float
    G4: float
    tau0: float
    h0: float
    m1: float
    m2: float
    mu1: float
    mu2: float
    mu3: float
    mu4: float
    d1: float
    d2: float
    d3: float
    d4: float
    target: PatternTarget
    k_t: float
    d_t: float
    sigma: float


@dataclass(frozen=True)
class AmplitudeState:
    rho1: float
    rho2: float
    rho3: float
    phi_total: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.rho1, self.rho2, self.rho3, self.phi_total])


@dataclass(frozen=True)
class PatternBranch:
    kind: BranchKind
    amplitude: float | tuple[float, float, float]
    stable: bool
    mu: float
    mu_range: Optional[tuple[float, float]]  # stability window in mu, None if never stable


@dataclass
class ModeTrajectory:
    times: np.ndarray
    states: np.ndarray  # rows (rho1, rho2, rho3, Phi)
    converged: bool

    @property
    def final(self) -> AmplitudeState:
        r = self.states[-1]
        return AmplitudeState(r[0], r[1], r[2], r[3])


def _solve2(m11: float, m12: float, m21: float, m22: float,
            b1: float, b2: float) -> tuple[float, float]:
    # Explicit adjugate inverse; the systems are far from singular away from
    # secondary resonances, guarded anyway.
    det = m11 * m22 - m12 * m21
    if abs(det) < ADJUGATE_DET_GUARD:
        raise NumericalError(f"near-singular 2x2 system in coefficient assembly (det={det:.2e})")
    return (m22 * b1 - m12 * b2) / det, (m11 * b2 - m21 * b1) / det


def wna_coefficients(p: ModelParams, e: Equilibrium, tp: TuringPoint,
                     target: PatternTarget = PatternTarget.PREY) -> WnaCoefficients:
    """Full coefficient set of the three-mode amplitude equations at (p, e, tp)."""
    lin = linearization(p, e)
    u, v = e.u_star, e.v_star
    k2 = tp.k_t**2
    d_t = tp.d_t
    w = lin.nonlocal_weight
    # Kernel transform at the resonant wavenumbers k_T, 2 k_T and sqrt(3) k_T.
    E1 = float(kernel_fourier(tp.k_t, tp.sigma))
    E4 = float(kernel_fourier(2.0 * tp.k_t, tp.sigma))
    E3 = float(kernel_fourier(math.sqrt(3.0) * tp.k_t, tp.sigma))

    f10, f01, g10, g01 = lin.a11, lin.a12, lin.a21, lin.a22
    B = f10 - w * E1 - k2
    fc = math.hypot(B, f01)
    gc = math.hypot(B, g10)
    if fc < ADJUGATE_DET_GUARD or gc < ADJUGATE_DET_GUARD:
        raise NumericalError("eigenvector normalizer vanished at the Turing point")
    f1, g1 = -f01 / fc, B / fc
    f2, g2 = -g10 / gc, B / gc

    # Reaction derivative table at (u*, v*); all other cubic derivatives vanish.
    f20, f11, f02 = 0.0, -(1.0 + 2.0 * p.alpha * v), -p.alpha * u
    g20, g11, g02 = 0.0, (1.0 + 2.0 * p.alpha * v), p.alpha * u
    f30 = f21 = f03 = g30 = g21 = g03 = 0.0
    f12, g12 = -p.alpha, p.alpha

    ek = p.eta / p.kappa
    F1 = f20 * f1**2 + f11 * f1 * g1 + f02 * g1**2 - ek * f1**2 * E1
    G1 = g20 * f1**2 + g11 * f1 * g1 + g02 * g1**2

    # Second-order solution coefficients: zero, double and difference modes.
    xi_u0, xi_v0 = _solve2(f10 - w, f01, g10, g01, -2.0 * F1, -2.0 * G1)
    xi_u1, xi_v1 = _solve2(f10 - 4.0 * k2 - w * E4, f01,
                           g10, g01 - 4.0 * d_t * k2, -F1, -G1)
    xi_u2, xi_v2 = _solve2(f10 - 3.0 * k2 - w * E3, f01,
                           g10, g01 - 3.0 * d_t * k2, -2.0 * F1, -2.0 * G1)

    F4 = f1**3 * f30 + f1**2 * g1 * f21 + f1 * g1**2 * f12 + g1**3 * f03
    G4 = f1**3 * g30 + f1**2 * g1 * g21 + f1 * g1**2 * g12 + g1**3 * g03

    su1, sv1 = xi_u0 + xi_u1, xi_v0 + xi_v1
    su2, sv2 = xi_u0 + xi_u2, xi_v0 + xi_v2
    F2 = (2.0 * f20 * f1 * su1 + f11 * (f1 * sv1 + g1 * su1) + 2.0 * f02 * g1 * sv1
          - ek * f1 * (xi_u0 + xi_u1 * E4) - ek * f1 * su1 * E1 + 3.0 * F4)
    G2 = 2.0 * g20 * f1 * su1 + g11 * (f1 * sv1 + g1 * su1) + 2.0 * g02 * g1 * sv1 + 3.0 * G4
    F3 = (2.0 * f20 * f1 * su2 + f11 * (f1 * sv2 + g1 * su2) + 2.0 * f02 * g1 * sv2
          - ek * f1 * (xi_u0 + xi_u2 * E3) - ek * f1 * su2 * E1 + 6.0 * F4)
    G3 = 2.0 * g20 * f1 * su2 + g11 * (f1 * sv2 + g1 * su2) + 2.0 * g02 * g1 * sv2 + 6.0 * G4

    base = d_t * k2
    tau0 = (f1 * f2 + g1 * g2) / (base * g1 * g2)
    nq = 2.0 * (f2 * F1 + g2 * G1)
    nc1 = -(f2 * F2 + g2 * G2)
    nc2 = -(f2 * F3 + g2 * G3)
    if target is PatternTarget.PREY:
        # Denominators carry eigenvector factors f1^0, f1^1, f1^2 on the
        # quadratic and the two cubic couplings respectively.
        h0 = nq / (base * g1 * g2)
        m1 = nc1 / (base * f1 * g1 * g2)
        m2 = nc2 / (base * f1**2 * g1 * g2)
    else:
        h0 = nq / (base * g1**2 * g2)
        m1 = nc1 / (base * g1**3 * g2)
        m2 = nc2 / (base * g1**3 * g2)

    mu1, mu2, mu3, mu4, ds = _mu_thresholds(h0, m1, m2, d_t)
    return WnaCoefficients(
        f1=f1, g1=g1, f2=f2, g2=g2, F1=F1, G1=G1,
        xi_u0=xi_u0, xi_v0=xi_v0, xi_u1=xi_u1, xi_v1=xi_v1, xi_u2=xi_u2, xi_v2=xi_v2,
        F2=F2, G2=G2, F3=F3, G3=G3, F4=F4, G4=G4,
        tau0=tau0, h0=h0, m1=m1, m2=m2,
        mu1=mu1, mu2=mu2, mu3=mu3, mu4=mu4,
        d1=ds[0], d2=ds[1], d3=ds[2], d4=ds[3],
        target=target, k_t=tp.k_t, d_t=d_t, sigma=tp.sigma,
    )


def _mu_thresholds(h0: float, m1: float, m2: float, d_t: float):
    if not (m1 > 0.0 and m2 > m1 and m1 + 2.0 * m2 > 0.0):
        raise NumericalError(
            f"branch thresholds require m1 > 0 and m2 > m1 (got m1={m1:.4g}, m2={m2:.4g})")
    mu1 = -h0**2 / (4.0 * (m1 + 2.0 * m2))
    mu2 = 0.0
    mu3 = h0**2 * m1 / (m2 - m1) ** 2
    mu4 = h0**2 * (2.0 * m1 + m2) / (m2 - m1) ** 2
    ds = tuple((1.0 - mu) * d_t for mu in (mu1, mu2, mu3, mu4))
    return mu1, mu2, mu3, mu4, ds


def mu_thresholds(c: WnaCoefficients) -> tuple[float, float, float, float,
                                               tuple[float, float, float, float]]:
    """(mu1, mu2, mu3, mu4) and the corresponding diffusion values d1..d4."""
    mu1, mu2, mu3, mu4, ds = _mu_thresholds(c.h0, c.m1, c.m2, c.d_t)
    return mu1, mu2, mu3, mu4, ds


def mu_of(c: WnaCoefficients, d: float) -> float:
    """Normalized distance to onset, (d_T - d)/d_T."""
    return (c.d_t - d) / c.d_t


def hexagon_amplitudes(c: WnaCoefficients, mu: float) -> Optional[tuple[float, float]]:
    """(rho_plus, rho_minus) for equal-amplitude hexagons, None below mu1."""
    M = c.m1 + 2.0 * c.m2
    disc = c.h0**2 + 4.0 * M * mu
    if disc < 0.0:
        return None
    root = math.sqrt(disc)
    return (abs(c.h0) + root) / (2.0 * M), (abs(c.h0) - root) / (2.0 * M)


def classify_branches(c: WnaCoefficients, d: float) -> list[PatternBranch]:
    """Existence and stability of every stationary branch at diffusion d."""
    if not c.tau0 > 0.0:
        raise NumericalError("branch classification requires tau0 > 0")
    mu = mu_of(c, d)
    hex_kind = BranchKind.HEX_H0 if c.h0 > 0.0 else BranchKind.HEX_HPI
    out = [PatternBranch(BranchKind.HOMOGENEOUS, 0.0, mu < c.mu2, mu,
                         (-math.inf, c.mu2))]
    if mu > 0.0 and c.m1 > 0.0:
        out.append(PatternBranch(BranchKind.STRIPE, math.sqrt(mu / c.m1),
                                 mu > c.mu3, mu, (c.mu3, math.inf)))
    amps = hexagon_amplitudes(c, mu)
    if amps is not None and mu > c.mu1:
        rho_p, rho_m = amps
        out.append(PatternBranch(hex_kind, rho_p, mu < c.mu4, mu, (c.mu1, c.mu4)))
        if rho_m >= 0.0:
            out.append(PatternBranch(hex_kind, rho_m, False, mu, None))
    if c.m2 > c.m1:
        rho1 = abs(c.h0) / (c.m2 - c.m1)
        if mu > c.m1 * rho1**2:
            rho23 = math.sqrt((mu - c.m1 * rho1**2) / (c.m1 + c.m2))
            out.append(PatternBranch(BranchKind.MIXED, (rho1, rho23, rho23),
                                     False, mu, None))
    return out


def mode_rhs(state: np.ndarray, c: WnaCoefficients, mu: float) -> np.ndarray:
    """Right-hand side of the coupled phase/amplitude system (signed h0, cos Phi)."""
    r1, r2, r3, phi = state
    h0, m1, m2, tau0 = c.h0, c.m1, c.m2, c.tau0
    cos_phi = math.cos(phi)
    dr1 = mu * r1 + h0 * r2 * r3 * cos_phi - m1 * r1**3 - m2 * (r2**2 + r3**2) * r1
    dr2 = mu * r2 + h0 * r1 * r3 * cos_phi - m1 * r2**3 - m2 * (r1**2 + r3**2) * r2
    dr3 = mu * r3 + h0 * r1 * r2 * cos_phi - m1 * r3**3 - m2 * (r1**2 + r2**2) * r3
    if min(r1, r2, r3) < PHASE_FREEZE_TOL:
        dphi = 0.0  # removable singularity of the rho1 rho2 rho3 denominator
    else:
        dphi = -h0 * (r1**2 * r2**2 + r2**2 * r3**2 + r3**2 * r1**2) \
            / (r1 * r2 * r3) * math.sin(phi)
    return np.array([dr1, dr2, dr3, dphi]) / tau0


def locked_mode_rhs(rho: np.ndarray, c: WnaCoefficients, mu: float) -> np.ndarray:
    """Amplitude equations on the attracting phase branch (|h0|, three modes)."""
    r1, r2, r3 = rho
    h = abs(c.h0)
    dr1 = mu * r1 + h * r2 * r3 - c.m1 * r1**3 - c.m2 * (r2**2 + r3**2) * r1
    dr2 = mu * r2 + h * r1 * r3 - c.m1 * r2**3 - c.m2 * (r1**2 + r3**2) * r2
    dr3 = mu * r3 + h * r1 * r2 - c.m1 * r3**3 - c.m2 * (r1**2 + r2**2) * r3
    return np.array([dr1, dr2, dr3]) / c.tau0


def locked_mode_jacobian(rho: np.ndarray, c: WnaCoefficients, mu: float) -> np.ndarray:
    """Analytic Jacobian of the locked amplitude system (without the 1/tau0 factor)."""
    r1, r2, r3 = rho
    h, m1, m2 = abs(c.h0), c.m1, c.m2
    return np.array([
        [mu - 3 * m1 * r1**2 - m2 * (r2**2 + r3**2), h * r3 - 2 * m2 * r1 * r2, h * r2 - 2 * m2 * r1 * r3],
        [h * r3 - 2 * m2 * r1 * r2, mu - 3 * m1 * r2**2 - m2 * (r1**2 + r3**2), h * r1 - 2 * m2 * r2 * r3],
        [h * r2 - 2 * m2 * r1 * r3, h * r1 - 2 * m2 * r2 * r3, mu - 3 * m1 * r3**2 - m2 * (r1**2 + r2**2)],
    ])


def integrate_modes(c: WnaCoefficients, s0: AmplitudeState, horizon: float,
                    mu: float) -> ModeTrajectory:
    """Integrate the mode system until a fixed point or the horizon.

    Adaptive explicit Runge-Kutta; convergence is declared when the state
    changes by less than CONVERGENCE_RATE_TOL per unit time.
    """
    if not c.tau0 > 0.0:
        raise NumericalError("mode integration requires tau0 > 0")
    times = [0.0]
    states = [s0.as_array()]
    t = 0.0
    window = 1.0
    converged = False
    while t < horizon:
        t_next = min(t + window, horizon)
        sol = solve_ivp(lambda _, y: mode_rhs(y, c, mu), (t, t_next), states[-1],
                        method="RK45", rtol=ODE_RTOL, atol=ODE_ATOL, dense_output=False)
        if not sol.success:
            raise NumericalError(f"mode integration failed: {sol.message}")
        y = sol.y[:, -1]
        change = np.max(np.abs(y - states[-1])) / (t_next - t)
        times.append(t_next)
        states.append(y)
        t = t_next
        if change < CONVERGENCE_RATE_TOL:
            converged = True
            break
    return ModeTrajectory(np.array(times), np.array(states), converged)
