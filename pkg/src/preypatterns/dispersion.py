"""Nonlocal linear stability: dispersion relation and the Turing threshold.

The spatial linearization about a stable coexistence state has a local part
with zero (1,1) entry; the prey self-regulation enters through the kernel
transform with weight (eta/kappa) u*.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoTuringBifurcation, NumericalError
from .model import Equilibrium, EquilibriumKind, ModelParams, Stability, classify_equilibrium

COARSE_SCAN_RANGE = (1e-4, 10.0)
COARSE_SCAN_SAMPLES = 2000
BISECT_TOL = 1e-12
THRESHOLD_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class LinearizationCoefficients:
    """Spatial-linearization entries; a11 is identically zero."""

    a12: float
    a21: float
    a22: float
    nonlocal_weight: float  # (eta/kappa) u*, multiplies the kernel transform
    a11: float = 0.0


@dataclass(frozen=True)
class WaveSample:
    k: float
    trace_k: float
    det_k: float
    lambda_plus: complex
    lambda_minus: complex


@dataclass(frozen=True)
class TuringPoint:
    k_t: float
    d_t: float
    sigma: float


def kernel_fourier(k, sigma: float):
    """Fourier transform of the normalized Gaussian kernel: exp(-sigma^2 k^2 / 2)."""
    return np.exp(-0.5 * (sigma * np.asarray(k, dtype=float)) ** 2)


def linearization(p: ModelParams, e: Equilibrium) -> LinearizationCoefficients:
    if e.kind is not EquilibriumKind.COEXISTENCE:
        raise NumericalError("spatial linearization requires a coexistence equilibrium")
    stab, js = classify_equilibrium(e, p)
    if stab is not Stability.STABLE:
        raise NumericalError(
            "Turing analysis requires a temporally stable equilibrium "
            f"(got {stab.value}: trace={js.trace:.3e}, det={js.det:.3e})")
    u, v = e.u_star, e.v_star
    return LinearizationCoefficients(
        a12=-(1.0 + 2.0 * p.alpha * v) * u,
        a21=(1.0 + p.alpha * v) * v,
        a22=p.alpha * u * v,
        nonlocal_weight=p.eta / p.kappa * u,
    )


def _B(k, lin: LinearizationCoefficients, sigma: float):
    # Upper-left entry of the wavenumber-k stability matrix.
    return lin.a11 - lin.nonlocal_weight * kernel_fourier(k, sigma) - np.asarray(k) ** 2


def trace_k(k, lin: LinearizationCoefficients, sigma: float, d: float):
    return _B(k, lin, sigma) + lin.a22 - d * np.asarray(k) ** 2


def det_k(k, lin: LinearizationCoefficients, sigma: float, d: float):
    return _B(k, lin, sigma) * (lin.a22 - d * np.asarray(k) ** 2) - lin.a12 * lin.a21


def det_k_prime(k, lin: LinearizationCoefficients, sigma: float, d: float):
    """Analytic d(det)/dk."""
    k = np.asarray(k, dtype=float)
    E = kernel_fourier(k, sigma)
    Bp = lin.nonlocal_weight * sigma**2 * k * E - 2.0 * k
    return Bp * (lin.a22 - d * k**2) + _B(k, lin, sigma) * (-2.0 * d * k)


def growth_rates(trace: np.ndarray, det: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    disc = np.lib.scimath.sqrt(trace.astype(complex) ** 2 - 4.0 * det)
    return (trace + disc) / 2.0, (trace - disc) / 2.0


def dispersion_sample(k: float, p: ModelParams, e: Equilibrium) -> WaveSample:
    """Trace, determinant and growth rates of the wavenumber-k mode."""
    lin = linearization(p, e)
    t = float(trace_k(k, lin, p.sigma, p.d))
    dd = float(det_k(k, lin, p.sigma, p.d))
    lp, lm = growth_rates(np.array([t]), np.array([dd]))
    return WaveSample(k, t, dd, complex(lp[0]), complex(lm[0]))


def dispersion_scan(ks: np.ndarray, p: ModelParams, e: Equilibrium) -> list[WaveSample]:
    lin = linearization(p, e)
    t = trace_k(ks, lin, p.sigma, p.d)
    dd = det_k(ks, lin, p.sigma, p.d)
    lp, lm = growth_rates(t, dd)
    return [WaveSample(float(k), float(tt), float(d_), complex(a), complex(b))
            for k, tt, d_, a, b in zip(ks, t, dd, lp, lm)]


def _d_candidate(k, lin: LinearizationCoefficients, sigma: float):
    # Diffusion ratio at which det(k) vanishes for this k.
    B = _B(k, lin, sigma)
    return (lin.a22 * B - lin.a12 * lin.a21) / (np.asarray(k) ** 2 * B)


def _marginal_equation(k, lin: LinearizationCoefficients, sigma: float):
    # d eliminated between det = 0 and d(det)/dk = 0.
    k = np.asarray(k, dtype=float)
    E = kernel_fourier(k, sigma)
    B = _B(k, lin, sigma)
    w = lin.nonlocal_weight
    return (2.0 * lin.a22 * B**2
            - lin.a12 * lin.a21 * (2.0 * lin.a11 - 4.0 * k**2 - w * (2.0 - k**2 * sigma**2) * E))


def _bisect(f, lo: float, hi: float, tol: float) -> float:
    flo = f(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0 or hi - lo < tol:
            return mid
        if flo * fm < 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def turing_threshold(p: ModelParams, e: Equilibrium) -> TuringPoint:
    """Critical wavenumber and diffusion ratio where det(k) first touches zero.

    Coarse scan of the marginal equation, bisection on each sign change.  The
    candidates are stationary points of the marginal diffusion d(k); lowering
    d from above first touches zero at the largest positive one, which is the
    onset and keeps det(k) >= 0 elsewhere (verified afterwards).
    """
    lin = linearization(p, e)
    sigma = p.sigma
    ks = np.linspace(*COARSE_SCAN_RANGE, COARSE_SCAN_SAMPLES)
    vals = _marginal_equation(ks, lin, sigma)
    candidates = []
    for i in range(len(ks) - 1):
        if vals[i] == 0.0:
            candidates.append(float(ks[i]))
        elif vals[i] * vals[i + 1] < 0.0:
            candidates.append(_bisect(lambda k: _marginal_equation(k, lin, sigma),
                                      float(ks[i]), float(ks[i + 1]), BISECT_TOL))
    scored = []
    for k in candidates:
        d = float(_d_candidate(k, lin, sigma))
        if d > 0.0 and np.isfinite(d):
            scored.append((k, d))
    if not scored:
        raise NoTuringBifurcation(
            f"no Turing bifurcation: marginal equation has no admissible root (sigma={sigma})")
    k_t, d_t = max(scored, key=lambda kd: kd[1])
    tp = TuringPoint(float(k_t), float(d_t), sigma)
    verify_turing_point(tp, p, e)
    return tp


def verify_turing_point(tp: TuringPoint, p: ModelParams, e: Equilibrium,
                        tol: float = THRESHOLD_RESIDUAL_TOL) -> None:
    """Re-check det(k_T) = 0 and d(det)/dk(k_T) = 0 at d = d_T."""
    lin = linearization(p, e)
    r1 = float(det_k(tp.k_t, lin, tp.sigma, tp.d_t))
    r2 = float(det_k_prime(tp.k_t, lin, tp.sigma, tp.d_t))
    if abs(r1) > tol or abs(r2) > tol:
        raise NumericalError(
            f"Turing point fails residual check: det={r1:.2e}, d(det)/dk={r2:.2e}")


def turing_curve(etas, kappa: float, alpha: float, sigma: float,
                 ) -> tuple[list[tuple[float, TuringPoint]], list[tuple[float, str]]]:
    """Threshold along an eta sweep; points without a threshold are reported."""
    from .model import stable_coexistence

    points, skipped = [], []
    for eta in etas:
        p = ModelParams(eta, kappa, alpha, 1.0, sigma)
        try:
            e = stable_coexistence(p)
            tp = turing_threshold(p, e)
        except (NumericalError, NoTuringBifurcation) as exc:
            skipped.append((float(eta), str(exc)))
            continue
        points.append((float(eta), tp))
    return points, skipped
