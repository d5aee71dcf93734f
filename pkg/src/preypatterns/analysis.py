"""Spectral classification of stationary fields.

A converged snapshot is labeled homogeneous, hexagonal hot-spot, hexagonal
cold-spot, or stripe from three statistics: the radial power spectrum, the
angular peak count on the dominant ring, and the skewness of the
mean-removed field.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dispersion import TuringPoint
from .errors import NumericalError
from .simulate import Grid2D


class PatternClass(Enum):
    HOMOGENEOUS = "Homogeneous"
    HOT_SPOT = "HotSpot"
    COLD_SPOT = "ColdSpot"
    STRIPE = "Stripe"
    UNCLASSIFIED = "Unclassified"


@dataclass(frozen=True)
class ClassifierThresholds:
    """Tunable knobs; defaults chosen for 200x200 desk-scale runs."""

    power_fraction: float = 0.05      # below: candidate homogeneous
    homogeneous_range: float = 1e-4   # field range relative to |mean|
    skewness: float = 0.2             # hot/cold spot split
    ring_peak: float = 0.5            # angular peak height relative to ring max
    min_separation_deg: float = 15.0
    sectors: int = 72                 # 5-degree angular bins
    ring_halfwidth: int = 1           # annulus half-width in radial bins


DEFAULT_THRESHOLDS = ClassifierThresholds()


@dataclass(frozen=True)
class SpectralSummary:
    dominant_k: float
    angular_peaks: int
    power_fraction: float
    skewness: float


def _power_spectrum(f: np.ndarray):
    F = np.fft.fft2(f - f.mean())
    P = np.abs(F) ** 2
    P[0, 0] = 0.0
    return P


def spectral_summary(field: np.ndarray, grid: Grid2D,
                     thresholds: ClassifierThresholds = DEFAULT_THRESHOLDS) -> SpectralSummary:
    """Radial/angular power statistics and skewness of one field."""
    if not np.isfinite(field).all():
        raise NumericalError("field contains non-finite values")
    f = field - field.mean()
    m2 = float((f**2).mean())
    skew = float((f**3).mean() / m2**1.5) if m2 > 0.0 else 0.0

    mean = abs(float(field.mean()))
    spread = float(field.max() - field.min())
    if mean > 0.0 and spread < thresholds.homogeneous_range * mean:
        # Effectively constant: the leftover spectrum is numerical residue.
        return SpectralSummary(0.0, 0, 0.0, skew)

    P = _power_spectrum(field)
    ny, nx = field.shape
    # Index-space wavevectors; radial bin width is the fundamental 2*pi/lx.
    mx = np.fft.fftfreq(nx) * nx
    my = np.fft.fftfreq(ny) * ny
    MX, MY = np.meshgrid(mx, my)
    radius = np.sqrt(MX**2 + (MY * (grid.lx / grid.ly)) ** 2)
    ring = np.rint(radius).astype(np.int64)

    total = float(P.sum())
    if total == 0.0:
        return SpectralSummary(0.0, 0, 0.0, skew)
    counts = np.bincount(ring.ravel(), P.ravel())
    counts[0] = 0.0
    dominant = int(np.argmax(counts))
    dk = 2.0 * np.pi / grid.lx
    dominant_k = dominant * dk
    power_fraction = float(counts[dominant] / total)

    hw = thresholds.ring_halfwidth
    mask = np.abs(ring - dominant) <= hw
    mask[0, 0] = False
    angles = np.arctan2(MY[mask], MX[mask]) % (2.0 * np.pi)
    weights = P[mask]
    nsec = thresholds.sectors
    sector = np.floor(angles / (2.0 * np.pi) * nsec).astype(np.int64) % nsec
    profile = np.bincount(sector, weights, minlength=nsec)
    profile = 0.25 * np.roll(profile, 1) + 0.5 * profile + 0.25 * np.roll(profile, -1)

    peaks = _angular_peaks(profile, thresholds)
    return SpectralSummary(dominant_k, peaks, power_fraction, skew)


def _angular_peaks(profile: np.ndarray, thresholds: ClassifierThresholds) -> int:
    nsec = len(profile)
    top = profile.max()
    if top <= 0.0:
        return 0
    cand = [s for s in range(nsec)
            if profile[s] > thresholds.ring_peak * top
            and profile[s] >= profile[(s - 1) % nsec]
            and profile[s] > profile[(s + 1) % nsec]]
    min_sep = int(round(thresholds.min_separation_deg / 360.0 * nsec))
    kept: list[int] = []
    for s in sorted(cand, key=lambda s: -profile[s]):
        if all(min((s - q) % nsec, (q - s) % nsec) >= min_sep for q in kept):
            kept.append(s)
    return len(kept)


def classify_pattern(field: np.ndarray, grid: Grid2D,
                     thresholds: ClassifierThresholds = DEFAULT_THRESHOLDS) -> PatternClass:
    """Label one converged snapshot; Unclassified is the honest fallback."""
    summary = spectral_summary(field, grid, thresholds)
    mean = abs(float(field.mean()))
    spread = float(field.max() - field.min())
    if summary.power_fraction < thresholds.power_fraction and \
            (mean > 0.0 and spread < thresholds.homogeneous_range * mean):
        return PatternClass.HOMOGENEOUS
    if summary.angular_peaks == 2:
        return PatternClass.STRIPE
    if summary.angular_peaks == 6:
        if summary.skewness > thresholds.skewness:
            return PatternClass.HOT_SPOT
        if summary.skewness < -thresholds.skewness:
            return PatternClass.COLD_SPOT
    return PatternClass.UNCLASSIFIED


def cross_correlation(u_field: np.ndarray, v_field: np.ndarray) -> float:
    """Pearson correlation of the mean-removed fields."""
    if u_field.shape != v_field.shape:
        raise NumericalError("fields must share a grid")
    du = u_field - u_field.mean()
    dv = v_field - v_field.mean()
    su = float((du**2).sum())
    sv = float((dv**2).sum())
    if su == 0.0 or sv == 0.0:
        raise NumericalError("degenerate input: zero-variance field")
    return float((du * dv).sum() / np.sqrt(su * sv))


def measured_wavenumber_check(field: np.ndarray, grid: Grid2D, tp: TuringPoint,
                              thresholds: ClassifierThresholds = DEFAULT_THRESHOLDS) -> float:
    """Relative deviation of the dominant wavenumber from the critical one."""
    summary = spectral_summary(field, grid, thresholds)
    return abs(summary.dominant_k - tp.k_t) / tp.k_t
