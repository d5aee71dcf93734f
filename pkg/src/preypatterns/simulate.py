"""Explicit Euler simulation of the nonlocal system on a periodic 2-D grid.

Prey diffuses with coefficient 1, predator with d; the prey self-regulation
senses a Gaussian-smoothed density.  The smoothing is evaluated either
spectrally (default, exact for periodic plane waves) or by a truncated
quadrature stencil kept as the cross-check path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np
import scipy.fft as sfft
from numba import njit, prange
from scipy.ndimage import convolve as ndi_convolve

from .errors import ConfigError, NumericalError
from .model import Equilibrium, ModelParams

NEGATIVE_MASS_TOL = 1e-8
KERNEL_TRUNCATION_SIGMAS = 6.0


class ConvolutionPath(Enum):
    SPECTRAL = "Spectral"
    DIRECT_QUADRATURE = "DirectQuadrature"


@dataclass(frozen=True)
class Grid2D:
    nx: int
    ny: int
    dx: float
    dy: float

    def __post_init__(self):
        if self.nx <= 0 or self.ny <= 0 or self.dx <= 0 or self.dy <= 0:
            raise ConfigError("grid dimensions and spacings must be positive")

    @property
    def lx(self) -> float:
        return self.nx * self.dx

    @property
    def ly(self) -> float:
        return self.ny * self.dy

    @property
    def shape(self) -> tuple[int, int]:
        # Row-major storage: rows run along y, columns along x.
        return (self.ny, self.nx)


def default_grid() -> Grid2D:
    """200 x 200 cells, spacing 0.25: the 50 x 50 periodic box."""
    return Grid2D(200, 200, 0.25, 0.25)


@dataclass
class FieldPair:
    u: np.ndarray
    v: np.ndarray
    time: float = 0.0

    def copy(self) -> "FieldPair":
        return FieldPair(self.u.copy(), self.v.copy(), self.time)


@dataclass(frozen=True)
class SimConfig:
    params: ModelParams
    grid: Grid2D = field(default_factory=default_grid)
    dt: float = 0.01
    t_max: float = 5000.0
    seed: int = 1
    perturbation_amplitude: Optional[float] = None  # None: 1e-2 of u*
    snapshot_interval: float = 100.0
    convolution_path: ConvolutionPath = ConvolutionPath.SPECTRAL
    steady_tol: float = 1e-6
    steady_window: float = 100.0

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigError("dt must be positive")
        bound = self.grid.dx**2 / (4.0 * max(1.0, self.params.d))
        if self.dt > bound:
            raise ConfigError(
                f"dt={self.dt} violates the explicit-diffusion bound {bound:.6g}")
        if self.perturbation_amplitude is not None and self.perturbation_amplitude < 0:
            raise ConfigError("perturbation_amplitude must be non-negative")
        if self.steady_tol <= 0 or self.steady_window <= 0:
            raise ConfigError("steady_tol and steady_window must be positive")


@dataclass
class SnapshotSeries:
    times: list[float] = field(default_factory=list)
    fields: Optional[list[FieldPair]] = None


@dataclass
class SimResult:
    final: FieldPair
    series: SnapshotSeries
    converged: bool
    steady_time: Optional[float]
    negative_mass: bool
    steps: int


def initial_condition(grid: Grid2D, e: Equilibrium, amplitude: float, seed: int) -> FieldPair:
    """Homogeneous state plus independent uniform [-1, 1] noise; seed-reproducible."""
    rng = np.random.default_rng(seed)
    xi_u = rng.uniform(-1.0, 1.0, grid.shape)
    xi_v = rng.uniform(-1.0, 1.0, grid.shape)
    return FieldPair(e.u_star + amplitude * xi_u, e.v_star + amplitude * xi_v, 0.0)


def laplacian_periodic(f: np.ndarray, grid: Grid2D) -> np.ndarray:
    """Second-order 5-point stencil with periodic wrap."""
    out = np.empty_like(f)
    _laplacian_kernel(f, out, 1.0 / grid.dx**2, 1.0 / grid.dy**2)
    return out


def _spectral_multiplier(grid: Grid2D, sigma: float) -> np.ndarray:
    kx = 2.0 * np.pi * sfft.rfftfreq(grid.nx, grid.dx)
    ky = 2.0 * np.pi * sfft.fftfreq(grid.ny, grid.dy)
    return np.exp(-0.5 * sigma**2 * (kx[None, :] ** 2 + ky[:, None] ** 2))


def _quadrature_stencil(grid: Grid2D, sigma: float) -> np.ndarray:
    rx = math.ceil(KERNEL_TRUNCATION_SIGMAS * sigma / grid.dx)
    ry = math.ceil(KERNEL_TRUNCATION_SIGMAS * sigma / grid.dy)
    x = np.arange(-rx, rx + 1) * grid.dx
    y = np.arange(-ry, ry + 1) * grid.dy
    w = np.exp(-(x[None, :] ** 2 + y[:, None] ** 2) / (2.0 * sigma**2))
    return w / w.sum()  # renormalized: constants are mapped to themselves exactly


def _check_truncation(grid: Grid2D, sigma: float) -> None:
    if KERNEL_TRUNCATION_SIGMAS * sigma > min(grid.lx, grid.ly) / 2.0:
        raise ConfigError(
            f"kernel width sigma={sigma} too large for the domain: "
            f"{KERNEL_TRUNCATION_SIGMAS}*sigma exceeds half the extent")


def convolve_periodic(f: np.ndarray, sigma: float, grid: Grid2D,
                      path: ConvolutionPath = ConvolutionPath.SPECTRAL) -> np.ndarray:
    """Periodic convolution with the normalized Gaussian kernel; sigma=0 is identity."""
    if sigma == 0.0:
        return f.copy()
    _check_truncation(grid, sigma)
    if path is ConvolutionPath.SPECTRAL:
        return sfft.irfft2(sfft.rfft2(f) * _spectral_multiplier(grid, sigma), s=f.shape)
    return ndi_convolve(f, _quadrature_stencil(grid, sigma), mode="wrap")


@njit(cache=True, parallel=True)
def _laplacian_kernel(f, out, dxi2, dyi2):
    ny, nx = f.shape
    for j in prange(ny):
        jm = j - 1 if j > 0 else ny - 1
        jp = j + 1 if j < ny - 1 else 0
        for i in range(nx):
            im = i - 1 if i > 0 else nx - 1
            ip = i + 1 if i < nx - 1 else 0
            out[j, i] = ((f[j, im] + f[j, ip] - 2.0 * f[j, i]) * dxi2
                         + (f[jm, i] + f[jp, i] - 2.0 * f[j, i]) * dyi2)


@njit(cache=True, parallel=True)
def _euler_kernel(u, v, cu, un, vn, dt, dxi2, dyi2, eta, kappa, alpha, d):
    # One fused step: 5-point Laplacians, reaction terms, forward Euler.
    # cu is the smoothed prey density entering the logistic term.
    ny, nx = u.shape
    for j in prange(ny):
        jm = j - 1 if j > 0 else ny - 1
        jp = j + 1 if j < ny - 1 else 0
        for i in range(nx):
            im = i - 1 if i > 0 else nx - 1
            ip = i + 1 if i < nx - 1 else 0
            uc = u[j, i]
            vc = v[j, i]
            lap_u = (u[j, im] + u[j, ip] - 2.0 * uc) * dxi2 \
                + (u[jm, i] + u[jp, i] - 2.0 * uc) * dyi2
            lap_v = (v[j, im] + v[j, ip] - 2.0 * vc) * dxi2 \
                + (v[jm, i] + v[jp, i] - 2.0 * vc) * dyi2
            predation = (1.0 + alpha * vc) * uc * vc
            un[j, i] = uc + dt * (lap_u + eta * uc * (1.0 - cu[j, i] / kappa) - predation)
            vn[j, i] = vc + dt * (d * lap_v + predation - vc)


class _Stepper:
    """Owns the scratch buffers and the convolution plan for one simulation."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        g = cfg.grid
        self.dxi2, self.dyi2 = 1.0 / g.dx**2, 1.0 / g.dy**2
        p = cfg.params
        if p.sigma > 0.0:
            _check_truncation(g, p.sigma)
            if cfg.convolution_path is ConvolutionPath.SPECTRAL:
                self.psi_hat = _spectral_multiplier(g, p.sigma)
                self.stencil = None
            else:
                self.psi_hat = None
                self.stencil = _quadrature_stencil(g, p.sigma)
        self.un = np.empty(g.shape)
        self.vn = np.empty(g.shape)

    def smoothed(self, u: np.ndarray) -> np.ndarray:
        p = self.cfg.params
        if p.sigma == 0.0:
            return u
        if self.psi_hat is not None:
            return sfft.irfft2(sfft.rfft2(u) * self.psi_hat, s=u.shape)
        return ndi_convolve(u, self.stencil, mode="wrap")

    def step(self, u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        p = self.cfg.params
        _euler_kernel(u, v, self.smoothed(u), self.un, self.vn, self.cfg.dt,
                      self.dxi2, self.dyi2, p.eta, p.kappa, p.alpha, p.d)
        self.un, u = u, self.un
        self.vn, v = v, self.vn
        return u, v


def step_euler(state: FieldPair, cfg: SimConfig) -> FieldPair:
    """One forward-Euler step; aborts on non-finite values."""
    stepper = _Stepper(cfg)
    u, v = stepper.step(state.u.copy(), state.v.copy())
    if not (np.isfinite(u).all() and np.isfinite(v).all()):
        raise NumericalError(f"non-finite field values after step at t={state.time + cfg.dt}")
    return FieldPair(u, v, state.time + cfg.dt)


def run_to_steady(cfg: SimConfig, e: Equilibrium,
                  on_snapshot: Optional[Callable[[FieldPair], None]] = None,
                  keep_snapshots: bool = False) -> SimResult:
    """Step until per-unit-time change stays below steady_tol for steady_window.

    Deterministic for a fixed (cfg, seed).  Hitting t_max without steadiness
    returns converged=False; oscillatory regimes are expected outside the
    Turing domain.
    """
    amp = cfg.perturbation_amplitude
    if amp is None:
        amp = 1e-2 * e.u_star
    state = initial_condition(cfg.grid, e, amp, cfg.seed)
    stepper = _Stepper(cfg)
    u, v = state.u, state.v

    steps_per_unit = max(1, int(round(1.0 / cfg.dt)))
    snap_stride = max(1, int(round(cfg.snapshot_interval / cfg.dt)))
    n_steps = int(round(cfg.t_max / cfg.dt))

    series = SnapshotSeries(times=[], fields=[] if keep_snapshots else None)

    def emit(fp: FieldPair):
        # Stepping recycles the underlying buffers, so hand out copies.
        fp = fp.copy()
        series.times.append(fp.time)
        if keep_snapshots:
            series.fields.append(fp)
        if on_snapshot is not None:
            on_snapshot(fp)

    emit(FieldPair(u, v, 0.0))

    u_ref = u.copy()
    v_ref = v.copy()
    steady_since = None
    steady_time = None
    negative_mass = False
    n = 0
    while n < n_steps:
        u, v = stepper.step(u, v)
        n += 1
        t = n * cfg.dt
        if n % steps_per_unit == 0:
            if not (np.isfinite(u).all() and np.isfinite(v).all()):
                raise NumericalError(f"non-finite field values at t={t:.3f}")
            span = steps_per_unit * cfg.dt
            change = max(np.max(np.abs(u - u_ref)), np.max(np.abs(v - v_ref))) / span
            np.copyto(u_ref, u)
            np.copyto(v_ref, v)
            neg = u[u < 0.0]
            if neg.size and abs(neg.sum()) > NEGATIVE_MASS_TOL * np.abs(u).sum():
                negative_mass = True
            if change < cfg.steady_tol:
                if steady_since is None:
                    steady_since = t
                elif t - steady_since >= cfg.steady_window:
                    steady_time = t
            else:
                steady_since = None
        if n % snap_stride == 0:
            emit(FieldPair(u, v, t))
        if steady_time is not None:
            break

    final = FieldPair(u, v, n * cfg.dt)
    if not series.times or series.times[-1] != final.time:
        emit(final)
    return SimResult(final=final, series=series, converged=steady_time is not None,
                     steady_time=steady_time, negative_mass=negative_mass, steps=n)
