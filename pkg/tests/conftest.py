"""Shared fixtures: the reference parameter set and its analytic pipeline."""
import numpy as np
import pytest

import preypatterns as pp

# Reference parameter set used throughout: eta=0.92, kappa=0.65, alpha=10.
REF = dict(eta=0.92, kappa=0.65, alpha=10.0)


@pytest.fixture(scope="session")
def ref_params():
    return pp.ModelParams(**REF)


@pytest.fixture(scope="session")
def stable_eq(ref_params):
    return pp.stable_coexistence(ref_params)


@pytest.fixture(scope="session")
def saddle_eq(ref_params):
    eqs = pp.coexistence_equilibria(ref_params)
    return next(e for e in eqs if e.stability is pp.Stability.SADDLE)


def params_with_sigma(sigma: float) -> pp.ModelParams:
    return pp.ModelParams(d=1.0, sigma=sigma, **REF)


@pytest.fixture(scope="session")
def turing_points():
    """TuringPoint per kernel width, computed once."""
    out = {}
    for sigma in (0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5):
        p = params_with_sigma(sigma)
        e = pp.stable_coexistence(p)
        out[sigma] = pp.turing_threshold(p, e)
    return out


@pytest.fixture(scope="session")
def wna_sets(turing_points):
    """Prey-component coefficient sets per kernel width."""
    out = {}
    for sigma, tp in turing_points.items():
        p = params_with_sigma(sigma)
        e = pp.stable_coexistence(p)
        out[sigma] = pp.wna_coefficients(p, e, tp, pp.PatternTarget.PREY)
    return out


def bisect_cubic_roots(p: pp.ModelParams, tol: float = 1e-12) -> list[float]:
    """Independent oracle: sign-change bisection of the coexistence cubic on (0, 1)."""
    def phi(u):
        return p.alpha * p.eta * u**3 - p.alpha * p.kappa * p.eta * u**2 - p.kappa * u + p.kappa

    grid = np.linspace(1e-12, 1.0 - 1e-12, 4001)
    vals = np.array([phi(u) for u in grid])
    roots = []
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            roots.append(float(grid[i]))
        elif vals[i] * vals[i + 1] < 0.0:
            lo, hi = float(grid[i]), float(grid[i + 1])
            flo = phi(lo)
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                fm = phi(mid)
                if flo * fm <= 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fm
            roots.append(0.5 * (lo + hi))
    return roots
