"""Amplitude-equation coefficients, branch selection, and mode dynamics."""
import dataclasses
import math

import numpy as np
import pytest

import preypatterns as pp
from preypatterns.amplitude import locked_mode_rhs, locked_mode_jacobian

from conftest import params_with_sigma

# ---------------------------------------------------------------------------
# Independent re-derivation oracle: resonance bookkeeping on the hexagonal
# triad done symbolically (fields as {wavevector: {monomial: coefficient}}),
# with no use of the hand-simplified coefficient expressions.
# ---------------------------------------------------------------------------

# wavevector key (a, b) means a*k1 + b*k2 with k3 = -k1 - k2; squared length
# in units of k_T^2 is a^2 + b^2 - a*b (the triad vectors are 120 deg apart).


def _norm2(key):
    a, b = key
    return a * a + b * b - a * b


def _mul(f, g):
    out = {}
    for ka, ma in f.items():
        for kb, mb in g.items():
            key = (ka[0] + kb[0], ka[1] + kb[1])
            dest = out.setdefault(key, {})
            for ea, ca in ma.items():
                for eb, cb in mb.items():
                    mono = tuple(x + y for x, y in zip(ea, eb))
                    dest[mono] = dest.get(mono, 0.0) + ca * cb
    return out


def _scale(f, s):
    return {k: {m: s * c for m, c in monos.items()} for k, monos in f.items()}


def _add(*fields):
    out = {}
    for f in fields:
        for k, monos in f.items():
            dest = out.setdefault(k, {})
            for m, c in monos.items():
                dest[m] = dest.get(m, 0.0) + c
    return out


def _convolve(f, sigma, k_t):
    return {k: {m: c * math.exp(-_norm2(k) * k_t**2 * sigma**2 / 2.0)
                for m, c in monos.items()}
            for k, monos in f.items()}


def _first_order(coef):
    # (u1, v1) on the resonant triad with unit mode amplitudes W_j.
    modes = {(1, 0): 0, (0, 1): 1, (-1, -1): 2}
    u1, v1 = {}, {}
    for key, j in modes.items():
        mono_w = tuple(1 if i == j else 0 for i in range(6))
        mono_c = tuple(1 if i == j + 3 else 0 for i in range(6))
        conj = (-key[0], -key[1])
        u1[key] = {mono_w: coef.f1}
        u1[conj] = {mono_c: coef.f1}
        v1[key] = {mono_w: coef.g1}
        v1[conj] = {mono_c: coef.g1}
    return u1, v1


def oracle_resonance_coefficients(p, e, tp, c):
    """F1, G1, F2, G2, F3, G3 rebuilt by direct mode-pair summation."""
    u, v = e.u_star, e.v_star
    ek = p.eta / p.kappa
    w = ek * u
    f01 = -(1.0 + 2.0 * p.alpha * v) * u
    g10 = (1.0 + p.alpha * v) * v
    g01 = p.alpha * u * v
    f11, f02 = -(1.0 + 2.0 * p.alpha * v), -p.alpha * u
    g11, g02 = (1.0 + 2.0 * p.alpha * v), p.alpha * u
    f12, g12 = -p.alpha, p.alpha
    k_t, d_t, sigma = tp.k_t, tp.d_t, tp.sigma

    u1, v1 = _first_order(c)
    qu = _add(_scale(_mul(u1, v1), f11), _scale(_mul(v1, v1), f02),
              _scale(_mul(u1, _convolve(u1, sigma, k_t)), -ek))
    qv = _add(_scale(_mul(u1, v1), g11), _scale(_mul(v1, v1), g02))

    w2w3 = (0, 0, 0, 0, 1, 1)
    F1 = qu[(1, 0)][w2w3] / 2.0
    G1 = qv[(1, 0)][w2w3] / 2.0

    # Second-order response, solved wavevector by wavevector; the slaved
    # critical-circle content is dropped (it cancels in the reduction).
    u2, v2 = {}, {}
    for key in set(qu) | set(qv):
        n2 = _norm2(key)
        if n2 == 1:
            continue
        psi = math.exp(-n2 * k_t**2 * sigma**2 / 2.0)
        m11 = -w * psi - n2 * k_t**2
        m22 = g01 - d_t * n2 * k_t**2
        det = m11 * m22 - f01 * g10
        for mono in set(qu.get(key, {})) | set(qv.get(key, {})):
            bu = -qu.get(key, {}).get(mono, 0.0)
            bv = -qv.get(key, {}).get(mono, 0.0)
            u2.setdefault(key, {})[mono] = (m22 * bu - f01 * bv) / det
            v2.setdefault(key, {})[mono] = (m11 * bv - g10 * bu) / det

    cu = _add(_scale(_add(_mul(u1, v2), _mul(u2, v1)), f11),
              _scale(_mul(v1, v2), 2.0 * f02),
              _scale(_mul(u1, _mul(v1, v1)), f12),
              _scale(_add(_mul(u1, _convolve(u2, sigma, k_t)),
                          _mul(u2, _convolve(u1, sigma, k_t))), -ek))
    cv = _add(_scale(_add(_mul(u1, v2), _mul(u2, v1)), g11),
              _scale(_mul(v1, v2), 2.0 * g02),
              _scale(_mul(u1, _mul(v1, v1)), g12))

    self_mono = (2, 0, 0, 1, 0, 0)      # |W1|^2 W1
    cross_mono2 = (1, 1, 0, 0, 1, 0)    # |W2|^2 W1
    cross_mono3 = (1, 0, 1, 0, 0, 1)    # |W3|^2 W1
    F2 = cu[(1, 0)][self_mono]
    G2 = cv[(1, 0)][self_mono]
    F3a, F3b = cu[(1, 0)][cross_mono2], cu[(1, 0)][cross_mono3]
    G3a, G3b = cv[(1, 0)][cross_mono2], cv[(1, 0)][cross_mono3]
    assert F3a == pytest.approx(F3b, rel=1e-12)
    assert G3a == pytest.approx(G3b, rel=1e-12)
    xi = (u2[(0, 0)][(1, 0, 0, 1, 0, 0)], v2[(0, 0)][(1, 0, 0, 1, 0, 0)],
          u2[(2, 0)][(2, 0, 0, 0, 0, 0)], v2[(2, 0)][(2, 0, 0, 0, 0, 0)],
          u2[(1, -1)][(1, 0, 0, 0, 1, 0)], v2[(1, -1)][(1, 0, 0, 0, 1, 0)])
    return F1, G1, F2, G2, F3a, G3a, xi


@pytest.mark.parametrize("sigma", [0.0, 0.5, 1.25])
def test_coefficients_match_direct_summation_oracle(turing_points, wna_sets, sigma):
    p = params_with_sigma(sigma)
    e = pp.stable_coexistence(p)
    c = wna_sets[sigma]
    F1, G1, F2, G2, F3, G3, xi = oracle_resonance_coefficients(
        p, e, turing_points[sigma], c)
    assert c.F1 == pytest.approx(F1, rel=1e-10)
    assert c.G1 == pytest.approx(G1, rel=1e-10, abs=1e-12)
    assert c.F2 == pytest.approx(F2, rel=1e-10)
    assert c.G2 == pytest.approx(G2, rel=1e-10)
    assert c.F3 == pytest.approx(F3, rel=1e-10)
    assert c.G3 == pytest.approx(G3, rel=1e-10)
    assert (c.xi_u0, c.xi_v0, c.xi_u1, c.xi_v1, c.xi_u2, c.xi_v2) == \
        pytest.approx(xi, rel=1e-10)


# ---------------------------------------------------------------------------
# Reference values.  The reference table carries its producers' wavenumber
# precision of about 2e-4, which moves the cubic couplings by up to ~0.12;
# tolerances below are the acceptance tolerance plus that propagated noise
# (the strict per-cell comparison lives in the acceptance suite).
# ---------------------------------------------------------------------------


class TestReferenceValues:
    def test_normalizations(self, wna_sets):
        for c in wna_sets.values():
            assert c.f1**2 + c.g1**2 == pytest.approx(1.0, abs=1e-14)
            assert c.f2**2 + c.g2**2 == pytest.approx(1.0, abs=1e-14)

    def test_local_row(self, wna_sets):
        c = wna_sets[0.0]
        assert c.f1 == pytest.approx(0.757, abs=0.002)
        assert c.g1 == pytest.approx(-0.654, abs=0.002)
        assert c.tau0 == pytest.approx(3.536, abs=0.002)
        assert c.h0 == pytest.approx(3.050, abs=0.011)
        assert c.m1 == pytest.approx(6.035, abs=0.15)
        assert c.m2 == pytest.approx(121.566, abs=0.15)

    def test_widest_kernel_flips_quadratic_coupling(self, wna_sets):
        assert wna_sets[0.0].h0 > 0.0
        assert wna_sets[1.5].h0 == pytest.approx(-2.071, abs=0.012)

    def test_mu_thresholds_local(self, wna_sets):
        c = wna_sets[0.0]
        assert c.mu1 == pytest.approx(-0.009, abs=0.001)
        assert c.mu2 == 0.0
        assert c.mu3 == pytest.approx(0.004, abs=0.001)
        assert c.mu4 == pytest.approx(0.093, abs=0.001)
        assert c.d3 == pytest.approx(0.2704, abs=0.002)
        assert c.d4 == pytest.approx(0.2462, abs=0.002)

    def test_threshold_ordering_and_diffusion_map(self, wna_sets):
        for c in wna_sets.values():
            assert c.mu1 < c.mu2 < c.mu3 < c.mu4
            for mu, d in ((c.mu1, c.d1), (c.mu2, c.d2), (c.mu3, c.d3), (c.mu4, c.d4)):
                assert d == pytest.approx((1.0 - mu) * c.d_t, abs=1e-14)

    def test_zero_quadratic_coupling_collapses_thresholds(self, wna_sets):
        c = dataclasses.replace(wna_sets[0.0], h0=0.0)
        mu1, mu2, mu3, mu4, _ = pp.mu_thresholds(c)
        assert mu1 == mu2 == mu3 == mu4 == 0.0

    def test_mu_preconditions_enforced(self, wna_sets):
        c = dataclasses.replace(wna_sets[0.0], m1=5.0, m2=5.0)
        with pytest.raises(pp.NumericalError):
            pp.mu_thresholds(c)

    def test_predator_target_flips_coupling_sign(self, turing_points):
        for sigma in (0.0, 1.5):
            p = params_with_sigma(sigma)
            e = pp.stable_coexistence(p)
            prey = pp.wna_coefficients(p, e, turing_points[sigma], pp.PatternTarget.PREY)
            pred = pp.wna_coefficients(p, e, turing_points[sigma],
                                       pp.PatternTarget.PREDATOR)
            assert pred.tau0 == pytest.approx(prey.tau0, rel=1e-14)
            assert prey.f1 * prey.g1 < 0.0
            assert np.sign(pred.h0) == -np.sign(prey.h0)


# ---------------------------------------------------------------------------
# Branch classification (existence/stability windows).
# ---------------------------------------------------------------------------


def _branch(branches, kind):
    hits = [b for b in branches if b.kind is kind]
    return hits


class TestBranches:
    def test_hexagon_only_window(self, wna_sets):
        c = wna_sets[0.0]
        branches = pp.classify_branches(c, 0.271)  # inside (d3, d2)
        hexes = _branch(branches, pp.BranchKind.HEX_H0)
        assert any(b.stable for b in hexes)
        stripes = _branch(branches, pp.BranchKind.STRIPE)
        assert stripes and not any(b.stable for b in stripes)

    def test_bistable_window(self, wna_sets):
        c = wna_sets[0.0]
        branches = pp.classify_branches(c, 0.25)  # inside (d4, d3)
        assert any(b.stable for b in _branch(branches, pp.BranchKind.STRIPE))
        assert any(b.stable for b in _branch(branches, pp.BranchKind.HEX_H0))

    def test_only_homogeneous_below_mu1(self, wna_sets):
        c = wna_sets[0.0]
        d = (1.0 - 2.0 * c.mu1) * c.d_t  # mu = 2*mu1 < mu1
        branches = pp.classify_branches(c, d)
        assert [b.kind for b in branches] == [pp.BranchKind.HOMOGENEOUS]
        assert branches[0].stable

    def test_homogeneous_stable_iff_mu_negative(self, wna_sets):
        c = wna_sets[0.0]
        above = _branch(pp.classify_branches(c, c.d_t * 1.01), pp.BranchKind.HOMOGENEOUS)
        below = _branch(pp.classify_branches(c, c.d_t * 0.99), pp.BranchKind.HOMOGENEOUS)
        assert above[0].stable and not below[0].stable

    def test_negative_coupling_labels_cold_phase(self, wna_sets):
        c = wna_sets[1.5]
        branches = pp.classify_branches(c, 0.172)
        assert _branch(branches, pp.BranchKind.HEX_HPI)
        assert not _branch(branches, pp.BranchKind.HEX_H0)


# ---------------------------------------------------------------------------
# Theorem-style closed forms as fixed points + stability eigenstructure.
# ---------------------------------------------------------------------------


def random_admissible_sets(n, seed):
    rng = np.random.default_rng(seed)
    base = dict(f1=1.0, g1=-1.0, f2=1.0, g2=-1.0, F1=0.0, G1=0.0,
                xi_u0=0.0, xi_v0=0.0, xi_u1=0.0, xi_v1=0.0, xi_u2=0.0, xi_v2=0.0,
                F2=0.0, G2=0.0, F3=0.0, G3=0.0, F4=0.0, G4=0.0,
                mu1=0.0, mu2=0.0, mu3=0.0, mu4=0.0, d1=0.0, d2=0.0, d3=0.0, d4=0.0,
                target=pp.PatternTarget.PREY, k_t=1.0, d_t=1.0, sigma=0.0)
    out = []
    for _ in range(n):
        m1 = rng.uniform(0.5, 20.0)
        m2 = m1 * rng.uniform(1.5, 30.0)
        h0 = rng.uniform(0.2, 4.0) * rng.choice([-1.0, 1.0])
        tau0 = rng.uniform(0.5, 5.0)
        c = pp.WnaCoefficients(**{**base, "h0": h0, "m1": m1, "m2": m2, "tau0": tau0})
        mu1, mu2, mu3, mu4, ds = pp.mu_thresholds(c)
        c = dataclasses.replace(c, mu1=mu1, mu2=mu2, mu3=mu3, mu4=mu4,
                                d1=ds[0], d2=ds[1], d3=ds[2], d4=ds[3])
        out.append(c)
    return out


def closed_form_states(c, mu):
    """(label, rho-vector, stable) for every branch existing at mu."""
    states = [("homogeneous", np.zeros(3), mu < 0.0)]
    if mu > 0.0:
        states.append(("stripe", np.array([math.sqrt(mu / c.m1), 0.0, 0.0]),
                       mu > c.mu3))
    amps = pp.hexagon_amplitudes(c, mu)
    if amps is not None and mu > c.mu1:
        rp, rm = amps
        states.append(("hex_plus", np.full(3, rp), mu < c.mu4))
        if rm >= 0.0:
            states.append(("hex_minus", np.full(3, rm), False))
    rho1 = abs(c.h0) / (c.m2 - c.m1)
    if mu > c.m1 * rho1**2:
        r23 = math.sqrt((mu - c.m1 * rho1**2) / (c.m1 + c.m2))
        states.append(("mixed", np.array([rho1, r23, r23]), False))
    return states


class TestFixedPointsAndStability:
    def test_branches_are_fixed_points(self):
        for i, c in enumerate(random_admissible_sets(100, seed=5)):
            mu = np.random.default_rng(100 + i).uniform(c.mu1 * 0.5, 4.0 * c.mu4)
            for label, rho, _ in closed_form_states(c, mu):
                res = np.max(np.abs(locked_mode_rhs(rho, c, mu)))
                assert res <= 1e-12 * max(1.0, np.max(rho)), (label, mu)

    def test_stripe_eigenvalues_closed_form(self, wna_sets):
        c = wna_sets[0.0]
        for mu in (c.mu3 * 0.5, c.mu3 * 2.0, c.mu4):
            rho = np.array([math.sqrt(mu / c.m1), 0.0, 0.0])
            eig = np.sort(np.linalg.eigvalsh(locked_mode_jacobian(rho, c, mu)))
            expected = np.sort([
                -2.0 * mu,
                mu * (1.0 - c.m2 / c.m1) + abs(c.h0) * math.sqrt(mu / c.m1),
                mu * (1.0 - c.m2 / c.m1) - abs(c.h0) * math.sqrt(mu / c.m1),
            ])
            assert eig == pytest.approx(expected, rel=1e-10)

    def test_eigen_signs_match_stability_labels(self):
        for i, c in enumerate(random_admissible_sets(100, seed=17)):
            rng = np.random.default_rng(500 + i)
            mu = rng.uniform(c.mu1, 3.0 * c.mu4)
            if abs(mu) < 1e-6:
                continue
            for label, rho, stable in closed_form_states(c, mu):
                jac = _finite_difference_jacobian(rho, c, mu)
                eig = np.linalg.eigvals(jac).real
                margin = 1e-7 * max(1.0, abs(mu))
                if abs(eig).min() < margin:
                    continue  # marginal case at a threshold boundary
                assert (eig.max() < 0.0) == stable, (label, mu, eig)

    def test_finite_difference_matches_analytic_jacobian(self, wna_sets):
        c = wna_sets[0.0]
        mu = 0.05
        rho = np.array([0.03, 0.02, 0.025])
        fd = _finite_difference_jacobian(rho, c, mu) * c.tau0
        assert fd == pytest.approx(locked_mode_jacobian(rho, c, mu), abs=1e-6)


def _finite_difference_jacobian(rho, c, mu, h=1e-7):
    jac = np.empty((3, 3))
    for j in range(3):
        dp = rho.astype(float).copy()
        dm = rho.astype(float).copy()
        dp[j] += h
        dm[j] -= h
        jac[:, j] = (locked_mode_rhs(dp, c, mu) - locked_mode_rhs(dm, c, mu)) / (2 * h)
    return jac


# ---------------------------------------------------------------------------
# Mode-system integration.
# ---------------------------------------------------------------------------


class TestIntegrateModes:
    def test_hexagon_state_is_stationary(self, wna_sets):
        c = wna_sets[0.0]
        mu = 0.5 * (c.mu2 + c.mu4)
        rp, _ = pp.hexagon_amplitudes(c, mu)
        state = pp.AmplitudeState(rp, rp, rp, 0.0)
        rhs = pp.mode_rhs(state.as_array(), c, mu)
        assert np.max(np.abs(rhs)) <= 1e-12

    def test_small_noise_converges_to_hexagons(self, wna_sets):
        c = wna_sets[0.0]
        mu = 0.05  # between mu2 and mu4
        rng = np.random.default_rng(23)
        s0 = pp.AmplitudeState(*rng.uniform(1e-4, 2e-4, 3), 0.3)
        traj = pp.integrate_modes(c, s0, horizon=8000.0, mu=mu)
        assert traj.converged
        rp, _ = pp.hexagon_amplitudes(c, mu)
        final = traj.final
        assert np.allclose([final.rho1, final.rho2, final.rho3], rp, atol=1e-6)
        assert math.cos(final.phi_total) == pytest.approx(1.0, abs=1e-6)

    def test_stripe_subspace_is_invariant(self, wna_sets):
        c = wna_sets[0.0]
        mu = 2.0 * c.mu3  # stripes stable here
        s0 = pp.AmplitudeState(0.9 * math.sqrt(mu / c.m1), 0.0, 0.0, 0.0)
        traj = pp.integrate_modes(c, s0, horizon=5000.0, mu=mu)
        assert traj.converged
        final = traj.final
        assert final.rho2 == 0.0 and final.rho3 == 0.0
        assert final.rho1 == pytest.approx(math.sqrt(mu / c.m1), abs=1e-6)

    def test_phase_locks_to_pi_for_negative_coupling(self, wna_sets):
        c = wna_sets[1.5]
        mu = 0.5 * (c.mu2 + c.mu4)
        s0 = pp.AmplitudeState(1e-3, 1.2e-3, 0.8e-3, 1.0)
        traj = pp.integrate_modes(c, s0, horizon=8000.0, mu=mu)
        assert traj.converged
        assert math.cos(traj.final.phi_total) == pytest.approx(-1.0, abs=1e-6)

    def test_nonconvergence_reported(self, wna_sets):
        c = wna_sets[0.0]
        s0 = pp.AmplitudeState(1e-6, 1e-6, 1e-6, 0.0)
        traj = pp.integrate_modes(c, s0, horizon=1.0, mu=0.05)
        assert not traj.converged
