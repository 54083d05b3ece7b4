import cmath
import math

import numpy as np
import pytest

from dirac_tunnel import (
    BarrierConfig,
    NumericalDegeneracyError,
    evanescent_rho,
    free_spinor,
    momentum_window,
    opaque_transmission_magnitude,
    solve_matching,
    total_energy,
    transmission_amplitude,
    transmission_phase,
)

# Frozen against an extended-precision solve of the 4x4 matching system
# (mpmath, 50 digits), canonical barrier v0 = m = 1.
AMPLITUDE_ORACLES = [
    (1.0, 10.0, -0.00010923797517855588173 + 0.00017099204663455665291j,
     -0.42707857702417474916),
    (0.5, 7.3, -7.8785246543183014233e-06 + 0.00070589308292925743816j,
     -1.0512283701905586921),
    (1.7, 25.0, -0.0020264595770834086015 + 0.0010993646334223461551j,
     1.1622247475865167636),
    (0.05, 4.0, -0.00027369908659863811993 - 0.0018116212039759785409j,
     -1.5207419933778665248),
]

CANON = BarrierConfig(v0=1.0, width=10.0)


def _random_setup(rng):
    mass = float(rng.choice([0.5, 1.0, 2.0]))
    v0 = mass * float(rng.uniform(1.0, 5.0))
    width = float(rng.uniform(0.0, 40.0))
    cfg = BarrierConfig(v0=v0, width=width, mass=mass)
    lo, hi = momentum_window(cfg)
    margin = 1e-6 * (hi - lo)
    p = float(rng.uniform(lo + margin, hi - margin))
    return p, cfg


class TestAmplitudeOracles:
    @pytest.mark.parametrize("p,width,t_ref,theta_ref", AMPLITUDE_ORACLES)
    def test_amplitude(self, p, width, t_ref, theta_ref):
        cfg = BarrierConfig(v0=1.0, width=width)
        t = transmission_amplitude(p, cfg)
        assert t == pytest.approx(t_ref, rel=1e-12)

    @pytest.mark.parametrize("p,width,t_ref,theta_ref", AMPLITUDE_ORACLES)
    def test_phase(self, p, width, t_ref, theta_ref):
        cfg = BarrierConfig(v0=1.0, width=width)
        assert transmission_phase(p, cfg) == pytest.approx(theta_ref, rel=1e-12)

    def test_array_broadcast_matches_scalars(self):
        cfg = BarrierConfig(v0=1.0, width=10.0)
        ps = np.array([0.2, 0.9, 1.5])
        ts = transmission_amplitude(ps, cfg)
        for p, t in zip(ps, ts):
            assert t == pytest.approx(transmission_amplitude(float(p), cfg),
                                      rel=1e-14)


class TestUnitarity:
    def test_probability_conservation(self):
        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(1000):
            p, cfg = _random_setup(rng)
            sol = solve_matching(p, cfg)
            defect = abs(abs(sol.r) ** 2 + abs(sol.t_coef) ** 2 - 1.0)
            worst = max(worst, defect)
        assert worst <= 1e-10


class TestEquivalence:
    def test_closed_form_matches_matching_solver(self):
        rng = np.random.default_rng(13)
        for _ in range(300):
            p, cfg = _random_setup(rng)
            t_closed = transmission_amplitude(p, cfg)
            t_solved = solve_matching(p, cfg).t_coef
            assert t_solved == pytest.approx(t_closed, rel=1e-10)

    def test_dense_oracle_agrees_at_moderate_opacity(self):
        rng = np.random.default_rng(17)
        count = 0
        while count < 100:
            p, cfg = _random_setup(rng)
            if evanescent_rho(p, cfg) * cfg.width > 25.0:
                continue
            count += 1
            stable = solve_matching(p, cfg)
            dense = solve_matching(p, cfg, dense_oracle=True)
            assert dense.t_coef == pytest.approx(stable.t_coef, rel=1e-8)
            assert dense.r == pytest.approx(stable.r, rel=1e-8, abs=1e-12)

    def test_translation_invariance_of_transmission(self):
        cfg0 = BarrierConfig(v0=1.0, width=10.0)
        t0 = solve_matching(0.9, cfg0).t_coef
        for offset in (5.0, 17.3, -4.0):
            cfg = BarrierConfig(v0=1.0, width=10.0, offset=offset)
            assert solve_matching(0.9, cfg).t_coef == pytest.approx(t0, rel=1e-12)
            assert transmission_amplitude(0.9, cfg) == pytest.approx(t0, rel=1e-12)

    def test_reflection_picks_up_entry_face_phase(self):
        p = 0.9
        r0 = solve_matching(p, BarrierConfig(v0=1.0, width=10.0)).r
        for offset in (5.0, 17.3):
            cfg = BarrierConfig(v0=1.0, width=10.0, offset=offset)
            expected = r0 * cmath.exp(2j * p * offset)
            assert solve_matching(p, cfg).r == pytest.approx(expected, rel=1e-12)


def _interior_value(sol, rho, z):
    # raw convention: coefficients multiply exp(-rho z) and exp(+rho z)
    return sol.a_coef * math.exp(-rho * z) + sol.b_coef * math.exp(rho * z)


class TestMatchingStructure:
    def test_zero_width_is_transparent(self):
        cfg = BarrierConfig(v0=1.0, width=0.0)
        sol = solve_matching(0.9, cfg)
        assert sol.t_coef == pytest.approx(1.0, rel=1e-14)
        assert abs(sol.r) <= 1e-14
        assert sol.a_coef + sol.b_coef == pytest.approx(1.0, rel=1e-12)
        assert transmission_amplitude(0.9, cfg) == 1.0

    def test_wavefunction_continuity_at_both_faces(self):
        rng = np.random.default_rng(29)
        for _ in range(100):
            p, cfg = _random_setup(rng)
            if evanescent_rho(p, cfg) * cfg.width > 250.0:
                continue
            a = cfg.offset
            b = cfg.offset + cfg.width
            rho = evanescent_rho(p, cfg)
            sol = solve_matching(p, cfg)
            left = cmath.exp(1j * p * a) + sol.r * cmath.exp(-1j * p * a)
            right = sol.t_coef * cmath.exp(1j * p * b)
            assert _interior_value(sol, rho, a) == pytest.approx(left, rel=1e-10)
            assert _interior_value(sol, rho, b) == pytest.approx(right, rel=1e-10)

    def test_opaque_branch_joins_smoothly(self):
        # straddle the x = 300 switch and require continuity across it
        cfg_lo = BarrierConfig(v0=1.0, width=299.999 / evanescent_rho(0.9, CANON))
        cfg_hi = BarrierConfig(v0=1.0, width=300.001 / evanescent_rho(0.9, CANON))
        t_lo = transmission_amplitude(0.9, cfg_lo)
        t_hi = transmission_amplitude(0.9, cfg_hi)
        assert abs(t_hi / t_lo) == pytest.approx(
            math.exp(-(300.001 - 299.999)), rel=1e-6
        )

    def test_degenerate_edge_raises(self):
        _, hi = momentum_window(CANON)
        with pytest.raises(NumericalDegeneracyError):
            solve_matching(hi, CANON)

    def test_closed_form_survives_window_edge(self):
        # at p_max the interior turns linear; the closed form stays finite
        _, hi = momentum_window(CANON)
        cfg = BarrierConfig(v0=1.0, width=10.0)
        t = transmission_amplitude(hi, cfg)
        assert abs(t) ** 2 == pytest.approx(3.0 / 103.0, rel=1e-12)


class TestOpaqueLimit:
    def test_exact_at_strong_opacity(self):
        p0 = math.sqrt(3.0) / 2.0
        cfg = BarrierConfig(v0=1.0, width=20.0)
        approx = opaque_transmission_magnitude(p0, cfg)
        exact = abs(transmission_amplitude(p0, cfg))
        assert approx == pytest.approx(exact, rel=1e-12)
        assert exact == pytest.approx(9.862087739755661e-09, rel=1e-12)

    def test_five_percent_at_moderate_opacity(self):
        cfg = BarrierConfig(v0=1.0, width=10.0)
        p = 1.2  # rho * L ~ 8.3
        approx = opaque_transmission_magnitude(p, cfg)
        exact = abs(transmission_amplitude(p, cfg))
        assert abs(approx / exact - 1.0) <= 0.05

    def test_magnitude_decreases_with_momentum_then_width(self):
        ps = np.linspace(0.05, math.sqrt(3.0) - 0.05, 120)
        for width in (10.0, 20.0):
            cfg = BarrierConfig(v0=1.0, width=width)
            mags = np.abs(transmission_amplitude(ps, cfg))
            assert np.all(np.diff(mags) > 0.0)
        t10 = abs(transmission_amplitude(0.9, BarrierConfig(v0=1.0, width=10.0)))
        t20 = abs(transmission_amplitude(0.9, BarrierConfig(v0=1.0, width=20.0)))
        assert t20 < t10


class TestPhaseStructure:
    def test_phase_equals_argument_up_to_plane_wave(self):
        rng = np.random.default_rng(31)
        for _ in range(200):
            p, cfg = _random_setup(rng)
            t = transmission_amplitude(p, cfg)
            theta = transmission_phase(p, cfg)
            assert cmath.phase(t * cmath.exp(1j * p * cfg.width)) == pytest.approx(
                theta, abs=1e-12
            )

    def test_range_and_limits(self):
        cfg = BarrierConfig(v0=1.0, width=10.0)
        ps = np.linspace(1e-6, math.sqrt(3.0) - 1e-9, 500)
        thetas = transmission_phase(ps, cfg)
        assert np.all(thetas >= -math.pi / 2.0)
        assert np.all(thetas < math.pi / 2.0)
        assert transmission_phase(0.0, cfg) == pytest.approx(-math.pi / 2.0)
        assert transmission_phase(0.9, BarrierConfig(v0=1.0, width=0.0)) == 0.0


class TestFreeSpinor:
    def test_components(self):
        p0 = math.sqrt(3.0) / 2.0
        e0 = total_energy(p0)
        u = free_spinor(p0, e0)
        assert u.components[0] == 1.0
        assert u.components[1] == 0.0
        assert u.components[2] == pytest.approx(p0 / (e0 + 1.0), rel=1e-14)
        assert u.components[3] == 0.0

    def test_complex_momentum(self):
        # interior modes: imaginary momentum, barrier-shifted energy
        p = 0.9
        inside = total_energy(p) - CANON.v0
        rho = evanescent_rho(p, CANON)
        u = free_spinor(1j * rho, inside)
        assert u.components[2] == pytest.approx(1j * rho / (inside + 1.0),
                                                rel=1e-14)

    def test_degenerate_denominator(self):
        with pytest.raises(ValueError):
            free_spinor(0.5, -1.0, mass=1.0)
