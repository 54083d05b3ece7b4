import math

import numpy as np
import pytest

from dirac_tunnel import (
    BarrierConfig,
    ConvergenceError,
    DegenerateWeightError,
    DensityGrid,
    PacketIntegrator,
    PacketSpec,
    converged_integrator,
    density,
    filter_stats,
    filtered_distributions,
    incident_packet,
    momentum_weight,
    total_energy,
    transmission_amplitude,
    transmitted_density,
    transmitted_packet,
)

P0 = math.sqrt(3.0) / 2.0
D_WIDTH = 10.0


def canonical_spec():
    cfg = BarrierConfig(v0=1.0, width=0.0)
    return PacketSpec.for_barrier(cfg, p0=P0, d=D_WIDTH)


def barrier(width):
    return BarrierConfig(v0=1.0, width=width)


SPEC = canonical_spec()


class TestPacketSpec:
    def test_for_barrier_window(self):
        assert SPEC.window == (0.0, math.sqrt(3.0))
        assert SPEC.p_min == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            PacketSpec(p0=0.5, d=0.0, p_min=0.0, p_max=1.0)
        with pytest.raises(ValueError):
            PacketSpec(p0=0.5, d=1.0, p_min=-0.1, p_max=1.0)
        with pytest.raises(ValueError):
            PacketSpec(p0=0.5, d=1.0, p_min=1.0, p_max=1.0)
        with pytest.raises(ValueError):
            PacketSpec(p0=1.5, d=1.0, p_min=0.0, p_max=1.0)


class TestMomentumWeight:
    def test_peak_and_truncation(self):
        assert momentum_weight(P0, SPEC) == 1.0
        assert momentum_weight(-0.1, SPEC) == 0.0
        assert momentum_weight(math.sqrt(3.0) + 1e-9, SPEC) == 0.0

    def test_gaussian_profile(self):
        dp = 0.1
        expected = math.exp(-(dp**2) * D_WIDTH**2 / 4.0)
        assert momentum_weight(P0 + dp, SPEC) == pytest.approx(expected,
                                                               rel=1e-14)
        assert momentum_weight(P0 - dp, SPEC) == pytest.approx(expected,
                                                               rel=1e-14)

    def test_array(self):
        p = np.array([-1.0, P0, 2.0])
        w = momentum_weight(p, SPEC)
        assert w.tolist() == [0.0, 1.0, 0.0]


class TestDensityOracles:
    # Frozen against an extended-precision quadrature of the same integrals
    # (mpmath, 40 digits, adaptive rule).

    def test_transmitted_density_behind_barrier(self):
        s = transmitted_packet(10.0, 2.0, SPEC, barrier(10.0))
        assert density(s) == pytest.approx(2.29544239794700562e-08, rel=1e-9)

    def test_transmitted_density_early_time(self):
        s = transmitted_packet(12.0, -3.0, SPEC, barrier(10.0))
        assert density(s) == pytest.approx(1.18559932267900627e-08, rel=1e-9)

    def test_incident_density_near_center(self):
        s = incident_packet(5.0, 7.0, SPEC)
        assert density(s) == pytest.approx(0.994277972283855439, rel=1e-9)

    def test_zero_width_reduces_to_free_packet(self):
        cfg = barrier(0.0)
        for z, t in [(5.0, 7.0), (0.0, 0.0), (-3.0, 2.0), (20.0, 40.0)]:
            d_t = density(transmitted_packet(z, t, SPEC, cfg))
            d_i = density(incident_packet(z, t, SPEC))
            assert d_t == pytest.approx(d_i, rel=1e-10)

    def test_amplitude_scale_is_twice_center_energy(self):
        # momentum integral of g alone at (z=0, t=0) times 2 E(p0) fixes the
        # absolute density scale; check against a direct quadrature
        eng = PacketIntegrator(SPEC, None)
        g, _ = eng.amplitudes(0.0, [0.0])
        p, w = np.polynomial.legendre.leggauss(200)
        half = 0.5 * (SPEC.p_max - SPEC.p_min)
        mid = 0.5 * (SPEC.p_max + SPEC.p_min)
        raw = float(np.sum(half * w * momentum_weight(mid + half * p, SPEC)))
        e0 = float(total_energy(SPEC.p0))
        assert g[0] == pytest.approx(2.0 * e0 * raw, rel=1e-10)


class TestNormConservation:
    def test_free_packet_norm_is_static(self):
        zs = np.arange(-150.0, 250.0 + 0.125, 0.25)
        eng = PacketIntegrator(SPEC, None)
        norms = []
        for t in (0.0, 30.0, 60.0):
            v = eng.density_z(zs, t)
            norms.append(0.25 * (np.sum(v) - 0.5 * (v[0] + v[-1])))
        spread = (max(norms) - min(norms)) / max(norms)
        assert spread <= 1e-3


class TestFilteredDistributions:
    def test_component_relation(self):
        cfg = barrier(10.0)
        p = np.linspace(0.05, 1.6, 50)
        g_t, f_t = filtered_distributions(p, SPEC, cfg)
        expected = g_t * p / (total_energy(p) + 1.0)
        assert np.allclose(f_t, expected, rtol=1e-13)
        assert np.all(g_t >= 0.0)
        assert np.all(f_t <= g_t)  # small component stays small, v < 1

    def test_center_value_is_transmission_magnitude(self):
        cfg = barrier(10.0)
        g_t, _ = filtered_distributions(np.array([P0]), SPEC, cfg)
        assert g_t[0] == pytest.approx(
            abs(transmission_amplitude(P0, cfg)), rel=1e-13
        )


# Frozen means of the transmitted distribution, canonical packet.
FILTER_ORACLES = [
    (0.0, 0.868138241322095179, 0.655564900675287768, 0.285536865990545748),
    (10.0, 0.939952753802761864, 0.684891732008443284,
     6.17969224402123422e-09),
    (50.0, 1.73091455672885604, 0.865883267544876819,
     7.55391687426775517e-23),
]


class TestFilterStats:
    @pytest.mark.parametrize("width,p_ref,v_ref,w_ref", FILTER_ORACLES)
    def test_frozen_means(self, width, p_ref, v_ref, w_ref):
        stats = filter_stats(SPEC, barrier(width))
        assert stats.p_mean == pytest.approx(p_ref, rel=1e-9)
        assert stats.v_out == pytest.approx(v_ref, rel=1e-9)
        assert stats.transmitted_weight == pytest.approx(w_ref, rel=1e-6)

    def test_internal_consistency(self):
        stats = filter_stats(SPEC, barrier(10.0))
        assert stats.e_mean == pytest.approx(math.hypot(stats.p_mean, 1.0),
                                             rel=1e-14)
        assert stats.v_out == pytest.approx(stats.p_mean / stats.e_mean,
                                            rel=1e-14)

    def test_mean_momentum_grows_with_width(self):
        widths = [0.0, 5.0, 10.0, 20.0, 50.0]
        means = [filter_stats(SPEC, barrier(w)).p_mean for w in widths]
        assert all(a < b for a, b in zip(means, means[1:]))
        assert means[1] == pytest.approx(0.9107437590743798, rel=1e-9)
        assert means[3] == pytest.approx(1.0204525998531575, rel=1e-9)
        assert all(SPEC.p0 < m < SPEC.p_max for m in means)

    def test_underflowed_weight_raises(self):
        # a momentum-narrow packet has no support near the transparent
        # window edge, so a wide barrier underflows the whole weight
        narrow = PacketSpec(p0=P0, d=100.0, p_min=0.0, p_max=math.sqrt(3.0))
        with pytest.raises(DegenerateWeightError):
            filter_stats(narrow, barrier(400.0))


class TestDensityGrid:
    def test_round_trip(self):
        cfg = barrier(10.0)
        ts = np.linspace(0.0, 4.0, 9)
        grid = transmitted_density(10.0, ts, SPEC, cfg)
        eng = PacketIntegrator(SPEC, cfg)
        assert np.allclose(grid.values, eng.density(10.0, ts), rtol=1e-12)
        assert np.array_equal(grid.axis, ts)

    def test_validation(self):
        with pytest.raises(ValueError):
            DensityGrid(axis=np.array([0.0, 0.0]), values=np.array([1.0, 1.0]))
        with pytest.raises(ValueError):
            DensityGrid(axis=np.array([0.0, 1.0]), values=np.array([1.0, -1.0]))
        with pytest.raises(ValueError):
            DensityGrid(axis=np.array([0.0, 1.0]), values=np.array([1.0]))


class TestConvergence:
    def test_gate_accepts_canonical_probe(self):
        eng = converged_integrator(SPEC, barrier(10.0), z=10.0, t=2.0)
        assert eng.nodes >= 4096
        d = float(eng.density(10.0, [2.0])[0])
        assert d == pytest.approx(2.29544239794700562e-08, rel=1e-8)

    def test_node_doubling_is_already_converged(self):
        cfg = barrier(10.0)
        d1 = float(PacketIntegrator(SPEC, cfg, nodes=2048).density(10.0, [2.0])[0])
        d2 = float(PacketIntegrator(SPEC, cfg, nodes=4096).density(10.0, [2.0])[0])
        assert abs(d2 - d1) <= 1e-8 * abs(d2)

    def test_unreachable_tolerance_raises_with_estimate(self):
        with pytest.raises(ConvergenceError) as excinfo:
            converged_integrator(
                SPEC, barrier(10.0), z=10.0, t=2.0, tol=1e-30, max_nodes=8192
            )
        estimate = excinfo.value.estimate
        assert estimate == pytest.approx(2.29544239794700562e-08, rel=1e-6)


class TestThreading:
    def test_threaded_evaluation_is_bit_identical(self, monkeypatch):
        cfg = barrier(10.0)
        ts = np.linspace(-10.0, 10.0, 1500)
        monkeypatch.delenv("DIRAC_TUNNEL_THREADS", raising=False)
        serial = PacketIntegrator(SPEC, cfg).density(10.0, ts)
        monkeypatch.setenv("DIRAC_TUNNEL_THREADS", "3")
        threaded = PacketIntegrator(SPEC, cfg).density(10.0, ts)
        assert np.array_equal(serial, threaded)

    def test_bad_thread_count_falls_back_to_serial(self, monkeypatch):
        monkeypatch.setenv("DIRAC_TUNNEL_THREADS", "lots")
        eng = PacketIntegrator(SPEC, barrier(10.0))
        d = eng.density(10.0, np.array([2.0]))
        assert d[0] == pytest.approx(2.29544239794700562e-08, rel=1e-9)
