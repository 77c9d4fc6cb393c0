import math

import numpy as np
import pytest
from scipy import integrate

from oracles import gaussian_overlap_riemann
from packetstats.errors import ConfigError, ConsistencyError, ConvergenceError
from packetstats.linalg import determinant, is_psd, permanent
from packetstats.overlap import (
    OverlapSet,
    QuadratureSettings,
    compute_overlaps,
    input_overlaps,
    outgoing_overlaps,
    overlap_set,
)
from packetstats.physics import (
    BreitWigner,
    ChannelSpec,
    ConstantUnitary,
    Diagonal,
    WavePacketMode,
    gaussian_amplitude,
    kinetic_energy,
)
from packetstats.presets import CAVITY_WIDTH, cavity_config, single_resonance_config

FREE = (ChannelSpec(0.0), ChannelSpec(0.0))


def _pair(dt=0.0, dx=0.0):
    return [WavePacketMode(0, 10.0, 0.5), WavePacketMode(0, 10.0, 0.5, inject_position=dx,
                                                         inject_time=dt)]


@pytest.mark.parametrize("dt,dx", [(0.0, 0.0), (0.3, 0.0), (1.1, 0.0), (0.0, -0.4),
                                   (0.5, -1.2)])
def test_input_overlap_against_riemann_sum(dt, dx):
    identity = input_overlaps(_pair(dt, dx), FREE)
    oracle = gaussian_overlap_riemann(10.0, 0.5, dt, dx)
    assert abs(identity[1, 0] - oracle) <= 1e-8
    assert abs(identity[0, 1] - np.conj(oracle)) <= 1e-8
    np.testing.assert_array_equal(np.diag(identity), [1.0, 1.0])


def test_modes_in_different_channels_are_orthogonal():
    modes = [WavePacketMode(0, 10.0, 0.5), WavePacketMode(1, 10.0, 0.5)]
    identity = input_overlaps(modes, FREE)
    np.testing.assert_array_equal(identity, np.eye(2))


def test_rows_sorted_by_channel_then_time():
    modes = [WavePacketMode(1, 10.0, 0.5), WavePacketMode(0, 10.0, 0.5, inject_time=0.2),
             WavePacketMode(0, 10.0, 0.5)]
    ov = compute_overlaps(modes, FREE, ConstantUnitary(np.eye(2)))
    assert ov.mode_order == (2, 1, 0)
    assert ov.row_channels == (0, 0, 1)


def test_diagonal_scatterer_restricts_input_overlaps():
    modes = [WavePacketMode(0, 10.0, 0.5), WavePacketMode(0, 10.0, 0.5, inject_time=0.2),
             WavePacketMode(1, 10.0, 0.5, inject_time=0.1)]
    ov = compute_overlaps(modes, FREE, Diagonal((0.4, -2.0)))
    for m in range(2):
        mask = np.array(ov.row_channels) == m
        expected = np.where(np.outer(mask, mask), ov.I, 0)
        np.testing.assert_allclose(ov.Q[m], expected, atol=1e-12)


def _single_particle_weight(mode, channel, scatterer, m):
    # <psi| P_m |psi> = int |A(p)|^2 |S_mk(E(p))|^2 dp
    def f(p):
        e = channel.threshold + kinetic_energy(p, channel.mass)
        return gaussian_amplitude(p, mode) ** 2 * abs(scatterer(e)[m, mode.channel]) ** 2

    lo = mode.center_momentum - 9 * mode.momentum_width
    hi = mode.center_momentum + 9 * mode.momentum_width
    val, _ = integrate.quad(f, lo, hi, points=[mode.center_momentum], limit=400,
                            epsabs=1e-13, epsrel=1e-12)
    return val


@pytest.mark.parametrize("width_factor", [1.0, 0.3])
def test_single_particle_weights_against_adaptive_quadrature(width_factor):
    cfg = single_resonance_config(CAVITY_WIDTH * width_factor)
    ov = overlap_set(cfg)
    mode = cfg.modes[0]
    for m in range(4):
        expected = _single_particle_weight(mode, cfg.channels[0], cfg.scatterer, m)
        assert ov.Q[m, 0, 0].real == pytest.approx(expected, abs=1e-9)
    assert ov.Q[:, 0, 0].real.sum() == pytest.approx(1.0, abs=1e-12)


def test_narrow_packet_approaches_quarter():
    ov = overlap_set(single_resonance_config(CAVITY_WIDTH / 100))
    np.testing.assert_allclose(ov.Q[:, 0, 0].real, 0.25, atol=2e-3)


def test_cavity_structure_at_sampled_delays():
    cfg = cavity_config()
    for tau in (0.0, 10.0, 100.0, 400.0):
        ov = overlap_set(cfg, tau)
        assert ov.completeness_defect() <= 1e-8
        assert is_psd(ov.I) and all(is_psd(q) for q in ov.Q)
        # 1 (+) 2 block structure: per + det = 2
        assert abs(permanent(ov.I) + determinant(ov.I) - 2) <= 1e-10


def test_cavity_block_overlap_matches_oracle():
    cfg = cavity_config()
    mode = cfg.modes[1]
    ov = overlap_set(cfg, 60.0)
    c = gaussian_overlap_riemann(mode.center_momentum, mode.momentum_width, 30.0)
    assert abs(abs(ov.I[2, 1]) - abs(c)) <= 1e-8
    assert determinant(ov.I).real == pytest.approx(1 - abs(c) ** 2, abs=1e-8)


def test_large_delay_is_uncorrelated():
    ov = overlap_set(cavity_config(), 30 / CAVITY_WIDTH)
    assert ov.correlation() <= 1e-6


def test_node_doubling_is_stable():
    cfg = cavity_config()
    coarse = overlap_set(cfg, 120.0)
    fine = overlap_set(cfg.with_quad_scale(2.0), 120.0)
    assert np.max(np.abs(coarse.Q - fine.Q)) <= 1e-9
    assert np.max(np.abs(coarse.I - fine.I)) <= 1e-9
    assert coarse.report["convergence_delta"] <= 1e-9


def test_convergence_failure_raises():
    cfg = cavity_config()
    quad = QuadratureSettings(max_nodes=256)
    with pytest.raises(ConvergenceError):
        compute_overlaps(cfg.modes, cfg.channels, cfg.scatterer, quad, tau=200.0)


def test_outgoing_overlaps_single_channel_accessor():
    cfg = cavity_config()
    ov = overlap_set(cfg, 50.0)
    q3 = outgoing_overlaps(cfg.modes, cfg.channels, cfg.scatterer, 2, cfg.quadrature, 50.0)
    np.testing.assert_allclose(q3, ov.Q[2], atol=1e-14)
    with pytest.raises(ConfigError):
        outgoing_overlaps(cfg.modes, cfg.channels, cfg.scatterer, 4)


def test_mode_in_missing_channel_rejected():
    with pytest.raises(ConfigError):
        input_overlaps([WavePacketMode(3, 10.0, 0.5)], FREE)


def test_scatterer_size_mismatch_rejected():
    with pytest.raises(ConfigError):
        compute_overlaps(_pair(), FREE, BreitWigner(50.0, 1.0, 3))


def test_validate_rejects_broken_sets():
    good = np.eye(2, dtype=complex)
    q = np.array([good / 2, good / 2])
    OverlapSet(good, q, row_channels=(0, 1)).validate()
    with pytest.raises(ConsistencyError):
        OverlapSet(good, q * 0.9, row_channels=(0, 1)).validate()
    bad = q.copy()
    bad[0] = np.diag([1.2, 0.5])
    bad[1] = np.diag([-0.2, 0.5])
    with pytest.raises(ConsistencyError):
        OverlapSet(good, bad, row_channels=(0, 1)).validate()
    with pytest.raises(ConfigError):
        OverlapSet(good, np.zeros((2, 3, 3)))


def test_separation_limit_for_free_packets():
    far = input_overlaps(_pair(dt=40.0), FREE)
    assert abs(far[1, 0]) <= 1e-10
    assert math.isclose(abs(input_overlaps(_pair(), FREE)[1, 0]), 1.0, abs_tol=1e-12)
