import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from packetstats.errors import ChannelClosedError, ConfigError
from packetstats.physics import (
    EPS0,
    BreitWigner,
    ChannelSpec,
    ConstantUnitary,
    Diagonal,
    WavePacketMode,
    channel_momenta,
    gaussian_amplitude,
    kinetic_energy,
    momentum_in_channel,
    momentum_width_for_energy_width,
    resonance_energy,
    s_matrix,
    unitarity_defect,
)

LEAD = ChannelSpec(threshold=9.0)
CAVITY = BreitWigner(18.0, 0.05, 4)


def test_resonance_energies():
    assert resonance_energy(3, 3) == 18
    assert resonance_energy(4, 1) == 17
    assert resonance_energy(1, 1) == 2
    with pytest.raises(ValueError):
        resonance_energy(0, 2)


def test_momentum_at_resonance():
    assert momentum_in_channel(18.0, LEAD) == pytest.approx(3 * math.pi, rel=1e-14)
    assert momentum_in_channel(9.0, LEAD) is None
    assert momentum_in_channel(5.0, LEAD) is None
    assert np.isnan(channel_momenta([5.0, 18.0], LEAD)[0])


def test_momentum_width_for_resonance_width():
    sigma = momentum_width_for_energy_width(0.05, 3 * math.pi)
    assert sigma == pytest.approx(0.05 * math.pi / 6, rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(excess=st.floats(1e-3, 100.0), threshold=st.floats(0.0, 50.0), mass=st.floats(0.2, 5.0))
def test_energy_momentum_round_trip(excess, threshold, mass):
    ch = ChannelSpec(threshold, mass)
    p = momentum_in_channel(threshold + excess, ch)
    assert kinetic_energy(p, mass) == pytest.approx(excess, rel=1e-12)


def test_amplitude_is_normalized():
    mode = WavePacketMode(0, 2.0, 0.45)
    p = np.linspace(-1, 6, 200001)
    norm = np.sum(gaussian_amplitude(p, mode) ** 2) * (p[1] - p[0])
    assert norm == pytest.approx(1.0, abs=1e-8)
    assert gaussian_amplitude(-0.1, mode) == 0.0


def test_mode_validation():
    with pytest.raises(ConfigError):
        WavePacketMode(0, 1.0, 0.3)
    with pytest.raises(ConfigError):
        WavePacketMode(-1, 1.0, 0.1)
    with pytest.raises(ConfigError):
        ChannelSpec(-1.0)
    assert WavePacketMode(0, 1.0, 0.1, inject_time=2.0, delay_weight=0.5).time_at(4.0) == 4.0


def test_breit_wigner_on_resonance():
    s = CAVITY(18.0)
    np.testing.assert_allclose(np.diag(s), 0.5, atol=1e-15)
    off = s[~np.eye(4, dtype=bool)]
    np.testing.assert_allclose(off, -0.5, atol=1e-15)
    np.testing.assert_allclose(np.abs(s) ** 2, 0.25, atol=1e-15)


def test_breit_wigner_far_from_resonance():
    s = CAVITY(18.0 + 1e5)
    assert np.max(np.abs(s - np.eye(4))) < 1e-6


def test_breit_wigner_unitary_everywhere():
    energies = np.random.default_rng(3).uniform(9.01, 30.0, 200)
    assert unitarity_defect(CAVITY(energies)) <= 1e-12
    assert unitarity_defect(BreitWigner(18.0, 0.05, 4, phase=0.7)(energies)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(energy=st.floats(9.5, 30.0), seed=st.integers(0, 1000))
def test_breit_wigner_permutation_symmetric(energy, seed):
    perm = np.random.default_rng(seed).permutation(4)
    s = CAVITY(energy)
    np.testing.assert_allclose(s[np.ix_(perm, perm)], s, atol=1e-15)


def test_vectorized_matches_scalar():
    e = np.array([17.9, 18.0, 18.2])
    stack = CAVITY(e)
    for k, ek in enumerate(e):
        np.testing.assert_array_equal(stack[k], CAVITY(ek))


def test_closed_channel_rejected():
    channels = [LEAD] * 4
    assert s_matrix(CAVITY, 18.0, channels).shape == (4, 4)
    with pytest.raises(ChannelClosedError):
        s_matrix(CAVITY, 8.0, channels)
    with pytest.raises(ConfigError):
        s_matrix(CAVITY, 18.0, channels[:3])


def test_constant_and_diagonal_models():
    with pytest.raises(ConfigError):
        ConstantUnitary(np.array([[1.0, 1.0], [0.0, 1.0]]))
    u = ConstantUnitary(np.array([[0, 1], [1, 0]]))
    assert u.n_channels == 2
    assert u(np.zeros(3)).shape == (3, 2, 2)
    d = Diagonal((0.0, math.pi / 2))
    np.testing.assert_allclose(d(1.0), np.diag([1.0, 1j]), atol=1e-15)


def test_eps0_value():
    assert EPS0 == pytest.approx(math.pi**2 / 2)
