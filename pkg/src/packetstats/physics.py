"""Channels, wave-packet modes and unitary scattering models.

Units
-----
hbar = mu = L = 1 for momenta (1/L) and positions (L).  Energies are
expressed in units of ``EPS0 = pi**2 / 2`` (the cavity level spacing of a
unit square) and times in units of ``1 / EPS0``, so a phase ``E * t`` is
dimensionless as written.  Kinetic energy is therefore
``p**2 / (2 * mu * EPS0)`` in these units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from .errors import ChannelClosedError, ConfigError

__all__ = [
    "EPS0",
    "ChannelSpec",
    "WavePacketMode",
    "BreitWigner",
    "ConstantUnitary",
    "Diagonal",
    "kinetic_energy",
    "momentum_in_channel",
    "channel_momenta",
    "group_velocity",
    "gaussian_amplitude",
    "momentum_width_for_energy_width",
    "s_matrix",
    "resonance_energy",
    "unitarity_defect",
]

EPS0 = math.pi**2 / 2
UNITARITY_TOL = 1e-12


@dataclass(frozen=True)
class ChannelSpec:
    """One scattering channel: threshold energy (units of EPS0) and mass."""

    threshold: float = 0.0
    mass: float = 1.0

    def __post_init__(self):
        if self.threshold < 0:
            raise ConfigError(f"channel threshold must be >= 0, got {self.threshold}")
        if self.mass <= 0:
            raise ConfigError(f"channel mass must be > 0, got {self.mass}")


@dataclass(frozen=True)
class WavePacketMode:
    """A Gaussian wave packet injected into one incoming channel.

    ``channel`` is a 0-based index.  The packet sits at ``inject_position``
    (negative values lie inside the inlet, upstream of the scatterer) at
    time ``inject_time + delay_weight * tau``, where ``tau`` is the sweep
    delay.  ``delay_weight`` is 0 for modes that do not move with the sweep.
    """

    channel: int
    center_momentum: float
    momentum_width: float
    inject_position: float = 0.0
    inject_time: float = 0.0
    delay_weight: float = 0.0

    def __post_init__(self):
        if self.channel < 0:
            raise ConfigError(f"channel index must be >= 0, got {self.channel}")
        if not self.center_momentum > 0:
            raise ConfigError("center_momentum must be positive")
        if not self.momentum_width > 0:
            raise ConfigError("momentum_width must be positive")
        if not self.momentum_width < self.center_momentum / 4:
            raise ConfigError(
                "momentum_width must be below center_momentum / 4 "
                f"(got {self.momentum_width} vs {self.center_momentum})"
            )

    def time_at(self, tau: float) -> float:
        return self.inject_time + self.delay_weight * tau


def kinetic_energy(p, mass: float = 1.0):
    return np.square(p) / (2.0 * mass * EPS0)


def group_velocity(p, mass: float = 1.0):
    """dE/dp, in units of L * EPS0."""
    return np.asarray(p) / (mass * EPS0)


def momentum_in_channel(energy: float, channel: ChannelSpec) -> float | None:
    """Momentum carried in ``channel`` at total energy ``energy``.

    Returns None when the channel is closed (``energy <= threshold``).
    """
    excess = energy - channel.threshold
    if excess <= 0:
        return None
    return math.sqrt(2.0 * channel.mass * EPS0 * excess)


def channel_momenta(energy, channel: ChannelSpec) -> np.ndarray:
    """Vectorized :func:`momentum_in_channel`; closed points are NaN."""
    excess = np.asarray(energy, dtype=float) - channel.threshold
    out = np.full(excess.shape, np.nan)
    open_ = excess > 0
    out[open_] = np.sqrt(2.0 * channel.mass * EPS0 * excess[open_])
    return out


def _gaussian_norm(mode: WavePacketMode) -> float:
    # integral of exp(-(p - p0)^2 / (2 s^2)) over p > 0
    s = mode.momentum_width
    mass = s * math.sqrt(math.pi / 2) * (1.0 + erf(mode.center_momentum / (s * math.sqrt(2))))
    return 1.0 / math.sqrt(mass)


def gaussian_amplitude(p, mode: WavePacketMode):
    """Momentum amplitude A(p) of a mode, zero for p < 0.

    ``|A|**2`` is a Gaussian of standard deviation ``momentum_width``
    truncated to p > 0 and normalized to one on that half line.
    """
    p = np.asarray(p, dtype=float)
    d = p - mode.center_momentum
    amp = _gaussian_norm(mode) * np.exp(-(d * d) / (4.0 * mode.momentum_width**2))
    amp = np.where(p >= 0, amp, 0.0)
    return amp if amp.ndim else float(amp)


def momentum_width_for_energy_width(energy_width: float, center_momentum: float,
                                    mass: float = 1.0) -> float:
    """sigma_p giving energy spread ``energy_width`` at ``center_momentum``."""
    return energy_width / float(group_velocity(center_momentum, mass))


def resonance_energy(l1: int, l2: int, size: float = 1.0, mass: float = 1.0) -> float:
    """Level ``(l1, l2)`` of a hard-walled square cavity, in units of EPS0."""
    if l1 < 1 or l2 < 1:
        raise ValueError("cavity quantum numbers start at 1")
    return (l1 * l1 + l2 * l2) / (mass * size * size)


def unitarity_defect(s) -> float:
    """max |S^H S - 1| over a matrix or a stack of matrices."""
    s = np.asarray(s)
    n = s.shape[-1]
    prod = np.conj(np.swapaxes(s, -1, -2)) @ s
    return float(np.max(np.abs(prod - np.eye(n))))


@dataclass(frozen=True)
class BreitWigner:
    """Single isolated resonance coupled equally to all channels.

    S_mk(E) = exp(i phase) * [delta_mk - (i width / N) / (E - E_res + i width / 2)]
    """

    resonance_energy: float
    width: float
    n_channels: int
    phase: float = 0.0

    def __post_init__(self):
        if self.width <= 0:
            raise ConfigError("resonance width must be positive")
        if self.n_channels < 1:
            raise ConfigError("n_channels must be >= 1")

    @property
    def feature_scale(self) -> float:
        return self.width

    def __call__(self, energy) -> np.ndarray:
        e = np.atleast_1d(np.asarray(energy, dtype=float))
        n = self.n_channels
        pole = (1j * self.width / n) / ((e - self.resonance_energy) + 0.5j * self.width)
        s = np.eye(n, dtype=complex)[None, :, :] - pole[:, None, None]
        s *= np.exp(1j * self.phase)
        return s if np.ndim(energy) else s[0]


@dataclass(frozen=True)
class ConstantUnitary:
    """Energy-independent unitary, e.g. a beam splitter."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        u = np.array(self.matrix, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ConfigError(f"scattering matrix must be square, got shape {u.shape}")
        if unitarity_defect(u) > UNITARITY_TOL:
            raise ConfigError(f"matrix is not unitary (defect {unitarity_defect(u):.3g})")
        u.setflags(write=False)
        object.__setattr__(self, "matrix", u)

    def __eq__(self, other):
        return isinstance(other, ConstantUnitary) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash(self.matrix.tobytes())

    @property
    def n_channels(self) -> int:
        return self.matrix.shape[0]

    feature_scale = None

    def __call__(self, energy) -> np.ndarray:
        if np.ndim(energy) == 0:
            return self.matrix.copy()
        return np.broadcast_to(self.matrix, (len(energy),) + self.matrix.shape).copy()


@dataclass(frozen=True)
class Diagonal:
    """No channel mixing: each channel only picks up a constant phase."""

    phases: tuple

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(float(x) for x in self.phases))

    @property
    def n_channels(self) -> int:
        return len(self.phases)

    feature_scale = None

    def __call__(self, energy) -> np.ndarray:
        d = np.diag(np.exp(1j * np.asarray(self.phases)))
        if np.ndim(energy) == 0:
            return d
        return np.broadcast_to(d, (len(energy),) + d.shape).copy()


def s_matrix(model, energy, channels: list[ChannelSpec] | None = None) -> np.ndarray:
    """Evaluate a scattering model at one total energy.

    When ``channels`` is given, every channel must be open at ``energy``;
    none of the models here describe threshold behaviour.
    """
    if channels is not None:
        if len(channels) != model.n_channels:
            raise ConfigError(
                f"model has {model.n_channels} channels, {len(channels)} were given"
            )
        closed = [k for k, ch in enumerate(channels) if energy <= ch.threshold]
        if closed:
            raise ChannelClosedError(f"channels {closed} are closed at E = {energy}")
    return model(float(energy))
