"""Built-in configurations.

``fig3``/``fig4``: a symmetric four-channel cavity with one resonance at
18 EPS0 (width 0.05 EPS0) above a common threshold of 9 EPS0.  One packet
enters channel 1 at t = 0 and two enter channel 2 at tau / 2 and tau, all
centred on the resonance with energy width equal to the resonance width.

``hom``: two synchronized packets hitting a balanced beam splitter from
opposite sides.
"""

from __future__ import annotations

import numpy as np

from .config import ExperimentConfig
from .errors import ConfigError
from .overlap import QuadratureSettings
from .physics import (
    BreitWigner,
    ChannelSpec,
    ConstantUnitary,
    Diagonal,
    WavePacketMode,
    momentum_in_channel,
    momentum_width_for_energy_width,
    resonance_energy,
)

__all__ = ["BUILTINS", "builtin", "cavity_config", "hom_config", "single_resonance_config",
           "diagonal_config", "CAVITY_THRESHOLD", "CAVITY_WIDTH", "CAVITY_RESONANCE",
           "PRESET_POINTS"]

CAVITY_THRESHOLD = 9.0
CAVITY_WIDTH = 0.05
CAVITY_RESONANCE = resonance_energy(3, 3)
PRESET_POINTS = 161

BALANCED_SPLITTER = np.array([[1.0, 1.0j], [1.0j, 1.0]]) / np.sqrt(2.0)


def _cavity_mode(channel: int, energy_width: float, delay_weight: float = 0.0,
                 energy: float = CAVITY_RESONANCE) -> WavePacketMode:
    lead = ChannelSpec(CAVITY_THRESHOLD)
    p0 = momentum_in_channel(energy, lead)
    return WavePacketMode(channel, p0, momentum_width_for_energy_width(energy_width, p0),
                          delay_weight=delay_weight)


def cavity_config(observables=(), energy_width: float = CAVITY_WIDTH,
                  points: int = PRESET_POINTS, tau_max_widths: float = 40.0,
                  name: str = "cavity") -> ExperimentConfig:
    """Three packets (channels 1, 2, 2) fed into the resonant 4-channel cavity."""
    modes = (
        _cavity_mode(0, energy_width, 0.0),
        _cavity_mode(1, energy_width, 0.5),
        _cavity_mode(1, energy_width, 1.0),
    )
    return ExperimentConfig(
        channels=(ChannelSpec(CAVITY_THRESHOLD),) * 4,
        modes=modes,
        scatterer=BreitWigner(CAVITY_RESONANCE, CAVITY_WIDTH, 4),
        sweep=np.linspace(0.0, tau_max_widths / CAVITY_WIDTH, points),
        quadrature=QuadratureSettings(),
        observables=observables,
        name=name,
    )


def single_resonance_config(energy_width: float = CAVITY_WIDTH / 10) -> ExperimentConfig:
    """One packet at the cavity resonance, for single-particle weights."""
    return ExperimentConfig(
        channels=(ChannelSpec(CAVITY_THRESHOLD),) * 4,
        modes=(_cavity_mode(0, energy_width),),
        scatterer=BreitWigner(CAVITY_RESONANCE, CAVITY_WIDTH, 4),
        observables=("W(1|1)", "W(1|2)", "W(1|3)", "W(1|4)"),
        name="resonance",
    )


def hom_config(delay: float = 0.0) -> ExperimentConfig:
    """Balanced splitter, one packet per input port, second one delayed."""
    channels = (ChannelSpec(0.0), ChannelSpec(0.0))
    modes = (
        WavePacketMode(0, 10.0, 0.5),
        WavePacketMode(1, 10.0, 0.5, inject_time=delay),
    )
    return ExperimentConfig(
        channels=channels,
        modes=modes,
        scatterer=ConstantUnitary(BALANCED_SPLITTER),
        observables=("W(1,1|1,2)", "W(2|1)", "W(2|2)", "n(1)"),
        name="hom",
    )


def diagonal_config() -> ExperimentConfig:
    """Three overlapping packets and a scatterer that never mixes channels."""
    channels = (ChannelSpec(0.0),) * 3
    modes = (
        WavePacketMode(0, 10.0, 0.5),
        WavePacketMode(0, 10.0, 0.5, inject_time=0.05),
        WavePacketMode(2, 10.0, 0.5, inject_time=0.02),
    )
    return ExperimentConfig(
        channels=channels,
        modes=modes,
        scatterer=Diagonal((0.3, -1.1, 2.0)),
        observables=("W(2|1)", "W(0|2)", "W(1|3)"),
        name="diagonal",
    )


BUILTINS = {
    "fig3": lambda: cavity_config(("W(3|3)", "W(0|3)", "n(3)"), name="fig3"),
    "fig4": lambda: cavity_config(("W(0,0|3,4)", "W(1|3)"), name="fig4"),
    "hom": hom_config,
    "resonance": single_resonance_config,
    "diagonal": diagonal_config,
}


def builtin(name: str) -> ExperimentConfig:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise ConfigError(f"unknown builtin {name!r}; choose from {sorted(BUILTINS)}") from None
