"""Experiment configuration and its JSON file format.

Channel numbers are 1-based in files and 0-based in Python objects.
Energies are in units of EPS0, times in 1/EPS0, momenta in 1/L and
positions in L (see :mod:`packetstats.physics`).  A mode may be given by
``center_momentum``/``momentum_width`` or, equivalently, by the total
``center_energy`` and ``energy_width``; files are always written in the
momentum form.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .linalg import StatisticsKind
from .overlap import QuadratureSettings
from .physics import (
    BreitWigner,
    ChannelSpec,
    ConstantUnitary,
    Diagonal,
    WavePacketMode,
    momentum_in_channel,
    momentum_width_for_energy_width,
)

__all__ = ["ExperimentConfig", "load_config", "dump_config", "config_from_dict",
           "config_to_dict"]

ALL_KINDS = (StatisticsKind.BOSON, StatisticsKind.FERMION, StatisticsKind.DISTINGUISHABLE)


@dataclass(frozen=True)
class ExperimentConfig:
    channels: tuple
    modes: tuple
    scatterer: object
    kinds: tuple = ALL_KINDS
    tau: float = 0.0
    sweep: tuple = ()
    quadrature: QuadratureSettings = field(default_factory=QuadratureSettings)
    observables: tuple = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "kinds", tuple(StatisticsKind.parse(k) for k in self.kinds))
        object.__setattr__(self, "sweep", tuple(float(t) for t in self.sweep))
        object.__setattr__(self, "observables", tuple(self.observables))
        if not self.modes:
            raise ConfigError("at least one mode is required")
        if not self.channels:
            raise ConfigError("at least one channel is required")
        if len({ch.mass for ch in self.channels}) != 1:
            raise ConfigError("all channels must share one mass")
        for mode in self.modes:
            if not 0 <= mode.channel < len(self.channels):
                raise ConfigError(f"mode refers to channel {mode.channel + 1}, "
                                  f"only {len(self.channels)} configured")
        if self.scatterer.n_channels != len(self.channels):
            raise ConfigError("scatterer and channel list disagree on N")

    @property
    def n_particles(self) -> int:
        return len(self.modes)

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    def with_quad_scale(self, scale: float) -> "ExperimentConfig":
        return replace(self, quadrature=replace(self.quadrature, scale=scale))


def _scatterer_from_dict(d: dict, n_channels: int):
    kind = d.get("kind", "").lower()
    if kind in ("breit_wigner", "breit-wigner", "bw"):
        return BreitWigner(float(d["resonance_energy"]), float(d["width"]),
                           int(d.get("n_channels", n_channels)), float(d.get("phase", 0.0)))
    if kind in ("constant_unitary", "unitary", "splitter"):
        rows = d["matrix"]
        u = np.array([[complex(*entry) if isinstance(entry, (list, tuple)) else complex(entry)
                       for entry in row] for row in rows])
        return ConstantUnitary(u)
    if kind == "diagonal":
        return Diagonal(tuple(float(x) for x in d.get("phases", [0.0] * n_channels)))
    raise ConfigError(f"unknown scatterer kind {kind!r}")


def _scatterer_to_dict(model) -> dict:
    if isinstance(model, BreitWigner):
        return {"kind": "breit_wigner", "resonance_energy": model.resonance_energy,
                "width": model.width, "phase": model.phase, "n_channels": model.n_channels}
    if isinstance(model, ConstantUnitary):
        return {"kind": "constant_unitary",
                "matrix": [[[z.real, z.imag] for z in row] for row in model.matrix.tolist()]}
    if isinstance(model, Diagonal):
        return {"kind": "diagonal", "phases": list(model.phases)}
    raise ConfigError(f"cannot serialize scatterer {model!r}")


def _mode_from_dict(d: dict, channels) -> WavePacketMode:
    try:
        ch = int(d["channel"]) - 1
    except (KeyError, TypeError, ValueError):
        raise ConfigError(f"mode without a valid channel: {d!r}") from None
    if not 0 <= ch < len(channels):
        raise ConfigError(f"mode channel {ch + 1} out of range")
    if "center_momentum" in d:
        p0 = float(d["center_momentum"])
        sigma = float(d["momentum_width"])
    elif "center_energy" in d:
        p0 = momentum_in_channel(float(d["center_energy"]), channels[ch])
        if p0 is None:
            raise ConfigError(f"mode energy {d['center_energy']} is below channel threshold")
        sigma = momentum_width_for_energy_width(float(d["energy_width"]), p0, channels[ch].mass)
    else:
        raise ConfigError("a mode needs center_momentum or center_energy")
    return WavePacketMode(
        channel=ch,
        center_momentum=p0,
        momentum_width=sigma,
        inject_position=float(d.get("inject_position", 0.0)),
        inject_time=float(d.get("inject_time", 0.0)),
        delay_weight=float(d.get("delay_weight", 0.0)),
    )


def _sweep_from_dict(d) -> tuple:
    if d is None:
        return ()
    if d.get("parameter", "tau") != "tau":
        raise ConfigError("only the delay 'tau' can be swept")
    if "values" in d:
        return tuple(float(v) for v in d["values"])
    num = int(d["num"])
    if num < 1:
        raise ConfigError("sweep needs at least one point")
    return tuple(float(v) for v in np.linspace(float(d["start"]), float(d["stop"]), num))


def config_from_dict(d: dict) -> ExperimentConfig:
    try:
        channels = tuple(ChannelSpec(float(c.get("threshold", 0.0)), float(c.get("mass", 1.0)))
                         for c in d["channels"])
        modes = tuple(_mode_from_dict(m, channels) for m in d["modes"])
        scatterer = _scatterer_from_dict(d["scatterer"], len(channels))
    except KeyError as exc:
        raise ConfigError(f"missing configuration key {exc}") from None
    quad = QuadratureSettings(**d.get("quadrature", {}))
    kinds = tuple(d.get("statistics", [k.value for k in ALL_KINDS]))
    return ExperimentConfig(
        channels=channels,
        modes=modes,
        scatterer=scatterer,
        kinds=kinds,
        tau=float(d.get("tau", 0.0)),
        sweep=_sweep_from_dict(d.get("sweep")),
        quadrature=quad,
        observables=tuple(d.get("observables", ())),
        name=str(d.get("name", "")),
    )


def config_to_dict(cfg: ExperimentConfig) -> dict:
    q = cfg.quadrature
    out = {
        "name": cfg.name,
        "channels": [{"threshold": c.threshold, "mass": c.mass} for c in cfg.channels],
        "modes": [
            {
                "channel": m.channel + 1,
                "center_momentum": m.center_momentum,
                "momentum_width": m.momentum_width,
                "inject_position": m.inject_position,
                "inject_time": m.inject_time,
                "delay_weight": m.delay_weight,
            }
            for m in cfg.modes
        ],
        "scatterer": _scatterer_to_dict(cfg.scatterer),
        "statistics": [k.value for k in cfg.kinds],
        "tau": cfg.tau,
        "quadrature": {
            "half_width": q.half_width,
            "base_nodes": q.base_nodes,
            "unitarity_tol": q.unitarity_tol,
            "convergence_tol": q.convergence_tol,
            "psd_tol": q.psd_tol,
            "scale": q.scale,
            "max_nodes": q.max_nodes,
        },
        "observables": list(cfg.observables),
    }
    if cfg.sweep:
        out["sweep"] = {"parameter": "tau", "values": list(cfg.sweep)}
    return out


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a JSON object")
    return config_from_dict(data)


def dump_config(cfg: ExperimentConfig, path) -> None:
    data = config_to_dict(cfg)
    for v in _floats(data):
        if not math.isfinite(v):
            raise ConfigError("configuration contains non-finite values")
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def _floats(obj):
    if isinstance(obj, float):
        yield obj
    elif isinstance(obj, dict):
        for v in obj.values():
            yield from _floats(v)
    elif isinstance(obj, list):
        for v in obj:
            yield from _floats(v)
