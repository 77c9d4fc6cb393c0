"""Overlap matrices of incoming and scattered wave-packet modes.

All integrals are evaluated on one Gauss-Legendre grid in the momentum
``q`` of the lowest-threshold channel, which is a monotone
reparametrization of the total energy.  A mode injected in channel ``k``
contributes the energy-normalized amplitude

    b(q) = A(p_k) * sqrt(dp_k / dq) * exp(-i p_k x_in + i E t_in)

with ``p_k = p_k(q)`` fixed by energy conservation.  Since the scattering
matrix is unitary at every node, the outgoing overlaps summed over exit
channels reproduce the input overlaps node by node.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre

from .errors import ConfigError, ConsistencyError, ConvergenceError
from .linalg import is_psd
from .physics import EPS0, ChannelSpec, WavePacketMode, gaussian_amplitude, group_velocity

__all__ = [
    "QuadratureSettings",
    "OverlapSet",
    "input_overlaps",
    "outgoing_overlaps",
    "compute_overlaps",
    "overlap_set",
    "sorted_mode_order",
]


@dataclass(frozen=True)
class QuadratureSettings:
    """Knobs of the overlap quadrature.

    ``half_width`` is the packet support in units of its momentum width.
    The node count grows with the largest arrival-time spread so the
    phase ``exp(-i E dt)`` stays resolved; ``scale`` multiplies it.
    """

    half_width: float = 8.0
    base_nodes: int = 64
    unitarity_tol: float = 1e-8
    convergence_tol: float = 1e-9
    psd_tol: float = 1e-10
    scale: float = 1.0
    max_nodes: int = 1 << 16

    def __post_init__(self):
        if self.base_nodes < 64 or self.base_nodes % 2:
            raise ConfigError("base_nodes must be even and >= 64")
        if self.half_width <= 0 or self.scale <= 0:
            raise ConfigError("half_width and scale must be positive")


@dataclass
class OverlapSet:
    """Input overlaps ``I`` and per-exit-channel outgoing overlaps ``Q[m]``.

    Row ``r`` of every matrix refers to mode ``mode_order[r]`` of the
    configuration, which entered through channel ``row_channels[r]``.
    ``Q[m][i, j]`` is the scalar product of the parts of modes ``j`` (bra)
    and ``i`` (ket) leaving through channel ``m``.
    """

    I: np.ndarray
    Q: np.ndarray
    mode_order: tuple = ()
    row_channels: tuple = ()
    report: dict = field(default_factory=dict)

    def __post_init__(self):
        self.I = np.asarray(self.I, dtype=complex)
        self.Q = np.asarray(self.Q, dtype=complex)
        j = self.I.shape[0]
        if self.I.shape != (j, j) or self.Q.ndim != 3 or self.Q.shape[1:] != (j, j):
            raise ConfigError(f"inconsistent shapes I{self.I.shape}, Q{self.Q.shape}")
        if not self.mode_order:
            self.mode_order = tuple(range(j))
        self.mode_order = tuple(self.mode_order)
        self.row_channels = tuple(self.row_channels)

    @property
    def n_particles(self) -> int:
        return self.I.shape[0]

    @property
    def n_channels(self) -> int:
        return self.Q.shape[0]

    def residual(self, channels) -> np.ndarray:
        """``I - sum(Q[m] for m in channels)``."""
        r = self.I.copy()
        for m in channels:
            r -= self.Q[m]
        return r

    def completeness_defect(self) -> float:
        return float(np.max(np.abs(self.Q.sum(axis=0) - self.I)))

    def correlation(self) -> float:
        """max |I - 1|; zero for initially uncorrelated particles."""
        return float(np.max(np.abs(self.I - np.eye(self.n_particles))))

    def validate(self, unitarity_tol: float = 1e-8, psd_tol: float = 1e-10,
                 max_subset_channels: int = 10) -> None:
        """Check every structural identity, raising ConsistencyError on failure."""
        mats = {"I": self.I, **{f"Q({m + 1})": q for m, q in enumerate(self.Q)}}
        for name, a in mats.items():
            if np.max(np.abs(a - a.conj().T), initial=0.0) > 1e-13:
                raise ConsistencyError(f"{name} is not Hermitian")
        if np.max(np.abs(np.diag(self.I) - 1), initial=0.0) > 1e-12:
            raise ConsistencyError("I does not have a unit diagonal")
        if self.row_channels:
            rc = np.asarray(self.row_channels)
            cross = rc[:, None] != rc[None, :]
            if np.any(self.I[cross] != 0):
                raise ConsistencyError("I couples modes of different input channels")
        defect = self.completeness_defect()
        if defect > unitarity_tol:
            raise ConsistencyError(f"sum_m Q(m) != I: defect {defect:.3g}")
        for name, a in mats.items():
            if not is_psd(a, psd_tol):
                raise ConsistencyError(f"{name} is not positive semidefinite")
        if self.n_channels <= max_subset_channels:
            for size in range(2, self.n_channels):
                for subset in itertools.combinations(range(self.n_channels), size):
                    if not is_psd(self.residual(subset), psd_tol):
                        raise ConsistencyError(f"I - Q over {subset} is not PSD")


def sorted_mode_order(modes, tau: float = 0.0) -> list[int]:
    """Modes ordered by (input channel, injection time); ties keep input order."""
    return sorted(range(len(modes)), key=lambda i: (modes[i].channel, modes[i].time_at(tau)))


@functools.lru_cache(maxsize=64)
def _legendre(n: int):
    x, w = roots_legendre(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _check_modes(modes, channels):
    if not modes:
        raise ConfigError("at least one mode is required")
    masses = {ch.mass for ch in channels}
    if len(masses) != 1:
        raise ConfigError("all channels must share the same mass")
    for mode in modes:
        if mode.channel >= len(channels):
            raise ConfigError(f"mode channel {mode.channel} out of range")


class _Grid:
    """Momentum grid of the reference (lowest-threshold) channel."""

    def __init__(self, modes, channels, settings: QuadratureSettings, tau: float,
                 feature_scale: float | None):
        self.mass = channels[0].mass
        self.e_ref = min(ch.threshold for ch in channels)
        lo, hi, arrivals = [], [], []
        for mode in modes:
            shift = self._shift(channels[mode.channel])
            w = settings.half_width * mode.momentum_width
            p_lo = max(mode.center_momentum - w, 0.0)
            p_hi = mode.center_momentum + w
            lo.append(math.sqrt(p_lo**2 + shift))
            hi.append(math.sqrt(p_hi**2 + shift))
            v = float(group_velocity(mode.center_momentum, self.mass))
            arrivals.append(mode.time_at(tau) - mode.inject_position / v)
        self.q_lo, self.q_hi = min(lo), max(hi)
        span = float(self.energy(self.q_hi) - self.energy(self.q_lo))
        spread = max(arrivals) - min(arrivals)
        n = settings.base_nodes * (1.0 + span * spread / (2 * math.pi * settings.half_width))
        if feature_scale:
            n = max(n, 8.0 * span / feature_scale)
        n = int(math.ceil(settings.scale * n))
        self.start_nodes = max(settings.base_nodes, n + (n % 2))

    def _shift(self, channel: ChannelSpec) -> float:
        return 2.0 * self.mass * EPS0 * (channel.threshold - self.e_ref)

    def energy(self, q):
        return self.e_ref + np.square(q) / (2.0 * self.mass * EPS0)

    def nodes(self, n: int):
        x, w = _legendre(n)
        half = 0.5 * (self.q_hi - self.q_lo)
        q = self.q_lo + half * (x + 1.0)
        return q, w * half

    def amplitudes(self, modes, channels, q, tau: float) -> np.ndarray:
        energy = self.energy(q)
        out = np.zeros((len(modes), q.size), dtype=complex)
        for r, mode in enumerate(modes):
            p2 = np.square(q) - self._shift(channels[mode.channel])
            open_ = p2 > 0
            p = np.sqrt(np.where(open_, p2, 1.0))
            jac = np.where(open_, np.sqrt(q / p), 0.0)
            phase = -p * mode.inject_position + energy * mode.time_at(tau)
            out[r] = gaussian_amplitude(p, mode) * jac * np.exp(1j * phase)
        return out


def _evaluate(modes, channels, scatterer, grid: _Grid, n: int, tau: float):
    q, w = grid.nodes(n)
    b = grid.amplitudes(modes, channels, q, tau)
    norms = np.einsum("n,in->i", w, np.abs(b) ** 2)
    if np.any(norms <= 0):
        raise ConvergenceError("a mode has no weight on the quadrature grid")
    b /= np.sqrt(norms)[:, None]
    rc = np.array([mode.channel for mode in modes])
    same = rc[:, None] == rc[None, :]
    bw = b * w
    identity = np.where(same, bw @ b.conj().T, 0.0)
    identity = 0.5 * (identity + identity.conj().T)
    np.fill_diagonal(identity, 1.0)
    q_mats = None
    if scatterer is not None:
        s = scatterer(grid.energy(q))  # (n, N, N)
        # scattered amplitude of row r into exit m: S[m, channel(r)] * b_r
        out = np.transpose(s[:, :, rc], (1, 2, 0)) * b[None, :, :]  # (N, J, n)
        q_mats = np.einsum("min,mjn->mij", out * w, out.conj())
        q_mats = 0.5 * (q_mats + np.conj(np.swapaxes(q_mats, 1, 2)))
    return identity, q_mats, norms


def _converged(modes, channels, scatterer, settings, tau):
    feature = getattr(scatterer, "feature_scale", None) if scatterer is not None else None
    grid = _Grid(modes, channels, settings, tau, feature)
    n = grid.start_nodes
    prev = _evaluate(modes, channels, scatterer, grid, n, tau)
    doublings = 0
    while True:
        if 2 * n > settings.max_nodes:
            raise ConvergenceError(
                f"overlaps not converged within {settings.max_nodes} nodes"
            )
        cur = _evaluate(modes, channels, scatterer, grid, 2 * n, tau)
        delta = float(np.max(np.abs(cur[0] - prev[0])))
        if scatterer is not None:
            delta = max(delta, float(np.max(np.abs(cur[1] - prev[1]))))
        n *= 2
        doublings += 1
        if delta <= settings.convergence_tol:
            report = {
                "nodes": n,
                "doublings": doublings,
                "convergence_delta": delta,
                "norm_defect": float(np.max(np.abs(cur[2] - 1.0))),
                "q_range": (grid.q_lo, grid.q_hi),
            }
            return cur[0], cur[1], report
        prev = cur


def _sorted(modes, tau):
    order = sorted_mode_order(modes, tau)
    return order, [modes[i] for i in order]


def input_overlaps(modes, channels, quad: QuadratureSettings | None = None,
                   tau: float = 0.0) -> np.ndarray:
    """Gram matrix of the incoming modes, rows sorted by (channel, time).

    Modes in different input channels are orthogonal by construction, and
    the diagonal is exactly one.
    """
    quad = quad or QuadratureSettings()
    _check_modes(modes, channels)
    _, ordered = _sorted(modes, tau)
    identity, _, _ = _converged(ordered, channels, None, quad, tau)
    return identity


def outgoing_overlaps(modes, channels, scatterer, m: int,
                      quad: QuadratureSettings | None = None, tau: float = 0.0) -> np.ndarray:
    """Gram matrix of the parts of all modes leaving through channel ``m``."""
    quad = quad or QuadratureSettings()
    _check_modes(modes, channels)
    if not 0 <= m < scatterer.n_channels:
        raise ConfigError(f"exit channel {m} out of range")
    _, ordered = _sorted(modes, tau)
    _, q_mats, _ = _converged(ordered, channels, scatterer, quad, tau)
    return q_mats[m]


def compute_overlaps(modes, channels, scatterer, quad: QuadratureSettings | None = None,
                     tau: float = 0.0, validate: bool = True) -> OverlapSet:
    """Input and outgoing overlaps for one delay value."""
    quad = quad or QuadratureSettings()
    _check_modes(modes, channels)
    if scatterer.n_channels != len(channels):
        raise ConfigError(
            f"scatterer has {scatterer.n_channels} channels, {len(channels)} configured"
        )
    order, ordered = _sorted(modes, tau)
    identity, q_mats, report = _converged(ordered, channels, scatterer, quad, tau)
    ov = OverlapSet(identity, q_mats, tuple(order), tuple(m.channel for m in ordered), report)
    report["completeness_defect"] = ov.completeness_defect()
    report["tau"] = tau
    if validate:
        ov.validate(quad.unitarity_tol, quad.psd_tol)
    return ov


def overlap_set(config, tau: float | None = None, validate: bool = True) -> OverlapSet:
    """Overlaps for an :class:`~packetstats.config.ExperimentConfig`."""
    tau = config.tau if tau is None else tau
    return compute_overlaps(config.modes, config.channels, config.scatterer,
                            config.quadrature, tau, validate)
