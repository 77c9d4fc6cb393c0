"""Single runs, delay sweeps and the invariant audit.

Observables are written the way they appear in tables, with 1-based
channels: ``W(3|3)`` (three particles in channel 3), ``W(0,0|3,4)``
(none in channels 3 and 4), ``n(3)`` (mean number in channel 3).
"""

from __future__ import annotations

import itertools
import logging
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import counting
from .errors import ConfigError, ConsistencyError, DegenerateInputError, PacketStatsError
from .linalg import StatisticsKind, determinant, permanent
from .overlap import OverlapSet, overlap_set
from .physics import Diagonal

__all__ = ["Observable", "parse_observable", "SweepResult", "evaluate_point", "run_sweep",
           "overlap_diagnostics", "single_run", "audit", "AuditCheck", "pileup"]

log = logging.getLogger(__name__)

_OBS_RE = re.compile(r"^\s*(W|n)\(\s*([0-9,\s]*?)\s*(?:\|\s*([0-9,\s]+))?\s*\)\s*$")


@dataclass(frozen=True)
class Observable:
    text: str
    channels: tuple  # 0-based
    counts: tuple = ()  # empty for a mean number

    @property
    def is_mean(self) -> bool:
        return not self.counts

    def evaluate(self, dist: counting.CountingDistribution) -> float:
        if self.is_mean:
            return float(counting.mean_numbers(dist)[self.channels[0]])
        return counting.joint_probability(dist, self.channels, self.counts)


def parse_observable(text: str, n_channels: int) -> Observable:
    m = _OBS_RE.match(text)
    if not m:
        raise ConfigError(f"cannot parse observable {text!r}")
    head, first, second = m.groups()

    def ints(s):
        return tuple(int(x) for x in s.replace(" ", "").split(",") if x)

    if head == "n":
        if second is not None or len(ints(first)) != 1:
            raise ConfigError(f"mean number takes one channel: {text!r}")
        channels, counts = ints(first), ()
    else:
        if second is None:
            raise ConfigError(f"probability needs counts|channels: {text!r}")
        counts, channels = ints(first), ints(second)
        if len(counts) != len(channels) or not channels:
            raise ConfigError(f"counts and channels differ in number: {text!r}")
    if any(not 1 <= c <= n_channels for c in channels) or len(set(channels)) != len(channels):
        raise ConfigError(f"bad channel list in {text!r}")
    return Observable(text.replace(" ", ""), tuple(c - 1 for c in channels), counts)


def pileup(ov: OverlapSet) -> float:
    """Largest overlap between scattered parts of different modes."""
    j = ov.n_particles
    if j < 2:
        return 0.0
    off = ~np.eye(j, dtype=bool)
    return float(np.max(np.abs(ov.Q[:, off])))


def _distributions(ov, kinds):
    out = {}
    for kind in kinds:
        try:
            out[kind] = counting.full_distribution(ov, kind)
        except DegenerateInputError:
            out[kind] = None
    return out


@dataclass
class SweepResult:
    """One row per delay value; ``columns`` are (name, unit) pairs."""

    columns: list
    rows: list = field(default_factory=list)
    title: str = ""

    def column(self, name: str) -> np.ndarray:
        names = [c[0] for c in self.columns]
        k = names.index(name)
        return np.array([float(r[k]) for r in self.rows])

    def write(self, path) -> None:
        from .io import write_table

        write_table(path, self.columns, self.rows, self.title)


def _columns(observables, kinds):
    cols = [("tau", "1/eps0"), ("per_I", "1"), ("det_I", "1"), ("max_abs_I_minus_1", "1"),
            ("uncorrelated", "flag"), ("pileup", "1")]
    for obs in observables:
        unit = "particles" if obs.is_mean else "probability"
        for kind in kinds:
            cols.append((f"{obs.text}[{kind.value}]", unit))
    cols.append(("audit", "1=pass,0=fail,-1=not asserted"))
    return cols


def evaluate_point(config, tau: float, observables, kinds) -> list:
    """Values of one sweep row (see :func:`run_sweep` for the columns)."""
    ov = overlap_set(config, tau)
    dists = _distributions(ov, kinds)
    row = [tau, permanent(ov.I).real, determinant(ov.I).real, ov.correlation(),
           ov.correlation() <= counting.UNCORRELATED_TOL, pileup(ov)]
    for obs in observables:
        for kind in kinds:
            dist = dists[kind]
            row.append(math.nan if dist is None else obs.evaluate(dist))
    report = counting.inequality_audit(ov, strict=False)
    row.append((1 if report.satisfied else 0) if report.uncorrelated else -1)
    return row


def _warm_up():
    # compile numba kernels once before worker threads race for them
    permanent(np.eye(2))


def run_sweep(config, kinds=None, threads: int = 1, taus=None) -> SweepResult:
    """Evaluate the configured observables for every delay in the sweep."""
    kinds = tuple(StatisticsKind.parse(k) for k in (kinds or config.kinds))
    taus = list(taus if taus is not None else (config.sweep or (config.tau,)))
    observables = [parse_observable(o, config.n_channels) for o in config.observables]
    result = SweepResult(_columns(observables, kinds), title=f"sweep {config.name}".strip())
    _warm_up()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda t: evaluate_point(config, t, observables, kinds), taus))
    else:
        rows = [evaluate_point(config, t, observables, kinds) for t in taus]
    result.rows = sorted(rows, key=lambda r: r[0])
    return result


def overlap_diagnostics(config, kinds=None, threads: int = 1) -> SweepResult:
    """per(I), det(I), correlation and mean numbers for every delay."""
    kinds = tuple(StatisticsKind.parse(k) for k in (kinds or config.kinds))
    taus = list(config.sweep or (config.tau,))
    cols = [("tau", "1/eps0"), ("per_I", "1"), ("det_I", "1"), ("max_abs_I_minus_1", "1"),
            ("uncorrelated", "flag")]
    for m in range(config.n_channels):
        for kind in kinds:
            cols.append((f"n({m + 1})[{kind.value}]", "particles"))

    def point(tau):
        ov = overlap_set(config, tau)
        row = [tau, permanent(ov.I).real, determinant(ov.I).real, ov.correlation(),
               ov.correlation() <= counting.UNCORRELATED_TOL]
        means = {}
        for kind in kinds:
            try:
                means[kind] = counting.mean_numbers_direct(ov, kind)
            except DegenerateInputError:
                means[kind] = np.full(config.n_channels, math.nan)
        for m in range(config.n_channels):
            row.extend(means[kind][m] for kind in kinds)
        return row

    _warm_up()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(point, taus))
    else:
        rows = [point(t) for t in taus]
    return SweepResult(cols, sorted(rows, key=lambda r: r[0]),
                       f"overlap diagnostics {config.name}".strip())


def single_run(config, kinds=None, tau=None):
    """Overlaps and full distributions at one delay.

    Returns ``(overlaps, {kind: distribution or None})``; None marks a
    fermion configuration whose input state vanishes.
    """
    kinds = tuple(StatisticsKind.parse(k) for k in (kinds or config.kinds))
    ov = overlap_set(config, config.tau if tau is None else tau)
    return ov, _distributions(ov, kinds)


@dataclass
class AuditCheck:
    name: str
    tau: float
    status: str  # "pass", "fail" or "skip"
    detail: str = ""
    category: str = "consistency"


def _check(results, name, tau, fn, category="consistency"):
    try:
        detail = fn()
    except counting.InequalityViolation as exc:
        results.append(AuditCheck(name, tau, "fail", str(exc), "inequality"))
    except _Skip as exc:
        results.append(AuditCheck(name, tau, "skip", str(exc), category))
    except (PacketStatsError, AssertionError) as exc:
        results.append(AuditCheck(name, tau, "fail", str(exc), category))
    else:
        results.append(AuditCheck(name, tau, "pass", detail or "", category))


class _Skip(Exception):
    pass


def _require(cond, message):
    if not cond:
        raise AssertionError(message)


def audit(config, kinds=None, taus=None) -> list:
    """Run every invariant at each delay; returns a list of AuditCheck."""
    kinds = tuple(StatisticsKind.parse(k) for k in (kinds or config.kinds))
    taus = list(taus if taus is not None else (config.sweep or (config.tau,)))
    results = []
    for tau in taus:
        _audit_point(config, kinds, tau, results)
    return results


def _audit_point(config, kinds, tau, results):
    holder = {}

    def overlaps():
        holder["ov"] = overlap_set(config, tau, validate=False)
        r = holder["ov"].report
        return f"{r['nodes']} nodes, doubling delta {r['convergence_delta']:.2e}"

    _check(results, "quadrature converged", tau, overlaps, "convergence")
    ov = holder.get("ov")
    if ov is None:
        return
    quad = config.quadrature

    def structure():
        ov.validate(quad.unitarity_tol, quad.psd_tol)
        return f"completeness defect {ov.completeness_defect():.2e}"

    _check(results, "hermitian/PSD/completeness", tau, structure)
    J, N = ov.n_particles, ov.n_channels
    dists = {}
    for kind in kinds:
        label = kind.value

        def dist(kind=kind):
            try:
                dists[kind] = counting.full_distribution(ov, kind)
            except DegenerateInputError as exc:
                raise _Skip(str(exc)) from None
            d = dists[kind]
            _require(d.normalization_residual <= 1e-6,
                     f"normalization residual {d.normalization_residual:.2e}")
            _require(min(d.probabilities.values()) >= -1e-10, "negative probability")
            return f"sum - 1 = {d.normalization_residual:.1e}"

        _check(results, f"normalization [{label}]", tau, dist)
        d = dists.get(kind)
        if d is None:
            continue

        def means(d=d):
            nbar = counting.mean_numbers(d)
            _require(abs(nbar.sum() - J) <= 1e-8, f"sum of means {nbar.sum()!r} != {J}")
            return "two routes agree"

        def marginals(d=d):
            for m in range(N):
                counting.single_channel_marginal(d, m)
            return "two routes agree"

        def zeros(d=d):
            for size in range(1, N):
                for subset in itertools.combinations(range(N), size):
                    counting.joint_probability(d, subset, [0] * size)
            return "two routes agree"

        def dft(d=d, kind=kind):
            if J > 8 or N > 6:
                raise _Skip("outside oracle limits")
            other = counting.dft_coefficient_oracle(ov, kind)
            gap = max(abs(d.probabilities[k] - other.probabilities[k]) for k in d.probabilities)
            _require(gap <= 1e-9, f"DFT oracle differs by {gap:.2e}")
            _require(other.imag_residual <= 1e-10,
                     f"off-shell coefficient {other.imag_residual:.2e}")
            return f"max gap {gap:.1e}"

        _check(results, f"mean numbers [{label}]", tau, means)
        _check(results, f"single-channel marginals [{label}]", tau, marginals)
        _check(results, f"no-particle probabilities [{label}]", tau, zeros)
        _check(results, f"DFT oracle [{label}]", tau, dft)

    def mean_invariance():
        if ov.correlation() > 1e-8:
            raise _Skip("initially correlated")
        ref = counting.mean_numbers_direct(ov, StatisticsKind.DISTINGUISHABLE)
        for kind, d in dists.items():
            gap = float(np.max(np.abs(counting.mean_numbers(d, check=False) - ref)))
            _require(gap <= 1e-8, f"{kind.value} means differ from DP by {gap:.2e}")
        return "identical means"

    def inequalities():
        report = counting.inequality_audit(ov)
        if not report.uncorrelated:
            raise _Skip(f"correlated, max|I-1| = {report.correlation:.2e}")
        worst = min(min(e.boson_margin, e.fermion_margin if not math.isnan(e.fermion)
                        else math.inf) for e in report.entries)
        return f"{len(report.entries)} inequalities, min margin {worst:.2e}"

    def diagonal():
        if not isinstance(config.scatterer, Diagonal):
            raise _Skip("scatterer mixes channels")
        ds = [d for d in dists.values()]
        for a, b in itertools.combinations(ds, 2):
            gap = max(abs(a.probabilities[k] - b.probabilities[k]) for k in a.probabilities)
            _require(gap <= 1e-10, f"{a.kind.value} vs {b.kind.value} differ by {gap:.2e}")
        return "all kinds coincide"

    _check(results, "mean invariance", tau, mean_invariance)
    _check(results, "bunching inequalities", tau, inequalities, "inequality")
    _check(results, "diagonal-scatterer equivalence", tau, diagonal)
