"""Full counting statistics from an :class:`~packetstats.overlap.OverlapSet`.

For identical particles the generating function is

    G(alpha) = S[T(alpha)] / S[I],   T(alpha) = sum_m alpha_m Q(m),

with ``S`` the permanent (bosons) or determinant (fermions).  Because ``S``
is multilinear in the rows, expanding row ``i`` of ``T`` over exit
channels gives

    S[T(alpha)] = sum_c prod_i alpha_{c_i} S[M(c)],

where ``c`` assigns an exit channel to every row and row ``i`` of ``M(c)``
is row ``i`` of ``Q(c_i)``.  The probability of an occupation vector is
the sum of ``S[M(c)] / S[I]`` over the assignments producing it.

Distinguishable particles scatter independently with single-particle
weights ``w(m, i) = Q(m)[i, i]``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConsistencyError,
    DegenerateInputError,
    InequalityViolation,
    SizeLimitError,
)
from .linalg import StatisticsKind, s_pm, s_pm_batch
from .overlap import OverlapSet

__all__ = [
    "CountingDistribution",
    "InequalityReport",
    "InequalityEntry",
    "outcome_count",
    "occupations",
    "full_distribution",
    "dp_weights",
    "single_channel_marginal",
    "marginal_from_overlaps",
    "mean_numbers",
    "mean_numbers_direct",
    "joint_probability",
    "no_particle_probability",
    "all_particle_probability",
    "inequality_audit",
    "dft_coefficient_oracle",
]

DEGENERATE_TOL = 1e-12
ROUTE_TOL = 1e-10
UNCORRELATED_TOL = 0.01
_CHUNK = 1 << 14


def outcome_count(n_particles: int, n_channels: int) -> int:
    """Number of ways to distribute J identical particles over N channels."""
    if n_particles < 0 or n_channels < 1:
        raise ValueError("need J >= 0 and N >= 1")
    count = math.comb(n_particles + n_channels - 1, n_channels - 1)
    if count >= 1 << 63:
        raise SizeLimitError(f"outcome count C({n_particles + n_channels - 1}, "
                             f"{n_channels - 1}) overflows 64 bits")
    return count


def occupations(n_particles: int, n_channels: int) -> list[tuple]:
    """All occupation vectors summing to J, in reverse lexicographic order."""
    if n_channels == 1:
        return [(n_particles,)]
    out = []
    for first in range(n_particles, -1, -1):
        for rest in occupations(n_particles - first, n_channels - 1):
            out.append((first,) + rest)
    return out


@dataclass
class CountingDistribution:
    """Probabilities of every occupation vector for one statistics kind.

    ``probabilities`` holds raw values, so rounding may leave tiny
    negatives; :meth:`clipped` is the form meant for reports.
    """

    kind: StatisticsKind
    n_particles: int
    n_channels: int
    probabilities: dict
    imag_residual: float = 0.0
    overlaps: OverlapSet | None = field(default=None, repr=False)

    @property
    def normalization_residual(self) -> float:
        return abs(math.fsum(self.probabilities.values()) - 1.0)

    def __getitem__(self, occupation) -> float:
        occupation = tuple(int(n) for n in occupation)
        if len(occupation) != self.n_channels or min(occupation) < 0:
            raise KeyError(occupation)
        return self.probabilities.get(occupation, 0.0)

    def __iter__(self):
        return iter(self.probabilities)

    def items(self):
        return self.probabilities.items()

    def clipped(self) -> dict:
        return {k: max(v, 0.0) for k, v in self.probabilities.items()}

    def as_array(self) -> np.ndarray:
        """Dense array of shape ``(J + 1,) * N`` indexed by occupation."""
        arr = np.zeros((self.n_particles + 1,) * self.n_channels)
        for occ, p in self.probabilities.items():
            arr[occ] = p
        return arr


def _require_normalizer(ov: OverlapSet, kind: StatisticsKind) -> complex:
    norm = s_pm(ov.I, kind)
    if abs(norm) <= DEGENERATE_TOL:
        raise DegenerateInputError(
            f"{kind.value}: S[I] = {abs(norm):.3g}; the input modes are linearly dependent"
        )
    return norm


def dp_weights(ov: OverlapSet, tol: float | None = 1e-8) -> np.ndarray:
    """Single-particle exit probabilities ``w[m, i]`` (channel m, row i)."""
    w = np.real(np.diagonal(ov.Q, axis1=1, axis2=2)).copy()
    if tol is not None:
        defect = float(np.max(np.abs(w.sum(axis=0) - 1.0)))
        if defect > tol:
            raise ConsistencyError(f"single-particle weights do not sum to one ({defect:.3g})")
    return w


def _dp_polynomial(w: np.ndarray) -> np.ndarray:
    """Coefficients of prod_i sum_m alpha_m w[m, i] as an (J+1)^N array."""
    n_channels, n_particles = w.shape
    poly = np.zeros((n_particles + 1,) * n_channels)
    poly[(0,) * n_channels] = 1.0
    for i in range(n_particles):
        nxt = np.zeros_like(poly)
        for m in range(n_channels):
            src = [slice(None)] * n_channels
            dst = [slice(None)] * n_channels
            src[m] = slice(0, n_particles)
            dst[m] = slice(1, n_particles + 1)
            nxt[tuple(dst)] += w[m, i] * poly[tuple(src)]
        poly = nxt
    return poly


def _assignment_sums(ov: OverlapSet, kind: StatisticsKind) -> dict:
    """sum of S[M(c)] grouped by occupation, visiting c in a fixed order."""
    n_particles, n_channels = ov.n_particles, ov.n_channels
    total = n_channels**n_particles
    radix = n_channels ** np.arange(n_particles - 1, -1, -1)
    rows = np.arange(n_particles)
    # occupation -> flat index in a mixed-radix code with base J + 1
    occ_radix = (n_particles + 1) ** np.arange(n_channels - 1, -1, -1)
    acc = np.zeros((n_particles + 1) ** n_channels, dtype=complex)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total))
        assign = (idx[:, None] // radix[None, :]) % n_channels  # (b, J)
        mats = ov.Q[assign, rows[None, :], :]  # (b, J, J)
        vals = s_pm_batch(mats, kind)
        counts = np.zeros((idx.size, n_channels), dtype=np.int64)
        for m in range(n_channels):
            counts[:, m] = np.sum(assign == m, axis=1)
        np.add.at(acc, counts @ occ_radix, vals)
    out = {}
    for occ in occupations(n_particles, n_channels):
        out[occ] = acc[int(np.dot(occ, occ_radix))]
    return out


def full_distribution(ov: OverlapSet, kind) -> CountingDistribution:
    """Probabilities of all occupation vectors for one statistics kind.

    Raises
    ------
    DegenerateInputError
        If ``S[I]`` vanishes, e.g. two identical fermion modes.
    """
    kind = StatisticsKind.parse(kind)
    n_particles, n_channels = ov.n_particles, ov.n_channels
    if kind is StatisticsKind.DISTINGUISHABLE:
        poly = _dp_polynomial(dp_weights(ov, tol=None))
        probs = {occ: float(poly[occ]) for occ in occupations(n_particles, n_channels)}
        return CountingDistribution(kind, n_particles, n_channels, probs, 0.0, ov)
    norm = _require_normalizer(ov, kind)
    sums = _assignment_sums(ov, kind)
    values = {occ: v / norm for occ, v in sums.items()}
    imag = max((abs(v.imag) for v in values.values()), default=0.0)
    probs = {occ: float(v.real) for occ, v in values.items()}
    return CountingDistribution(kind, n_particles, n_channels, probs, imag, ov)


def _marginal_by_sum(dist: CountingDistribution, m: int) -> np.ndarray:
    out = np.zeros(dist.n_particles + 1)
    for occ, p in dist.probabilities.items():
        out[occ[m]] += p
    return out


def marginal_from_overlaps(ov: OverlapSet, kind, m: int) -> np.ndarray:
    """W(n|m), n = 0..J, without the full distribution.

    Identical particles: sum over row subsets of size n of ``S`` of
    ``I - Q(m)`` with those rows taken from ``Q(m)``.  Distinguishable
    particles: coefficients of prod_i (1 - w_i + alpha w_i).
    """
    kind = StatisticsKind.parse(kind)
    n_particles = ov.n_particles
    if kind is StatisticsKind.DISTINGUISHABLE:
        poly = np.array([1.0])
        for wi in dp_weights(ov, tol=None)[m]:
            poly = np.convolve(poly, [1.0 - wi, wi])
        return poly
    norm = _require_normalizer(ov, kind)
    rest = ov.I - ov.Q[m]
    out = np.zeros(n_particles + 1)
    for n in range(n_particles + 1):
        subsets = list(itertools.combinations(range(n_particles), n))
        mats = np.broadcast_to(rest, (len(subsets),) + rest.shape).copy()
        for b, rows in enumerate(subsets):
            mats[b, list(rows)] = ov.Q[m][list(rows)]
        out[n] = (np.sum(s_pm_batch(mats, kind)) / norm).real
    return out


def single_channel_marginal(dist: CountingDistribution, m: int,
                            check: bool = True) -> np.ndarray:
    """Probabilities of finding n = 0..J particles in channel ``m``.

    When the distribution carries its overlaps, the result is recomputed by
    the row-subset route and the two must agree within 1e-10.
    """
    marginal = _marginal_by_sum(dist, m)
    if check and dist.overlaps is not None:
        other = marginal_from_overlaps(dist.overlaps, dist.kind, m)
        gap = float(np.max(np.abs(marginal - other)))
        if gap > ROUTE_TOL:
            raise ConsistencyError(f"channel {m + 1} marginal: routes differ by {gap:.3g}")
    return marginal


def mean_numbers_direct(ov: OverlapSet, kind) -> np.ndarray:
    """Mean occupation of every exit channel by single-row replacement in I."""
    kind = StatisticsKind.parse(kind)
    if kind is StatisticsKind.DISTINGUISHABLE:
        return dp_weights(ov, tol=None).sum(axis=1)
    norm = _require_normalizer(ov, kind)
    n_particles = ov.n_particles
    out = np.zeros(ov.n_channels)
    for m in range(ov.n_channels):
        mats = np.broadcast_to(ov.I, (n_particles,) + ov.I.shape).copy()
        for row in range(n_particles):
            mats[row, row] = ov.Q[m][row]
        out[m] = (np.sum(s_pm_batch(mats, kind)) / norm).real
    return out


def mean_numbers(dist: CountingDistribution, check: bool = True) -> np.ndarray:
    """Mean occupations sum_n n_m W(n), cross-checked against the direct route."""
    means = np.zeros(dist.n_channels)
    for occ, p in dist.probabilities.items():
        means += p * np.asarray(occ)
    if check and dist.overlaps is not None:
        other = mean_numbers_direct(dist.overlaps, dist.kind)
        gap = float(np.max(np.abs(means - other)))
        if gap > ROUTE_TOL:
            raise ConsistencyError(f"mean numbers: routes differ by {gap:.3g}")
    return means


def no_particle_probability(ov: OverlapSet, kind, channels) -> float:
    """Probability that none of ``channels`` receives a particle."""
    kind = StatisticsKind.parse(kind)
    channels = list(channels)
    if kind is StatisticsKind.DISTINGUISHABLE:
        w = dp_weights(ov, tol=None)
        return float(np.prod(1.0 - w[channels].sum(axis=0)))
    norm = _require_normalizer(ov, kind)
    return float((s_pm(ov.residual(channels), kind) / norm).real)


def all_particle_probability(ov: OverlapSet, kind, m: int) -> float:
    """Probability that every particle leaves through channel ``m``."""
    kind = StatisticsKind.parse(kind)
    if kind is StatisticsKind.DISTINGUISHABLE:
        return float(np.prod(dp_weights(ov, tol=None)[m]))
    norm = _require_normalizer(ov, kind)
    return float((s_pm(ov.Q[m], kind) / norm).real)


def joint_probability(dist: CountingDistribution, channels, counts,
                      check: bool = True) -> float:
    """Probability of ``counts[i]`` particles in ``channels[i]`` for all i.

    The remaining channels are summed over.  An all-zero request is also
    evaluated from ``I - sum Q(m)`` and compared within 1e-10.
    """
    channels, counts = list(channels), list(counts)
    if len(channels) != len(counts):
        raise ValueError("channels and counts differ in length")
    if len(set(channels)) != len(channels):
        raise ValueError("channels must be distinct")
    if any(c < 0 for c in counts) or sum(counts) > dist.n_particles:
        return 0.0
    total = math.fsum(
        p for occ, p in dist.probabilities.items()
        if all(occ[m] == c for m, c in zip(channels, counts))
    )
    if check and dist.overlaps is not None and channels and not any(counts):
        other = no_particle_probability(dist.overlaps, dist.kind, channels)
        if abs(total - other) > ROUTE_TOL:
            raise ConsistencyError(
                f"no-particle probability: routes differ by {abs(total - other):.3g}"
            )
    return total


@dataclass
class InequalityEntry:
    """One bunching comparison: boson >= distinguishable >= fermion."""

    label: str
    boson: float
    dp: float
    fermion: float

    @property
    def boson_margin(self) -> float:
        return self.boson - self.dp

    @property
    def fermion_margin(self) -> float:
        return self.dp - self.fermion

    def satisfied(self, tol: float = 1e-10) -> bool:
        ok_b = self.boson_margin >= -tol
        ok_f = math.isnan(self.fermion) or self.fermion_margin >= -tol
        return bool(ok_b and ok_f)


@dataclass
class InequalityReport:
    entries: list
    correlation: float
    uncorrelated: bool
    asserted: bool

    @property
    def satisfied(self) -> bool:
        return all(e.satisfied() for e in self.entries)

    def __getitem__(self, label: str) -> InequalityEntry:
        for e in self.entries:
            if e.label == label:
                return e
        raise KeyError(label)


def _safe(fn, *args) -> float:
    try:
        return fn(*args)
    except DegenerateInputError:
        return math.nan


def inequality_audit(ov: OverlapSet, uncorrelated_tol: float = UNCORRELATED_TOL,
                     tol: float = 1e-10, strict: bool = True) -> InequalityReport:
    """Compare extreme-outcome probabilities of bosons, DP and fermions.

    Covers every ``W(J|m)``, every ``W(0|m)`` and the no-particle
    probability of every channel subset of size 2..N-1.  Labels use
    1-based channels, e.g. ``"W(0,0|3,4)"``.  The orderings are guaranteed
    only for initially uncorrelated particles; with ``strict`` a violation
    in that regime raises :class:`InequalityViolation`.
    """
    boson, fermion, dp = (StatisticsKind.BOSON, StatisticsKind.FERMION,
                          StatisticsKind.DISTINGUISHABLE)
    n_particles, n_channels = ov.n_particles, ov.n_channels
    entries = []
    for m in range(n_channels):
        entries.append(InequalityEntry(
            f"W({n_particles}|{m + 1})",
            all_particle_probability(ov, boson, m),
            all_particle_probability(ov, dp, m),
            _safe(all_particle_probability, ov, fermion, m),
        ))
    for size in range(1, n_channels):
        for subset in itertools.combinations(range(n_channels), size):
            label = "W({}|{})".format(",".join("0" * size), ",".join(str(m + 1) for m in subset))
            entries.append(InequalityEntry(
                label,
                no_particle_probability(ov, boson, subset),
                no_particle_probability(ov, dp, subset),
                _safe(no_particle_probability, ov, fermion, subset),
            ))
    correlation = ov.correlation()
    uncorrelated = correlation <= uncorrelated_tol
    report = InequalityReport(entries, correlation, uncorrelated, uncorrelated and strict)
    if report.asserted:
        bad = [e.label for e in entries if not e.satisfied(tol)]
        if bad:
            raise InequalityViolation(f"bunching inequalities violated for {bad}")
    return report


def dft_coefficient_oracle(ov: OverlapSet, kind) -> CountingDistribution:
    """Recover the distribution from samples of the generating function.

    G is evaluated with every alpha_m on the (J+1)-th roots of unity and the
    coefficients follow from an inverse N-dimensional DFT.  Intended as an
    independent check; limited to J <= 8 and N <= 6.  The largest magnitude
    found off the ``sum(n) == J`` shell is stored in ``imag_residual``
    together with the imaginary parts.
    """
    kind = StatisticsKind.parse(kind)
    n_particles, n_channels = ov.n_particles, ov.n_channels
    if n_particles > 8 or n_channels > 6:
        raise SizeLimitError("the DFT oracle supports J <= 8 and N <= 6")
    size = n_particles + 1
    roots = np.exp(2j * np.pi * np.arange(size) / size)
    grid = np.array(list(itertools.product(range(size), repeat=n_channels)))
    alphas = roots[grid]  # (size**N, N)
    if kind is StatisticsKind.DISTINGUISHABLE:
        w = dp_weights(ov, tol=None)
        g = np.prod(alphas @ w, axis=1)
    else:
        norm = _require_normalizer(ov, kind)
        g = np.empty(len(alphas), dtype=complex)
        for start in range(0, len(alphas), _CHUNK):
            block = alphas[start:start + _CHUNK]
            t = np.einsum("bm,mij->bij", block, ov.Q)
            g[start:start + _CHUNK] = s_pm_batch(t, kind) / norm
    coeffs = np.fft.fftn(g.reshape((size,) * n_channels)) / size**n_channels
    shell = {occ for occ in occupations(n_particles, n_channels)}
    off_shell = max((abs(coeffs[idx]) for idx in np.ndindex(coeffs.shape)
                     if idx not in shell), default=0.0)
    probs = {occ: float(coeffs[occ].real) for occ in occupations(n_particles, n_channels)}
    imag = max(max(abs(coeffs[occ].imag) for occ in shell), off_shell)
    return CountingDistribution(kind, n_particles, n_channels, probs, imag, ov)
