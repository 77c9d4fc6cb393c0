"""Dense complex linear algebra for the symmetrized-product functional.

The functional ``S+`` is the matrix permanent (bosons) and ``S-`` the
determinant (fermions).  Both are multilinear in the rows, which is what
the counting module relies on.
"""

from __future__ import annotations

import enum

import numba as nb
import numpy as np

from .errors import DimensionError, SizeLimitError, UnsupportedKindError

__all__ = [
    "StatisticsKind",
    "determinant",
    "permanent",
    "s_pm",
    "s_pm_batch",
    "is_psd",
    "PERMANENT_MAX_N",
    "DETERMINANT_MAX_N",
]

PERMANENT_MAX_N = 24
DETERMINANT_MAX_N = 64
DEFAULT_PSD_TOL = 1e-10


class StatisticsKind(enum.Enum):
    BOSON = "boson"
    FERMION = "fermion"
    DISTINGUISHABLE = "dp"

    @classmethod
    def parse(cls, value) -> "StatisticsKind":
        """Accept an enum member or one of its common spellings."""
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {
            "boson": cls.BOSON,
            "bosons": cls.BOSON,
            "+": cls.BOSON,
            "fermion": cls.FERMION,
            "fermions": cls.FERMION,
            "-": cls.FERMION,
            "dp": cls.DISTINGUISHABLE,
            "distinguishable": cls.DISTINGUISHABLE,
        }
        try:
            return aliases[key]
        except KeyError:
            raise UnsupportedKindError(f"unknown statistics kind {value!r}") from None

    @property
    def sign(self) -> int:
        if self is StatisticsKind.BOSON:
            return 1
        if self is StatisticsKind.FERMION:
            return -1
        raise UnsupportedKindError("distinguishable particles have no exchange sign")


def _as_square(matrix, limit: int, name: str) -> np.ndarray:
    a = np.asarray(matrix, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} needs a square matrix, got shape {a.shape}")
    if a.shape[0] > limit:
        raise SizeLimitError(f"{name} supports n <= {limit}, got n = {a.shape[0]}")
    return a


def determinant(matrix) -> complex:
    """Determinant by LU factorization with partial pivoting."""
    a = _as_square(matrix, DETERMINANT_MAX_N, "determinant")
    if a.shape[0] == 0:
        return 1.0 + 0.0j
    return complex(np.linalg.det(a))


@nb.njit(cache=True)
def _ryser_gray(a):
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    rowsum = np.zeros(n, dtype=np.complex128)
    in_set = np.zeros(n, dtype=np.bool_)
    total = 0.0 + 0.0j
    sign = 1.0
    for k in range(1, 1 << n):
        # bit flipped between consecutive Gray codes = trailing zeros of k
        j = 0
        while not (k >> j) & 1:
            j += 1
        if in_set[j]:
            in_set[j] = False
            for i in range(n):
                rowsum[i] -= a[i, j]
        else:
            in_set[j] = True
            for i in range(n):
                rowsum[i] += a[i, j]
        sign = -sign
        prod = 1.0 + 0.0j
        for i in range(n):
            prod *= rowsum[i]
        total += sign * prod
    if n % 2 == 1:
        total = -total
    return total


@nb.njit(cache=True)
def _ryser_batch(stack):
    out = np.empty(stack.shape[0], dtype=np.complex128)
    for b in range(stack.shape[0]):
        out[b] = _ryser_gray(stack[b])
    return out


def permanent(matrix) -> complex:
    """Permanent by Ryser's inclusion-exclusion formula.

    Subsets are visited in Gray-code order so each step updates the row
    sums with a single column, giving O(2**n * n) work.

    Raises
    ------
    DimensionError
        If the matrix is not square.
    SizeLimitError
        If ``n > 24``.
    """
    a = _as_square(matrix, PERMANENT_MAX_N, "permanent")
    return complex(_ryser_gray(np.ascontiguousarray(a)))


def s_pm(matrix, kind) -> complex:
    """Permanent for bosons, determinant for fermions."""
    kind = StatisticsKind.parse(kind)
    if kind is StatisticsKind.BOSON:
        return permanent(matrix)
    if kind is StatisticsKind.FERMION:
        return determinant(matrix)
    raise UnsupportedKindError(
        "the distinguishable limit never evaluates a permanent or determinant"
    )


def s_pm_batch(stack, kind) -> np.ndarray:
    """Vectorized :func:`s_pm` over a stack of shape ``(batch, n, n)``."""
    kind = StatisticsKind.parse(kind)
    a = np.ascontiguousarray(stack, dtype=np.complex128)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise DimensionError(f"expected a (batch, n, n) stack, got shape {a.shape}")
    if a.shape[1] == 0:
        return np.ones(a.shape[0], dtype=np.complex128)
    if kind is StatisticsKind.BOSON:
        if a.shape[1] > PERMANENT_MAX_N:
            raise SizeLimitError(f"permanent supports n <= {PERMANENT_MAX_N}")
        return _ryser_batch(a)
    if kind is StatisticsKind.FERMION:
        if a.shape[1] > DETERMINANT_MAX_N:
            raise SizeLimitError(f"determinant supports n <= {DETERMINANT_MAX_N}")
        return np.linalg.det(a)
    raise UnsupportedKindError(
        "the distinguishable limit never evaluates a permanent or determinant"
    )


def is_psd(matrix, tol: float = DEFAULT_PSD_TOL) -> bool:
    """Return True if a Hermitian matrix is positive semidefinite.

    The matrix is Hermitized as ``(M + M^H) / 2`` and accepted when its
    smallest eigenvalue is at least ``-tol``.

    Raises
    ------
    DimensionError
        If ``M`` is not square or deviates from Hermitian by more than
        ``tol`` in any entry.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    a = np.asarray(matrix, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"is_psd needs a square matrix, got shape {a.shape}")
    if a.size == 0:
        return True
    skew = np.max(np.abs(a - a.conj().T))
    if skew > tol:
        raise DimensionError(f"matrix is not Hermitian: max |M - M^H| = {skew:.3g}")
    h = 0.5 * (a + a.conj().T)
    return bool(np.linalg.eigvalsh(h)[0] >= -tol)
