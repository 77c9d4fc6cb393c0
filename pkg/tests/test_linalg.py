import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import cofactor_determinant, naive_permanent, random_complex
from packetstats.errors import DimensionError, SizeLimitError, UnsupportedKindError
from packetstats.linalg import (
    StatisticsKind,
    determinant,
    is_psd,
    permanent,
    s_pm,
    s_pm_batch,
)

BOSON, FERMION, DP = StatisticsKind.BOSON, StatisticsKind.FERMION, StatisticsKind.DISTINGUISHABLE


def test_determinant_small_cases():
    assert determinant(np.eye(3)) == pytest.approx(1.0)
    assert determinant([[2, 1], [1, 2]]) == pytest.approx(3.0)


def test_determinant_matches_cofactor_expansion(rng):
    a = random_complex(rng, 6)
    expected = cofactor_determinant(a)
    assert abs(determinant(a) - expected) <= 1e-12 * abs(expected)


def test_permanent_small_cases():
    assert permanent(np.eye(4)) == pytest.approx(1.0)
    assert permanent(np.ones((3, 3))) == pytest.approx(6.0)
    assert permanent(np.zeros((0, 0))) == 1.0


def test_permanent_matches_permutation_sum(rng):
    a = random_complex(rng, 5)
    expected = naive_permanent(a)
    assert abs(permanent(a) - expected) <= 1e-12 * abs(expected)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_against_oracles_up_to_six(n, seed):
    a = random_complex(np.random.default_rng(seed), n)
    for fast, slow in [(permanent, naive_permanent), (determinant, cofactor_determinant)]:
        ref = slow(a)
        assert abs(fast(a) - ref) <= 1e-12 * max(abs(ref), np.abs(a).max() ** n)


def test_shape_errors():
    with pytest.raises(DimensionError):
        permanent(np.ones((2, 3)))
    with pytest.raises(DimensionError):
        determinant(np.ones((3, 2)))
    with pytest.raises(SizeLimitError):
        permanent(np.eye(25))


def test_s_pm_dispatch():
    assert s_pm(np.eye(3), BOSON) == pytest.approx(1.0)
    assert s_pm(np.ones((2, 2)), BOSON) == pytest.approx(2.0)
    assert s_pm(np.ones((2, 2)), FERMION) == pytest.approx(0.0)
    with pytest.raises(UnsupportedKindError):
        s_pm(np.eye(2), DP)


def test_batch_agrees_with_single(rng):
    stack = np.array([random_complex(rng, 4) for _ in range(7)])
    for kind in (BOSON, FERMION):
        batch = s_pm_batch(stack, kind)
        single = np.array([s_pm(a, kind) for a in stack])
        np.testing.assert_allclose(batch, single, rtol=1e-13)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_multilinear_in_rows(n, seed):
    rng = np.random.default_rng(seed)
    a = random_complex(rng, n)
    u, v = random_complex(rng, 2, n)
    x, y = random_complex(rng, 1, 2)[0]
    row = rng.integers(n)
    for kind in (BOSON, FERMION):
        mixed, first, second = a.copy(), a.copy(), a.copy()
        mixed[row] = x * u + y * v
        first[row] = u
        second[row] = v
        lhs = s_pm(mixed, kind)
        rhs = x * s_pm(first, kind) + y * s_pm(second, kind)
        scale = max(1.0, np.abs(mixed).max() ** n)
        assert abs(lhs - rhs) <= 1e-12 * scale


def test_is_psd():
    assert is_psd(np.eye(3))
    assert not is_psd(np.diag([1.0, -1.0]), tol=1e-12)
    assert is_psd(np.diag([1.0, -1e-12]))
    with pytest.raises(DimensionError):
        is_psd(np.array([[1.0, 1.0], [0.0, 1.0]]))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 6), rank=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_hadamard_bounds_on_gram_matrices(n, rank, seed):
    b = random_complex(np.random.default_rng(seed), n, rank)
    g = b @ b.conj().T
    diag = np.prod(np.real(np.diag(g)))
    per, det = permanent(g).real, determinant(g).real
    tol = 1e-10 * max(1.0, diag)
    assert is_psd(g, tol=1e-10 * np.abs(g).max())
    assert per >= diag - tol
    assert det <= diag + tol
    assert det <= per + tol


def test_kind_parsing():
    assert StatisticsKind.parse("Bosons") is BOSON
    assert StatisticsKind.parse("distinguishable") is DP
    assert StatisticsKind.parse(FERMION) is FERMION
    with pytest.raises(UnsupportedKindError):
        StatisticsKind.parse("anyon")
