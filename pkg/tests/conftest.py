import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import random_complex, random_unitary  # noqa: E402

from packetstats.overlap import OverlapSet  # noqa: E402

ACCEPTANCE_LOG = []


def synthetic_overlaps(rng, row_channels, n_channels, nodes=6, uncorrelated=False,
                       diagonal=False):
    """An OverlapSet built from random discretized packets and random unitaries.

    Every row is a normalized vector over ``nodes`` energy samples; each
    sample has its own N x N unitary.  With ``uncorrelated`` the vectors of
    one input channel are orthonormal, so I is exactly the identity.
    """
    row_channels = tuple(row_channels)
    j = len(row_channels)
    b = random_complex(rng, j, nodes)
    if uncorrelated:
        for k in set(row_channels):
            rows = [r for r in range(j) if row_channels[r] == k]
            q, _ = np.linalg.qr(b[rows].T)
            b[rows] = q.T[: len(rows)]
    b /= np.linalg.norm(b, axis=1)[:, None]
    if diagonal:
        s = np.array([np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, n_channels)))
                      for _ in range(nodes)])
    else:
        s = np.array([random_unitary(rng, n_channels) for _ in range(nodes)])
    rc = np.array(row_channels)
    same = rc[:, None] == rc[None, :]
    identity = np.where(same, b @ b.conj().T, 0)
    identity = 0.5 * (identity + identity.conj().T)
    np.fill_diagonal(identity, 1.0)
    out = np.transpose(s[:, :, rc], (1, 2, 0)) * b[None]
    q_mats = np.einsum("min,mjn->mij", out, out.conj())
    q_mats = 0.5 * (q_mats + np.conj(np.swapaxes(q_mats, 1, 2)))
    return OverlapSet(identity, q_mats, tuple(range(j)), row_channels)


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LOG:
            terminalreporter.write_line(line)
