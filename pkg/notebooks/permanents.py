"""
Permanents, determinants and counting statistics
================================================

Every probability in this package is a ratio of permanents (bosons) or
determinants (fermions) of overlap matrices.  This script shows the two
building blocks and the generating-function check on a random,
physically consistent overlap set.

Run with ``python notebooks/permanents.py``.
"""

import time

import numpy as np

from packetstats import determinant, full_distribution, permanent
from packetstats.counting import dft_coefficient_oracle, inequality_audit
from packetstats.overlap import OverlapSet

rng = np.random.default_rng(1)

# %%
# Ryser's formula
# ---------------
# The permanent costs O(2^n n), the determinant O(n^3).

for n in (8, 14, 20):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    t0 = time.perf_counter()
    per = permanent(a)
    t1 = time.perf_counter()
    det = determinant(a)
    t2 = time.perf_counter()
    print(f"n={n:2d}  |per|={abs(per):.3e} ({t1 - t0:.4f}s)  |det|={abs(det):.3e} ({t2 - t1:.6f}s)")

# %%
# A random overlap set
# --------------------
# Three orthonormal packets sampled on 12 energy nodes, each node with its
# own random 3x3 unitary.  Outgoing overlaps are Gram matrices of the
# scattered amplitudes, so they are PSD and add up to I.

nodes, n_ch = 12, 3
b = np.linalg.qr(rng.normal(size=(nodes, 3)) + 1j * rng.normal(size=(nodes, 3)))[0].T
s = []
for _ in range(nodes):
    q, r = np.linalg.qr(rng.normal(size=(n_ch, n_ch)) + 1j * rng.normal(size=(n_ch, n_ch)))
    s.append(q * (np.diag(r) / abs(np.diag(r))))
s = np.array(s)
out = np.transpose(s[:, :, [0, 0, 1]], (1, 2, 0)) * b[None]
Q = np.einsum("min,mjn->mij", out, out.conj())
ov = OverlapSet(np.eye(3), Q, row_channels=(0, 0, 1))
ov.validate()

# %%
# Two routes to the same distribution
# -----------------------------------

for kind in ("boson", "fermion", "dp"):
    direct = full_distribution(ov, kind)
    dft = dft_coefficient_oracle(ov, kind)
    gap = max(abs(direct[k] - dft[k]) for k in direct)
    print(f"{kind:8s} sum W = {sum(direct.probabilities.values()):.15f}  "
          f"enumeration vs DFT {gap:.1e}")

report = inequality_audit(ov)
for e in report.entries[:3]:
    print(f"{e.label:12s} boson {e.boson:.4f} >= dp {e.dp:.4f} >= fermion {e.fermion:.4f}")
