"""
Two-particle interference on a beam splitter
============================================

Two identical packets hit a balanced splitter from opposite sides.  When
they arrive together, bosons always leave through the same port, fermions
never do, and distinguishable particles split at random.  Delaying one
packet washes the effect out once the packets stop overlapping.

Run with ``python notebooks/hom_dip.py``.
"""

import numpy as np

from packetstats import full_distribution, overlap_set
from packetstats.presets import hom_config

# %%
# Synchronized packets
# --------------------
# With both packets in different input ports the input overlap matrix is
# the identity, and all the interference sits in the outgoing overlaps.

ov = overlap_set(hom_config())
for kind in ("boson", "fermion", "dp"):
    d = full_distribution(ov, kind)
    print(f"{kind:8s} W(2,0)={d[(2, 0)]:.4f}  W(1,1)={d[(1, 1)]:.4f}  W(0,2)={d[(0, 2)]:.4f}")

# %%
# The dip
# -------
# Sweep the arrival delay of the second packet.  The coincidence
# probability of bosons climbs from 0 to the classical 1/2; fermions come
# down from 1.

print("\n delay    boson     fermion   dp")
for delay in np.linspace(0.0, 3.0, 13):
    ov = overlap_set(hom_config(delay))
    row = [full_distribution(ov, k)[(1, 1)] for k in ("boson", "fermion", "dp")]
    print(f"{delay:6.3f}  " + "  ".join(f"{x:.6f}" for x in row))
