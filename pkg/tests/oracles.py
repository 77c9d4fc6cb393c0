"""Brute-force reference implementations used only by the tests.

Nothing here imports the package's numerical routines.
"""

import itertools
import math

import numpy as np


def naive_permanent(a):
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    total = 0j
    for perm in itertools.permutations(range(n)):
        prod = 1 + 0j
        for i, j in enumerate(perm):
            prod *= a[i, j]
        total += prod
    return total


def cofactor_determinant(a):
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if n == 0:
        return 1 + 0j
    if n == 1:
        return a[0, 0]
    total = 0j
    for j in range(n):
        minor = np.delete(np.delete(a, 0, axis=0), j, axis=1)
        total += (-1) ** j * a[0, j] * cofactor_determinant(minor)
    return total


def random_complex(rng, n, m=None):
    m = n if m is None else m
    return rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))


def random_unitary(rng, n):
    z = random_complex(rng, n)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def fock_output_distribution(u, inputs, kind):
    """Exact output statistics of perfectly overlapping particles.

    ``inputs`` lists the input port of every particle.  Bosons use
    |per|^2 / prod(n!), fermions |det|^2, distinguishable particles the sum
    over independent routes.
    """
    u = np.asarray(u)
    n_ports = u.shape[0]
    j = len(inputs)
    out = {}
    for outputs in itertools.combinations_with_replacement(range(n_ports), j):
        occ = tuple(outputs.count(m) for m in range(n_ports))
        sub = u[np.ix_(outputs, inputs)]
        if kind == "boson":
            p = abs(naive_permanent(sub)) ** 2 / math.prod(math.factorial(k) for k in occ)
        elif kind == "fermion":
            p = abs(cofactor_determinant(sub)) ** 2
        else:
            p = 0.0
            for routes in set(itertools.permutations(outputs)):
                p += math.prod(abs(u[routes[i], inputs[i]]) ** 2 for i in range(j))
        out[occ] = p
    return out


EPS0 = math.pi**2 / 2


def gaussian_overlap_riemann(p0, sigma, dt, dx=0.0, mass=1.0, points=400001):
    """<packet delayed by (dt, dx) | packet> by a dense midpoint sum in p.

    The packet has |A(p)|^2 Gaussian (std sigma) truncated to p > 0; kinetic
    energy is p^2 / (2 mass EPS0).
    """
    lo = max(p0 - 12 * sigma, 0.0)
    hi = p0 + 12 * sigma
    h = (hi - lo) / points
    p = lo + h * (np.arange(points) + 0.5)
    dens = np.exp(-((p - p0) ** 2) / (2 * sigma**2))
    dens /= dens.sum() * h
    energy = p**2 / (2 * mass * EPS0)
    return np.sum(dens * np.exp(1j * (energy * dt - p * dx))) * h
