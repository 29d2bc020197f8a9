"""Random lattices and independent oracles shared by the test modules."""

import math

import numpy as np

from cusptorsion.lattice2d import lattice, ShellTable

SEED = 20240101


def rng(offset=0):
    return np.random.default_rng(SEED + offset)


def random_reduced(gen, max_shape=10.0, alpha1_range=(0.5, 2.0)):
    """A random lattice with ``alpha2/alpha1 <= max_shape``, rotated at random."""
    a1 = gen.uniform(*alpha1_range)
    x = gen.uniform(-0.5, 0.5)
    # |b2| in [1, max_shape] relative to |b1| = 1, keeping the reduction condition
    r = gen.uniform(1.0, max_shape)
    y = math.sqrt(max(r * r - x * x, 0.75))
    theta = gen.uniform(0, 2 * math.pi)
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    b1 = rot @ np.array([a1, 0.0])
    b2 = rot @ np.array([a1 * x, a1 * y])
    return lattice(b1, b2)


def oracle_count(lat, r):
    """Count lattice points of norm <= r with a box from the smallest singular value."""
    B = np.array([lat.b1, lat.b2], dtype=float).T
    smin = np.linalg.svd(B, compute_uv=False).min()
    K = int(math.ceil(r / smin)) + 1
    k = np.arange(-K, K + 1)
    m, n = np.meshgrid(k, k, indexing="ij")
    x = m * lat.b1[0] + n * lat.b2[0]
    y = m * lat.b1[1] + n * lat.b2[1]
    return int(np.count_nonzero(x * x + y * y <= r * r * (1 + 4e-16)))


def sup_error_ratio(lat, R):
    """Exact supremum of ``|E(r)| / (r/alpha1 + alpha2/alpha1)`` over ``0 < r <= R``.

    On each gap between shells ``E`` decreases linearly in ``r^2``; the ratio
    is maximal at the right value of a jump or at the left limit of the next.
    """
    table = ShellTable(lat, R)
    shells = np.unique(table.norms)
    left = np.nextafter(shells, 0)
    r = np.concatenate([shells, left, [R]])
    e = np.abs(table.error(r))
    return float(np.max(e / ((r + lat.alpha2) / lat.alpha1)))
