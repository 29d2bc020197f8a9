"""Cusp kinematics in hyperbolic 3-space.

A unipotent element ``n`` of a parabolic subgroup moves a point ``x`` at
height ``y`` by the hyperbolic distance ``ell(|n| / y)``, where

    ell(r) = 2 log((1 + u) / (1 - u)),   u = (1 + (2/r)**2) ** -1/2.

Since ``(1 + u) / (1 - u) = ((sqrt(r^2 + 4) + r) / 2) ** 2`` this is
``ell(r) = 4 asinh(r / 2)``, which is free of cancellation for every ``r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AdmissionError
from .lattice2d import ReducedLattice


def ell(r):
    """Translation length ``ell(r) = 4 asinh(r / 2)``; vectorised, ``ell(0) = 0``."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise AdmissionError("ell is defined for r >= 0")
    out = 4.0 * np.arcsinh(0.5 * r_arr)
    return float(out) if out.ndim == 0 else out


def parabolic_distance(n_len, y):
    """``d(x, n x)`` for ``|n| = n_len`` and height ``y`` of ``x``.

    Evaluates the horospherical distance formula
    ``2 (log(1 + w) - log(1 - w))`` with ``w = |n| / sqrt(|n|^2 + 4 y^2)``,
    computing ``1 - w = 4 y^2 / (s (s + |n|))`` (``s = sqrt(|n|^2 + 4 y^2)``)
    so that large ``|n| / y`` keeps full relative precision, and
    ``log(1 - w)`` by ``log1p`` when ``w`` is small.
    """
    n_len = np.asarray(n_len, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise AdmissionError("height must be positive")
    if np.any(n_len < 0):
        raise AdmissionError("|n| must be nonnegative")
    s = np.hypot(n_len, 2 * y)
    w = n_len / s
    one_minus_w = 4 * y * y / (s * (s + n_len))
    # log(1 - w): log1p is exact for small w, the explicit 1 - w near w = 1
    log_one_minus = np.where(w <= 0.5, np.log1p(-np.minimum(w, 0.5)),
                             np.log(one_minus_w))
    out = 2 * (np.log1p(w) - log_one_minus)
    return float(out) if out.ndim == 0 else out


def default_log_grid(n=10_000):
    return np.geomspace(1e-3, 1e6, n)


def log_lower_bound_constant(grid=None) -> float:
    """Infimum over ``grid`` of ``ell(r) / log(1 + r)``.

    The ratio tends to 2 as ``r -> 0`` and to 4 as ``r -> inf``.
    """
    grid = default_log_grid() if grid is None else np.asarray(grid, dtype=float)
    if np.any(grid <= 0):
        raise AdmissionError("grid must be positive")
    c = float(np.min(ell(grid) / np.log1p(grid)))
    if not c > 0:
        raise AdmissionError("lower-bound constant is not positive")
    return c


@dataclass(frozen=True)
class CuspGeometry:
    """A cusp: its lattice and the scale of the chosen height function.

    Rescaling the height function by ``c`` rescales all horospherical norms,
    so the cusp behaves as the lattice ``c * Lambda``; see
    :attr:`effective_lattice`.
    """

    lattice: ReducedLattice
    height_normalization: float = 1.0

    def __post_init__(self):
        if not self.height_normalization > 0:
            raise AdmissionError("height normalization must be positive")

    @property
    def effective_lattice(self) -> ReducedLattice:
        if self.height_normalization == 1.0:
            return self.lattice
        return self.lattice.scaled(self.height_normalization)


@dataclass(frozen=True)
class TruncationHeights:
    """Heights ``Y_j >= 1`` at which each cusp is cut off.

    ``scale`` optionally records the common factor ``Y_j / alpha1_j`` of a
    schedule.
    """

    Y: tuple
    scale: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "Y", tuple(float(y) for y in self.Y))
        if any(not y >= 1 for y in self.Y):
            raise AdmissionError("truncation heights must be >= 1")

    def __len__(self):
        return len(self.Y)

    def __iter__(self):
        return iter(self.Y)


def _check_height(Yj):
    if not Yj >= 1:
        raise AdmissionError("truncation height below the normalisation (Y < 1)")


def cusp_boundary_area(c: CuspGeometry, Yj: float) -> float:
    """Area ``vol(Lambda) / Y**2`` of the boundary torus at height ``Y``."""
    _check_height(Yj)
    return c.lattice.covolume / Yj**2


def cusp_volume_above(c: CuspGeometry, Yj: float) -> float:
    """Volume ``vol(Lambda) / (2 Y**2)`` of the cusp region above height ``Y``."""
    _check_height(Yj)
    return c.lattice.covolume / (2 * Yj**2)


def ell_inverse(length):
    """Inverse of :func:`ell`: the ``r`` with ``ell(r) = length``."""
    length = np.asarray(length, dtype=float)
    out = 2 * np.sinh(length / 4)
    return float(out) if out.ndim == 0 else out


def ell_reference(r: float) -> float:
    """Direct evaluation of the logarithmic formula for ``ell`` (slow, for checks)."""
    if r == 0:
        return 0.0
    u = (1 + (r / 2) ** -2) ** -0.5
    return 2 * (math.log(1 + u) - math.log(1 - u))
