"""Rank-2 Euclidean lattices: reduction, successive minima, point counting.

A cusp cross-section of a hyperbolic 3-manifold is a flat torus ``C / Lambda``.
Everything the trace formula needs from ``Lambda`` lives here: the successive
minima ``alpha1 <= alpha2``, the covolume, the counting function
``N*(r) = #{0 < |v| <= r}``, its Gauss-circle error term and the cusp
constant ``kappa``.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import exp1

from .errors import AdmissionError, NumericalError

EULER_GAMMA = 0.57721566490153286
DEFAULT_BUDGET = 10**8
# empirical constant in E(r) <= C0 (r/alpha1 + alpha2/alpha1), see tests
GAUSS_CIRCLE_C0 = 10.0
KAPPA_VARIANTS = ("derived", "statement", "proof", "conv1")

_DEGENERACY = 1e-14
_CHUNK = 2_000_000


@dataclass(frozen=True)
class LatticeBasis:
    b1: tuple
    b2: tuple

    def __post_init__(self):
        object.__setattr__(self, "b1", tuple(float(x) for x in self.b1))
        object.__setattr__(self, "b2", tuple(float(x) for x in self.b2))
        if len(self.b1) != 2 or len(self.b2) != 2:
            raise AdmissionError("lattice basis vectors must have two components")
        if not all(math.isfinite(x) for x in self.b1 + self.b2):
            raise AdmissionError("lattice basis has non-finite components")


@dataclass(frozen=True)
class ReducedLattice:
    """A Gauss-reduced basis with its invariants.

    ``transform`` holds the integer matrix ``U`` with
    ``(b1, b2) = U @ (original b1, original b2)``.
    """

    b1: tuple
    b2: tuple
    alpha1: float
    alpha2: float
    covolume: float
    transform: tuple = field(default=((1, 0), (0, 1)), compare=False)

    @property
    def uniformity_ratio(self) -> float:
        """``vol / alpha1**2``; bounded on a uniform family of lattices."""
        return self.covolume / self.alpha1**2

    @property
    def shape_ratio(self) -> float:
        return self.alpha2 / self.alpha1

    @property
    def matrix(self) -> np.ndarray:
        return np.array([self.b1, self.b2])

    def scaled(self, c: float) -> "ReducedLattice":
        """The lattice ``c * Lambda`` for a real ``c > 0`` (still reduced)."""
        if not c > 0:
            raise AdmissionError("scale factor must be positive")
        return ReducedLattice(
            tuple(c * x for x in self.b1), tuple(c * x for x in self.b2),
            c * self.alpha1, c * self.alpha2, c * c * self.covolume,
            self.transform)

    def rotated(self, theta: float) -> "ReducedLattice":
        c, s = math.cos(theta), math.sin(theta)
        rot = lambda v: (c * v[0] - s * v[1], s * v[0] + c * v[1])
        return gauss_reduce(LatticeBasis(rot(self.b1), rot(self.b2)))

    def to_descriptor(self) -> dict:
        return {"b1": list(self.b1), "b2": list(self.b2)}


@dataclass(frozen=True)
class CuspConstant:
    kappa: float
    formula_variant: str
    error_integral: float
    abs_error: float
    method: str


def _exact_combination(u, x):
    # u integer pair, x pair of floats (exact dyadic rationals)
    return float(u[0] * Fraction(x[0]) + u[1] * Fraction(x[1]))


def _combine(row, basis):
    b1, b2 = basis
    return (_exact_combination(row, (b1[0], b2[0])),
            _exact_combination(row, (b1[1], b2[1])))


def _mu(row_u, row_v, basis, u, v):
    """Nearest integer to ``<u, v> / <u, u>``.

    The float quotient is off by about ``eps |v| / |u|``; for very unequal
    lengths the dot products are formed exactly from the integer rows.
    """
    uu = _dot(u, u)
    if _dot(v, v) <= 1e16 * uu:
        return round(_dot(u, v) / uu)
    b1, b2 = basis
    cols = [(Fraction(b1[i]), Fraction(b2[i])) for i in range(2)]
    ue = [row_u[0] * c[0] + row_u[1] * c[1] for c in cols]
    ve = [row_v[0] * c[0] + row_v[1] * c[1] for c in cols]
    return round((ue[0] * ve[0] + ue[1] * ve[1]) / (ue[0] ** 2 + ue[1] ** 2))


def gauss_reduce(basis, max_iter=10_000) -> ReducedLattice:
    """Lagrange-Gauss reduction of a rank-2 basis.

    The unimodular transform is tracked in integers and the reduced vectors
    are recomputed exactly from it at every step, so rounding does not
    accumulate even for badly conditioned inputs.
    """
    if not isinstance(basis, LatticeBasis):
        basis = LatticeBasis(*basis)
    b1, b2 = basis.b1, basis.b2
    det = b1[0] * b2[1] - b1[1] * b2[0]
    if abs(det) <= _DEGENERACY * math.hypot(*b1) * math.hypot(*b2):
        raise AdmissionError("degenerate lattice")
    # squared norms and the determinant must be normal floats
    for q in (_dot(b1, b1), _dot(b2, b2), abs(det)):
        if not sys.float_info.min < q < sys.float_info.max:
            raise AdmissionError("basis outside the floating-point range")

    rows = [[1, 0], [0, 1]]
    u, v = b1, b2
    if _dot(u, u) > _dot(v, v):
        rows.reverse()
        u, v = v, u
    for _ in range(max_iter):
        mu = _mu(rows[0], rows[1], (b1, b2), u, v)
        if mu:
            rows[1] = [rows[1][0] - mu * rows[0][0], rows[1][1] - mu * rows[0][1]]
            v = _combine(rows[1], (b1, b2))
        if _dot(v, v) < _dot(u, u):
            rows.reverse()
            u, v = v, u
            continue
        if mu == 0:
            break
    else:
        raise NumericalError("Gauss reduction did not terminate")

    covolume = abs(u[0] * v[1] - u[1] * v[0])
    return ReducedLattice(u, v, math.hypot(*u), math.hypot(*v), covolume,
                          (tuple(rows[0]), tuple(rows[1])))


def lattice(b1, b2) -> ReducedLattice:
    """Shorthand for ``gauss_reduce(LatticeBasis(b1, b2))``."""
    return gauss_reduce(LatticeBasis(b1, b2))


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1]


def scale(lat: ReducedLattice, n: int) -> ReducedLattice:
    """The sublattice ``n * Lambda`` for a positive integer ``n``."""
    if int(n) != n or n < 1:
        raise AdmissionError("scale needs a positive integer")
    return lat.scaled(int(n))


# -- enumeration ---------------------------------------------------------------

def coefficient_box(lat: ReducedLattice, r: float):
    """Bounds ``|m| <= M, |n| <= N`` containing every ``m b1 + n b2`` of norm <= r.

    By Cramer's rule ``|m| = |v x b2| / vol <= r alpha2 / vol`` and likewise
    for ``n``; the bound is rigorous for any basis.
    """
    slack = 1 + 1e-12
    M = int(math.floor(r * lat.alpha2 / lat.covolume * slack))
    N = int(math.floor(r * lat.alpha1 / lat.covolume * slack))
    return M, N


def iter_norms(lat: ReducedLattice, R: float, budget: int = DEFAULT_BUDGET,
               chunk: int = _CHUNK):
    """Yield arrays with the norms of the nonzero vectors of norm <= R."""
    if R < 0:
        raise AdmissionError("radius must be nonnegative")
    M, N = coefficient_box(lat, R)
    if (2 * M + 1) * (2 * N + 1) > budget:
        raise NumericalError("counting budget exceeded")
    b1, b2 = np.array(lat.b1), np.array(lat.b2)
    n = np.arange(-N, N + 1, dtype=float)
    rows_per_chunk = max(1, chunk // (2 * N + 1))
    R2 = R * R * (1 + 4e-16)
    for start in range(-M, M + 1, rows_per_chunk):
        m = np.arange(start, min(start + rows_per_chunk, M + 1), dtype=float)
        x = m[:, None] * b1[0] + n[None, :] * b2[0]
        y = m[:, None] * b1[1] + n[None, :] * b2[1]
        q = x * x + y * y
        keep = (q <= R2) & (q > 0)
        yield np.sqrt(q[keep])


def nonzero_norms(lat: ReducedLattice, R: float, budget: int = DEFAULT_BUDGET):
    """Sorted norms of all nonzero lattice vectors with ``|v| <= R``."""
    parts = list(iter_norms(lat, R, budget))
    out = np.concatenate(parts) if parts else np.empty(0)
    out.sort()
    return out


def count_points(lat: ReducedLattice, r: float, budget: int = DEFAULT_BUDGET) -> int:
    """``N(r)``: number of lattice vectors with ``|v| <= r``, origin included."""
    if r < 0:
        raise AdmissionError("radius must be nonnegative")
    return 1 + sum(len(a) for a in iter_norms(lat, r, budget))


class ShellTable:
    """Counting data of a lattice up to a radius ``R``.

    Holds the sorted nonzero norms together with cumulative counts and
    cumulative sums of ``|v|**-2``; all queries are vectorised over radii
    ``rho <= R``.
    """

    def __init__(self, lat: ReducedLattice, R: float, budget: int = DEFAULT_BUDGET):
        self.lattice = lat
        self.radius = float(R)
        self.norms = nonzero_norms(lat, R, budget)
        self._inv_sq = np.concatenate([[0.0], np.cumsum(self.norms**-2.0)])

    def _index(self, rho):
        rho = np.asarray(rho, dtype=float)
        if np.any(rho > self.radius * (1 + 1e-12)):
            raise AdmissionError("radius outside the shell table")
        return np.searchsorted(self.norms, rho, side="right")

    def n_star(self, rho):
        return self._index(rho)

    def error(self, rho, signed=True):
        rho = np.asarray(rho, dtype=float)
        e = self._index(rho) - np.pi * rho**2 / self.lattice.covolume
        return e if signed else np.abs(e)

    def inverse_square_sum(self, rho):
        """``sum_{0 < |v| <= rho} |v|**-2``."""
        return self._inv_sq[self._index(rho)]

    def head_integral(self, rho):
        """``int_{alpha1}^{rho} E(t) t**-3 dt`` (signed ``E``), exact.

        For ``rho < alpha1`` this is minus the integral over ``[rho, alpha1]``.
        """
        rho = np.asarray(rho, dtype=float)
        lat = self.lattice
        k = self._index(rho)
        return (0.5 * self._inv_sq[k] - 0.5 * k / rho**2
                - np.pi / lat.covolume * np.log(rho / lat.alpha1))


def error_term(lat: ReducedLattice, r, signed=False, budget: int = DEFAULT_BUDGET):
    """Gauss-circle error ``N*(r) - pi r^2 / vol`` (absolute value unless ``signed``).

    ``r`` may be a scalar or an array; the enumeration is done once for the
    largest radius.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise AdmissionError("radius must be nonnegative")
    table = ShellTable(lat, float(r_arr.max()) if r_arr.size else 0.0, budget)
    e = table.error(r_arr, signed=signed)
    return float(e) if e.ndim == 0 else e


def error_bound_ratio(lat: ReducedLattice, r, budget: int = DEFAULT_BUDGET):
    """``E(r) / (r/alpha1 + alpha2/alpha1)``, the normalised Gauss-circle error."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise AdmissionError("radius must be positive")
    e = np.asarray(error_term(lat, r_arr, budget=budget))
    out = e / ((r_arr + lat.alpha2) / lat.alpha1)
    return float(out) if out.ndim == 0 else out


# -- the cusp constant -------------------------------------------------------------

def _kappa_ewald(lat: ReducedLattice, tail_exponent=50.0):
    """Finite part of the Epstein zeta function at its pole, by theta splitting.

    ``sum_{0<|v|<=R} |v|**-2 = (2 pi / vol) log R + kappa + o(1)`` and
    ``kappa`` equals the constant term of ``Z(s) = sum' |v|**-2s`` at
    ``s = 1``. For a unimodular lattice the dual is the rotated lattice,
    which gives

        kappa_1 = pi (gamma + log pi - 1 + sum' [exp(-pi q)/(pi q) + E1(pi q)])

    with ``q = |v|**2``; general covolume follows from the scaling rule.
    Terms beyond ``pi q > tail_exponent`` are below ``exp(-tail_exponent)``.
    """
    vol = lat.covolume
    R = math.sqrt(tail_exponent / math.pi * vol)
    norms = nonzero_norms(lat, R)
    x = np.pi * norms**2 / vol
    s = np.sum(np.exp(-x) / x + exp1(x))
    kappa1 = math.pi * (EULER_GAMMA + math.log(math.pi) - 1.0 + s)
    tail = 4 * math.pi * math.exp(-tail_exponent)
    return (kappa1 - math.pi * math.log(vol)) / vol, tail / vol


def _error_integral_direct(lat, quad_tol, budget):
    """``int_{alpha1}^inf E rho**-3`` from the exact head plus a tail bound."""
    R = 50 * lat.alpha2
    while True:
        tail_bound = GAUSS_CIRCLE_C0 * (1 / (lat.alpha1 * R)
                                        + lat.alpha2 / (2 * lat.alpha1 * R * R))
        if tail_bound <= quad_tol:
            break
        M, N = coefficient_box(lat, 2 * R)
        if (2 * M + 1) * (2 * N + 1) > budget:
            raise NumericalError(
                f"kappa tail estimate {tail_bound:.3g} exceeds tolerance {quad_tol:.3g} "
                "within the counting budget")
        R *= 2
    table = ShellTable(lat, R, budget)
    return float(table.head_integral(R)), tail_bound


def error_integral(lat: ReducedLattice) -> float:
    """``I = int_{alpha1}^inf E(rho) rho**-3 d rho`` with the signed error term."""
    kappa_d, _ = _kappa_ewald(lat)
    return 0.5 * (kappa_d - math.pi * (1 - 2 * math.log(lat.alpha1)) / lat.covolume)


def kappa_from_integral(I: float, lat: ReducedLattice, variant: str) -> float:
    """Evaluate one of the four formulas for kappa given ``I``."""
    vol, la1 = lat.covolume, math.log(lat.alpha1)
    if variant == "derived":
        return 2 * I + math.pi * (1 - 2 * la1) / vol
    if variant == "statement":
        return 2 * I - math.pi * (1 + 2 * la1) / vol
    if variant == "proof":
        return I - math.pi * (1 + 2 * la1) / vol
    if variant == "conv1":
        return I + math.pi * (1 + 2 * la1) / vol
    raise AdmissionError(f"unknown kappa variant {variant!r}; expected one of {KAPPA_VARIANTS}")


def kappa(lat: ReducedLattice, variant: str = "derived", quad_tol: float = 1e-10,
          method: str = "ewald", budget: int = DEFAULT_BUDGET) -> CuspConstant:
    """The cusp constant of ``lat``.

    ``variant="derived"`` is the constant term in
    ``sum_{0<|v|<=R} |v|**-2 = (2 pi/vol) log R + kappa + o(1)``, i.e.
    ``2 I + pi (1 - 2 log alpha1) / vol`` with ``I`` the integral of the
    signed error term against ``rho**-3``. The other variants reuse the same
    ``I`` in alternative formulas and exist for comparison.

    ``method="ewald"`` (default) evaluates ``I`` through the exponentially
    convergent theta splitting; ``method="direct"`` integrates the step
    function exactly up to ``R >= 50 alpha2`` and bounds the rest with the
    Gauss-circle constant, raising if that bound exceeds ``quad_tol``.
    """
    if not quad_tol > 0:
        raise AdmissionError("quad_tol must be positive")
    if variant not in KAPPA_VARIANTS:
        raise AdmissionError(f"unknown kappa variant {variant!r}")
    if method == "ewald":
        kd, err = _kappa_ewald(lat)
        I = 0.5 * (kd - math.pi * (1 - 2 * math.log(lat.alpha1)) / lat.covolume)
        err = err + 1e-15 * abs(kd)
    elif method == "direct":
        I, err = _error_integral_direct(lat, quad_tol, budget)
        err *= 2
    else:
        raise AdmissionError(f"unknown kappa method {method!r}")
    return CuspConstant(float(kappa_from_integral(I, lat, variant)), variant, float(I),
                        float(err), method)


def error_tail_integral(lat: ReducedLattice, rho, table: ShellTable, I: float | None = None):
    """``J(rho) = int_rho^inf E(t) t**-3 dt`` for ``rho <= table.radius``."""
    if I is None:
        I = error_integral(lat)
    return I - table.head_integral(rho)
