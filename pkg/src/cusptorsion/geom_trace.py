"""Cusp contributions to the geometric side of a regularised trace.

A kernel enters only through its profile ``h(ell)``. For one cusp with lattice
``L`` the truncated unipotent integral is

    U(Y) = vol(L) int_0^Y sum_{v != 0} h(ell(|v| / y)) dy / y^3.

Writing ``S(R) = sum_{0<|v|<=R} |v|^-2 = (2 pi/vol) log R + kappa
+ E(R)/R^2 - 2 J(R)`` with ``J(R) = int_R^inf E(t) t^-3 dt`` and integrating by
parts gives

    U(Y) = 2 pi int log(rY) r h dr + kappa vol int r h dr + R1(Y) + R2(Y),
    R1 = vol int r h(ell(r)) E(rY) / (rY)^2 dr,
    R2 = -2 vol int r h(ell(r)) J(rY) dr,

where ``h`` stands for ``h(ell(r))`` and both remainders vanish as
``Y -> inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import AdmissionError, NumericalError
from .hyperbolic import CuspGeometry, TruncationHeights, ell
from .lattice2d import (DEFAULT_BUDGET, GAUSS_CIRCLE_C0, ReducedLattice, ShellTable,
                        iter_norms, kappa, kappa_from_integral, nonzero_norms)
from .quadrature import (DEFAULT_ABS_TOL, DEFAULT_REL_TOL, QuadResult,
                         check_decay_certificate, integrate, panel_integrate)

MIN_DECAY_RATE = 10.0


@dataclass(frozen=True)
class KernelProfile:
    """A profile ``h(ell)`` with a certificate ``|h(ell)| <= C exp(-A ell)``.

    ``h`` must accept numpy arrays. The certificate is sampled on
    ``ell in [0, 100]`` at construction and drives every cutoff below.
    """

    h: Callable
    decay_rate: float = MIN_DECAY_RATE
    decay_constant: float = 1.0
    name: str = "custom"

    def __post_init__(self):
        if self.decay_rate < MIN_DECAY_RATE:
            raise AdmissionError(
                f"decay certificate needs rate >= {MIN_DECAY_RATE}, got {self.decay_rate}")
        check_decay_certificate(self.h, self.decay_rate, self.decay_constant,
                                np.linspace(0.0, 100.0, 2001), f"profile {self.name}")

    def __call__(self, length):
        return self.h(length)

    def of_r(self, r):
        """``h(ell(r))``."""
        return self.h(ell(np.asarray(r, dtype=float)))

    def __add__(self, other: "KernelProfile") -> "KernelProfile":
        f, g = self.h, other.h
        return KernelProfile(lambda x: f(x) + g(x),
                             min(self.decay_rate, other.decay_rate),
                             self.decay_constant + other.decay_constant,
                             f"{self.name}+{other.name}")

    def scaled(self, c: float) -> "KernelProfile":
        f = self.h
        return KernelProfile(lambda x: c * f(x), self.decay_rate,
                             max(abs(c), 1e-300) * self.decay_constant, f"{c}*{self.name}")

    @property
    def power(self) -> float:
        """Exponent ``p`` with ``|h(ell(r))| <= C r^-p`` for all ``r > 0``."""
        return 4 * self.decay_rate

    def is_zero(self) -> bool:
        return self.name == "zero"


def gaussian_profile(scale: float = 1.0) -> KernelProfile:
    """``exp(-(ell/s)^2) <= exp(25 s^2) exp(-10 ell)``."""
    if not scale > 0:
        raise AdmissionError("gaussian scale must be positive")
    return KernelProfile(lambda x: np.exp(-(np.asarray(x, dtype=float) / scale) ** 2),
                         MIN_DECAY_RATE, math.exp(25 * scale**2), f"gaussian(scale={scale:g})")


def exponential_profile(rate: float) -> KernelProfile:
    return KernelProfile(lambda x: np.exp(-rate * np.asarray(x, dtype=float)),
                         rate, 1.0, f"exp(rate={rate:g})")


def zero_profile() -> KernelProfile:
    return KernelProfile(lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                         MIN_DECAY_RATE, 1.0, "zero")


def profile_from_descriptor(d: dict) -> KernelProfile:
    kind = d.get("profile")
    if kind == "gaussian":
        return gaussian_profile(float(d.get("scale", 1.0)))
    if kind == "exp":
        if "rate" not in d:
            raise AdmissionError("exp profile needs a 'rate'")
        return exponential_profile(float(d["rate"]))
    if kind == "zero":
        return zero_profile()
    raise AdmissionError(f"unknown profile {kind!r}")


# -- radial integrals ----------------------------------------------------------------

def radial_cutoff(h: KernelProfile, tol: float, weight_power: float = 1.0) -> float:
    """``R >= 1`` with ``int_R^inf r^w |h(ell(r))| dr <= tol``."""
    q = h.power - weight_power - 1
    if q <= 0:
        raise AdmissionError("profile decays too slowly for this moment")
    return max(1.0, (h.decay_constant / (q * tol)) ** (1 / q))


def _radial(h, weight, wpow, tol):
    R = radial_cutoff(h, tol, wpow)
    f = lambda r: float(weight(r) * h.of_r(r))
    pts = [x for x in (1.0, 4.0, 16.0) if x < R]
    res = integrate(f, 0.0, R, tol, 1e-12, points=pts)
    return QuadResult(res.value, res.error + tol)


@dataclass(frozen=True)
class RadialMoments:
    m0: QuadResult     # int h(ell(r)) dr
    m1: QuadResult     # int r h(ell(r)) dr
    mlog: QuadResult   # int r log r h(ell(r)) dr


def radial_moments(h: KernelProfile, tol: float = 1e-13) -> RadialMoments:
    if h.is_zero():
        z = QuadResult(0.0, 0.0)
        return RadialMoments(z, z, z)
    m0 = _radial(h, lambda r: 1.0, 0.0, tol)
    m1 = _radial(h, lambda r: r, 1.0, tol)
    # |r log r| <= r^2 for r >= 1
    mlog = _radial(h, lambda r: r * math.log(r) if r > 0 else 0.0, 2.0, tol)
    return RadialMoments(m0, m1, mlog)


# -- brute force --------------------------------------------------------------------

def _tail_radius(lat, h, Y, tol):
    """Radius beyond which lattice points contribute less than ``tol`` to ``U(Y)``."""
    p, C = h.power, h.decay_constant
    Rc = Y * (4 * math.pi * p * C / ((p - 2) ** 2 * tol)) ** (1 / (p - 2))
    return max(Rc, lat.alpha1 + lat.alpha2)


def _full_sum_bound(lat, norms, p):
    """Upper bound for ``sum_{v != 0} |v|^-p``."""
    d = lat.alpha1 + lat.alpha2
    head = np.sum(norms[norms <= d] ** -p)
    return head + 4 * math.pi * p * d ** (2 - p) / ((p - 2) * lat.covolume)


def unipotent_bruteforce(lat: ReducedLattice, h: KernelProfile, Y: float,
                         tol: float = 1e-9, method: str = "quadrature",
                         budget: int = DEFAULT_BUDGET) -> QuadResult:
    """``vol int_0^Y sum_{v != 0} h(ell(|v|/y)) dy / y^3`` by enumeration.

    ``method="quadrature"`` enumerates every vector up to the certified radius
    and integrates the lattice sum over ``y`` adaptively. ``method="shell"``
    uses ``int_0^Y h(ell(rho/y)) dy/y^3 = rho^-2 G(rho/Y)`` with
    ``G(a) = int_a^inf r h(ell(r)) dr`` tabulated once; it scales to large ``Y``.
    """
    if not Y >= 1:
        raise AdmissionError("truncation height must be >= 1")
    if h.is_zero():
        return QuadResult(0.0, 0.0)
    vol = lat.covolume
    Rc = _tail_radius(lat, h, Y, tol / 4)
    if method == "quadrature":
        return _brute_quadrature(lat, h, Y, tol, Rc, budget)
    if method == "shell":
        return _brute_shell(lat, h, Y, tol, Rc, budget)
    raise AdmissionError(f"unknown method {method!r}")


def _brute_quadrature(lat, h, Y, tol, Rc, budget):
    vol, p, C = lat.covolume, h.power, h.decay_constant
    norms = nonzero_norms(lat, Rc, budget)
    rho, mult = np.unique(norms, return_counts=True)
    Z = _full_sum_bound(lat, norms, p)
    y0 = min(Y, (tol * (p - 2) / (4 * vol * C * Z)) ** (1 / (p - 2)))

    def f(y):
        return vol * float(np.dot(mult, h.of_r(rho / y))) / y**3

    res = integrate(f, y0, Y, tol / 4, 1e-11, limit=1000)
    return QuadResult(res.value, res.error + 3 * tol / 4)


def _G_table(h, a_lo, a_hi, n=4096):
    """Hermite spline of ``G(a) = int_a^inf r h(ell(r)) dr`` on ``[a_lo, a_hi]``."""
    grid = np.geomspace(a_lo, a_hi, n)
    pieces, err = [], 0.0
    vals, e = panel_integrate(lambda r: r * h.of_r(r), grid, order=16)
    # per-panel integrals are needed, so redo with the panel rule directly
    x, w = np.polynomial.legendre.leggauss(16)
    half = 0.5 * np.diff(grid)
    mid = 0.5 * (grid[1:] + grid[:-1])
    nodes = mid[:, None] + half[:, None] * x
    panel = (nodes * h.of_r(nodes) * w).sum(axis=1) * half
    tail = _radial_tail(h, a_hi)
    G = np.concatenate([np.cumsum(panel[::-1])[::-1], [0.0]]) + tail
    dG = -grid * h.of_r(grid)
    return CubicHermiteSpline(grid, G, dG), e


def _radial_tail(h, a):
    res = integrate(lambda r: float(r * h.of_r(r)), a, np.inf, 1e-15, 1e-12)
    return res.value


def _brute_shell(lat, h, Y, tol, Rc, budget):
    vol = lat.covolume
    a_lo, a_hi = lat.alpha1 / Y * (1 - 1e-12), Rc / Y * (1 + 1e-12)
    spline, err = _G_table(h, a_lo, a_hi)
    total = 0.0
    for chunk in iter_norms(lat, Rc, budget):
        total += float(np.sum(spline(chunk / Y) / chunk**2))
    return QuadResult(vol * total, vol * err + tol)


# -- closed form ---------------------------------------------------------------------

def _remainder_radius(lat, h, Y, tol):
    """``r_c`` so that the remainder integrands beyond ``r_c`` are below ``tol``."""
    # |E(rho)| / rho^2 and |J(rho)| are at most C0 (1/(a1 rho) + a2/(a1 rho^2)) for rho >= a1
    return max(radial_cutoff(h, tol / (3 * GAUSS_CIRCLE_C0 * lat.covolume / lat.alpha1), 1.0),
               2 * lat.alpha2 / Y)


@dataclass(frozen=True)
class Remainders:
    R1: QuadResult
    R2: QuadResult


def closed_form_remainders(lat: ReducedLattice, h: KernelProfile, Y: float,
                           tol: float = 1e-10, budget: int = DEFAULT_BUDGET,
                           max_panels: int = 2_000_000) -> Remainders:
    """``R1`` and ``R2`` by exact Gauss-Legendre panels between lattice shells."""
    if h.is_zero():
        z = QuadResult(0.0, 0.0)
        return Remainders(z, z)
    vol, a1 = lat.covolume, lat.alpha1
    rc = _remainder_radius(lat, h, Y, tol)
    table = ShellTable(lat, rc * Y, budget)
    shells = np.unique(table.norms) / Y
    if shells.size > max_panels:
        raise NumericalError(f"{shells.size} lattice shells exceed the panel cap")
    I = kappa(lat).error_integral
    m1 = radial_moments(h).m1

    # first panel: no lattice points, E(rho) = -pi rho^2/vol, head = -(pi/vol) log(rho/a1)
    r0 = a1 / Y
    first1 = integrate(lambda r: -math.pi * r * float(h.of_r(r)), 0.0, r0, tol / 4, 1e-12)
    first2 = integrate(lambda r: -2 * math.pi * r * float(h.of_r(r)) * math.log(r * Y / a1)
                       if r > 0 else 0.0, 0.0, r0, tol / 4, 1e-12)

    edges = np.concatenate([shells, [rc]]) if shells.size else np.array([r0, rc])
    edges = edges[edges <= rc]
    if edges[-1] < rc:
        edges = np.append(edges, rc)

    def g1(r):
        rho = r * Y
        return vol * r * h.of_r(r) * table.error(rho) / rho**2

    def g2(r):
        return 2 * vol * r * h.of_r(r) * table.head_integral(r * Y)

    v1, e1 = panel_integrate(g1, edges) if edges.size > 1 else (0.0, 0.0)
    v2, e2 = panel_integrate(g2, edges) if edges.size > 1 else (0.0, 0.0)
    R1 = QuadResult(first1.value + float(v1), first1.error + e1 + tol)
    R2 = QuadResult(first2.value + float(v2) - 2 * vol * I * m1.value,
                    first2.error + e2 + 2 * vol * abs(I) * m1.error + tol)
    return Remainders(R1, R2)


def unipotent_closed_form(lat: ReducedLattice, h: KernelProfile, Y: float,
                          variant: str = "derived", r_weight: bool = True,
                          tol: float = 1e-10, budget: int = DEFAULT_BUDGET) -> QuadResult:
    """Closed form of the truncated unipotent integral.

    ``variant`` picks the formula for kappa; ``r_weight=False`` replaces
    ``int r h dr`` by ``int h dr`` in the kappa term (an alternative weighting).
    Only ``variant="derived"`` with ``r_weight=True`` reproduces the
    brute-force integral.
    """
    if not Y >= 1:
        raise AdmissionError("truncation height must be >= 1")
    if h.is_zero():
        return QuadResult(0.0, 0.0)
    mom = radial_moments(h)
    cc = kappa(lat)
    k = kappa_from_integral(cc.error_integral, lat, variant)
    weight = mom.m1 if r_weight else mom.m0
    rem = closed_form_remainders(lat, h, Y, tol, budget)
    log_part = mom.mlog.scaled(2 * math.pi) + mom.m1.scaled(2 * math.pi * math.log(Y))
    return log_part + weight.scaled(k * lat.covolume) + rem.R1 + rem.R2


# -- regularised trace ---------------------------------------------------------------

def _lattice_of(c):
    if isinstance(c, CuspGeometry):
        return c.effective_lattice
    if isinstance(c, ReducedLattice):
        return c
    raise AdmissionError(f"expected a cusp or lattice, got {type(c).__name__}")


def cusp_regularized_terms(cusps: Sequence, h: KernelProfile, variant: str = "derived",
                           breakdown: bool = False):
    """``2 pi (#cusps) int r log r h dr + sum_j kappa_j vol_j int r h dr``."""
    cusps = list(cusps)
    if not cusps or h.is_zero():
        return (0.0, 0.0) if breakdown else 0.0
    mom = radial_moments(h)
    log_term = 2 * math.pi * len(cusps) * mom.mlog.value
    kterm = 0.0
    for c in cusps:
        lat = _lattice_of(c)
        k = kappa_from_integral(kappa(lat).error_integral, lat, variant)
        kterm += k * lat.covolume * mom.m1.value
    return (log_term, kterm) if breakdown else log_term + kterm


def _zero_loxodromic(h):
    return 0.0


@dataclass(frozen=True)
class ManifoldSummary:
    """Volume, cusps and the supplied non-cuspidal contributions of a manifold."""

    volume: float
    cusps: tuple = ()
    loxodromic_term: Callable = _zero_loxodromic
    identity_density: float = 0.0

    def __post_init__(self):
        if not self.volume > 0:
            raise AdmissionError("volume must be positive")
        object.__setattr__(self, "cusps", tuple(self.cusps))


@dataclass(frozen=True)
class TraceBreakdown:
    identity: float
    loxodromic: float
    log_term: float
    kappa_term: float

    @property
    def total(self) -> float:
        return self.identity + self.loxodromic + self.log_term + self.kappa_term


def trace_breakdown(m: ManifoldSummary, h: KernelProfile) -> TraceBreakdown:
    log_term, kterm = cusp_regularized_terms(m.cusps, h, breakdown=True)
    return TraceBreakdown(m.volume * m.identity_density, float(m.loxodromic_term(h)),
                          log_term, kterm)


def regularized_trace(m: ManifoldSummary, h: KernelProfile) -> float:
    return trace_breakdown(m, h).total


def truncation_defect(cusps: Sequence, h: KernelProfile, Y, variant: str = "derived",
                      tol: float = 1e-10) -> float:
    """Truncated minus regularised trace, cusp by cusp.

    ``variant="derived"``: ``sum_j 2 pi log Y_j int r h + R1_j + R2_j``.
    ``variant="alternative"``: the alternative with the inner error integral taken
    from ``max(alpha1, r Y)`` with unit coefficient and no ``r`` weight in the
    last term; it does not match the closed form and is kept for reports.
    """
    cusps = list(cusps)
    heights = Y if isinstance(Y, TruncationHeights) else TruncationHeights(tuple(Y))
    if len(heights) != len(cusps):
        raise AdmissionError("one truncation height per cusp is required")
    if h.is_zero():
        return 0.0
    m1 = radial_moments(h).m1.value
    total = 0.0
    for c, Yj in zip(cusps, heights):
        lat = _lattice_of(c)
        total += 2 * math.pi * math.log(Yj) * m1
        if variant == "derived":
            rem = closed_form_remainders(lat, h, Yj, tol)
            total += rem.R1.value + rem.R2.value
        elif variant == "alternative":
            total += _alternative_remainders(lat, h, Yj, tol)
        else:
            raise AdmissionError(f"unknown variant {variant!r}")
    return total


def _alternative_remainders(lat, h, Y, tol):
    vol, a1 = lat.covolume, lat.alpha1
    rc = _remainder_radius(lat, h, Y, tol)
    table = ShellTable(lat, rc * Y)
    I = kappa(lat).error_integral
    edges = np.unique(np.concatenate([[a1 / Y], table.norms / Y, [rc]]))
    edges = edges[edges <= rc]

    def g(r):
        rho = r * Y
        J = I - table.head_integral(rho)
        return vol * (r * h.of_r(r) * J + h.of_r(r) * table.error(rho) / rho**2)

    head = integrate(lambda r: vol * float(h.of_r(r)) * (r * I - math.pi / vol), 0.0,
                     a1 / Y, tol, 1e-12)
    v, _ = panel_integrate(g, edges)
    return head.value + float(v)
