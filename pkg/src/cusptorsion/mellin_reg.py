"""Zeta regularisation of heat traces.

For a trace function ``phi(t)`` with a small-time expansion

    phi(t) = sum_k a_k t^((k-3)/2) + sum_k b_k t^((k-1)/2) log t + H(t)

the regularised determinant is ``zeta'(0)`` where
``zeta(s) = Gamma(s)^-1 int_0^inf phi(t) t^(s-1) dt``. The integral is split at
``t0``: the small-time part is continued term by term, the large-time part is
an entire function of ``s`` whose derivative at 0 is ``int_{t0}^inf phi dt/t``.

Per-term derivatives at ``s = 0`` (``1/Gamma(s) = s + gamma s^2 + O(s^3)``):

* ``t^alpha``, ``alpha != 0``: ``t0^alpha / alpha``
* ``t^0``: ``gamma + log t0``
* ``t^alpha log t``, ``alpha != 0``: ``t0^alpha (log t0 / alpha - 1 / alpha^2)``
* ``t^0 log t`` leaves a pole in ``zeta`` at 0 and is rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.special import exp1

from .errors import AdmissionError, NumericalError
from .quadrature import DEFAULT_ABS_TOL, DEFAULT_REL_TOL, integrate
from .rep_theory import RepWeights, l2_torsion_coefficient

EULER_GAMMA = 0.57721566490153286
DEFAULT_CONSISTENCY_RTOL = 1e-6


def _zero(t):
    return np.zeros_like(np.asarray(t, dtype=float))


def a_exponent(k: int) -> float:
    return (k - 3) / 2


def b_exponent(k: int) -> float:
    return (k - 1) / 2


@dataclass(frozen=True)
class SmallTimeExpansion:
    """Coefficients and remainder of a small-time heat-trace expansion.

    ``a[k]`` multiplies ``t^((k-3)/2)`` and ``b[k]`` multiplies
    ``t^((k-1)/2) log t``. The remainder must satisfy
    ``|H(t)| <= bound * t^((order+1)/2)`` on ``(0, t_max]``; this is sampled on
    construction. ``order=None`` skips the check (no remainder, or a remainder
    whose bound is certified elsewhere).
    """

    a: Mapping[int, float] = field(default_factory=dict)
    b: Mapping[int, float] = field(default_factory=dict)
    remainder: Callable = _zero
    bound: float = 0.0
    order: int | None = None
    t_max: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "a", {int(k): float(v) for k, v in dict(self.a).items()})
        object.__setattr__(self, "b", {int(k): float(v) for k, v in dict(self.b).items()})
        for name, coeffs in (("a", self.a), ("b", self.b)):
            if any(k < 0 for k in coeffs):
                raise AdmissionError(f"{name}-indices must be nonnegative")
            if not all(math.isfinite(v) for v in coeffs.values()):
                raise AdmissionError(f"{name}-coefficients must be finite")
        if self.order is not None:
            self._check_bound()

    def _check_bound(self, n=200):
        grid = np.geomspace(self.t_max * 1e-6, self.t_max, n)
        vals = np.abs(np.asarray(self.remainder(grid), dtype=float))
        lim = self.bound * grid ** ((self.order + 1) / 2)
        bad = vals > lim * (1 + 1e-9) + 1e-300
        if np.any(bad):
            t = grid[np.argmax(bad)]
            raise AdmissionError(
                f"remainder bound |H(t)| <= {self.bound:.3g} t^{(self.order + 1) / 2} "
                f"violated at t = {t:.3g}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.asarray(self.remainder(t), dtype=float).copy()
        for k, c in self.a.items():
            out = out + c * t ** a_exponent(k)
        for k, c in self.b.items():
            out = out + c * t ** b_exponent(k) * np.log(t)
        return float(out) if out.ndim == 0 else out

    def magnitude(self, t: float) -> float:
        """Sum of the absolute values of the terms at ``t``; sets the roundoff scale."""
        m = abs(float(self.remainder(t)))
        m += sum(abs(c) * t ** a_exponent(k) for k, c in self.a.items())
        m += sum(abs(c * math.log(t)) * t ** b_exponent(k) for k, c in self.b.items())
        return m

    def __add__(self, other: "SmallTimeExpansion") -> "SmallTimeExpansion":
        a = dict(self.a)
        for k, v in other.a.items():
            a[k] = a.get(k, 0.0) + v
        b = dict(self.b)
        for k, v in other.b.items():
            b[k] = b.get(k, 0.0) + v
        f, g = self.remainder, other.remainder
        return SmallTimeExpansion(a, b, lambda t: np.asarray(f(t)) + np.asarray(g(t)))


@dataclass(frozen=True)
class DiscreteSpectrum:
    """Eigenvalues with multiplicities; ``gap`` is an optional declared lower bound."""

    eigenvalues: tuple = ()
    multiplicities: tuple = ()
    gap: float | None = None

    def __post_init__(self):
        lam = tuple(float(x) for x in self.eigenvalues)
        mult = tuple(self.multiplicities) or (1,) * len(lam)
        if len(mult) != len(lam):
            raise AdmissionError("eigenvalues and multiplicities differ in length")
        if any(int(m) != m or m < 1 for m in mult):
            raise AdmissionError("multiplicities must be positive integers")
        if self.gap is not None and any(x < self.gap for x in lam):
            raise AdmissionError("eigenvalue below the declared spectral gap")
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "multiplicities", tuple(int(m) for m in mult))

    @classmethod
    def from_pairs(cls, pairs, gap=None):
        pairs = list(pairs)
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs), gap)

    @property
    def arrays(self):
        return np.array(self.eigenvalues, dtype=float), np.array(self.multiplicities, dtype=float)

    def heat_trace(self, t):
        lam, mult = self.arrays
        t = np.asarray(t, dtype=float)
        out = (mult * np.exp(-np.multiply.outer(t, lam))).sum(axis=-1)
        return float(out) if out.ndim == 0 else out

    def log_det(self) -> float:
        """``-zeta'(0) = sum mult log lambda`` for a finite spectrum."""
        lam, mult = self.arrays
        return float(np.sum(mult * np.log(lam)))


def _power_term(alpha: float, t0: float) -> float:
    if alpha == 0:
        return EULER_GAMMA + math.log(t0)
    return t0**alpha / alpha


def _log_term(alpha: float, t0: float) -> float:
    if alpha == 0:
        raise AdmissionError("t^0 log t term: zeta has a pole at s = 0")
    return t0**alpha * (math.log(t0) / alpha - 1 / alpha**2)


def remainder_integral(exp: SmallTimeExpansion, t0: float,
                       abs_tol=DEFAULT_ABS_TOL, rel_tol=DEFAULT_REL_TOL):
    """``int_0^{t0} H(t) dt / t`` by adaptive quadrature."""
    if exp.remainder is _zero:
        return integrate(lambda t: 0.0, 0.0, t0)
    return integrate(lambda t: float(exp.remainder(t)) / t, 0.0, t0, abs_tol, rel_tol)


def mellin_zero_derivative(exp: SmallTimeExpansion, t0: float,
                           abs_tol=DEFAULT_ABS_TOL, rel_tol=DEFAULT_REL_TOL) -> float:
    """``d/ds [Gamma(s)^-1 int_0^{t0} phi(t) t^(s-1) dt]`` at ``s = 0``."""
    if not t0 > 0:
        raise AdmissionError("t0 must be positive")
    total = 0.0
    for k, c in exp.a.items():
        if c:
            total += c * _power_term(a_exponent(k), t0)
    for k, c in exp.b.items():
        if c:
            total += c * _log_term(b_exponent(k), t0)
    return total + remainder_integral(exp, t0, abs_tol, rel_tol).value


def large_time_integral(spec: DiscreteSpectrum, t0: float) -> float:
    """``sum mult * E1(lambda t0) = int_{t0}^inf sum mult exp(-lambda t) dt / t``."""
    if not t0 > 0:
        raise AdmissionError("t0 must be positive")
    lam, mult = spec.arrays
    if lam.size == 0:
        return 0.0
    if np.any(lam <= 0):
        raise AdmissionError("no spectral gap: eigenvalues must be positive")
    return float(np.sum(mult * exp1(lam * t0)))


def check_consistency(exp: SmallTimeExpansion, spec: DiscreteSpectrum, t0: float,
                      rtol: float = DEFAULT_CONSISTENCY_RTOL):
    lhs, rhs = exp(t0), spec.heat_trace(t0)
    dev = abs(lhs - rhs)
    # cancellation between expansion terms limits how well lhs can be known
    floor = 64 * np.finfo(float).eps * exp.magnitude(t0)
    if dev > max(rtol * max(abs(rhs), abs(lhs)), floor):
        raise AdmissionError(
            f"inconsistent trace model at t0 = {t0:g}: expansion {lhs:.12g}, "
            f"spectrum {rhs:.12g}, deviation {dev:.3g}")
    return dev


def regularized_log_det(exp: SmallTimeExpansion, spec: DiscreteSpectrum, t0: float,
                        rtol: float = DEFAULT_CONSISTENCY_RTOL,
                        abs_tol=DEFAULT_ABS_TOL, rel_tol=DEFAULT_REL_TOL) -> float:
    """``zeta'(0)`` of the trace described by ``exp`` near 0 and ``spec`` beyond ``t0``.

    This is ``log det`` in the convention ``det = exp(zeta'(0))``; for a finite
    spectrum it equals ``-sum mult log lambda``.
    """
    check_consistency(exp, spec, t0, rtol)
    return (mellin_zero_derivative(exp, t0, abs_tol, rel_tol)
            + large_time_integral(spec, t0))


def _exp_taylor_tail(x, J):
    """``exp(x) - sum_{j<=J} x^j / j!`` without cancellation for small ``|x|``."""
    x = np.asarray(x, dtype=float)
    direct = np.exp(x) - sum(x**j / math.factorial(j) for j in range(J + 1))
    series = np.zeros_like(x)
    term = x ** (J + 1) / math.factorial(J + 1)
    for j in range(J + 1, J + 40):
        series = series + term
        term = term * x / (j + 1)
    return np.where(np.abs(x) < 1.0, series, direct)


def synthetic_expansion(spec: DiscreteSpectrum, order: int = 5,
                        t_max: float = 2.0) -> SmallTimeExpansion:
    """Exact small-time expansion of ``sum mult exp(-lambda t)``.

    The Taylor polynomial up to ``t^J``, ``J = order // 2``, fills the
    a-coefficients ``k = 2j + 3``; the remainder is the Taylor tail, bounded by
    ``sum mult lambda^(J+1) / (J+1)!  * t^(J+1)``.
    """
    if order < 0:
        raise AdmissionError("order must be nonnegative")
    lam, mult = spec.arrays
    J = order // 2
    a = {2 * j + 3: float(np.sum(mult * (-lam) ** j)) / math.factorial(j)
         for j in range(J + 1)}

    def remainder(t):
        t = np.asarray(t, dtype=float)
        x = -np.multiply.outer(t, lam)
        out = (mult * _exp_taylor_tail(x, J)).sum(axis=-1)
        return float(out) if out.ndim == 0 else out

    excess = J + 1 - (order + 1) / 2
    bound = float(np.sum(mult * lam ** (J + 1))) / math.factorial(J + 1) * t_max**excess
    return SmallTimeExpansion(a, {}, remainder, bound * (1 + 1e-12), order, t_max)


@dataclass(frozen=True)
class TorsionLedger:
    log_det: dict
    log_T_R: float
    t0: float | None = None


def analytic_torsion(log_dets: Mapping[int, float], t0: float | None = None) -> TorsionLedger:
    """``log T = (-3 log det_0 + log det_1) / 2``, degrees 2 and 3 by duality."""
    missing = {0, 1} - set(log_dets)
    if missing:
        raise AdmissionError(f"missing degree(s) {sorted(missing)}")
    ld = {int(p): float(v) for p, v in log_dets.items()}
    return TorsionLedger(ld, 0.5 * (-3 * ld[0] + ld[1]), t0)


def alternating_log_torsion(log_dets: Mapping[int, float]) -> float:
    """``1/2 sum_p (-1)^p p log det_p`` over degrees 0..3."""
    return 0.5 * sum((-1) ** p * p * log_dets[p] for p in range(4))


def l2_log_torsion(volume: float, w: RepWeights) -> float:
    if not volume > 0:
        raise AdmissionError("volume must be positive")
    return volume * l2_torsion_coefficient(w)


@dataclass(frozen=True)
class TailCheck:
    condition_ok: bool
    tail: float
    violation_at: float | None = None


def small_eigenvalue_tail(measure: DiscreteSpectrum, C: float, alpha: float,
                          lambda0: float, t0: float) -> TailCheck:
    """Check ``#{lambda' <= lambda} <= C lambda^alpha`` at every eigenvalue up to ``lambda0``."""
    for name, v in (("C", C), ("alpha", alpha), ("lambda0", lambda0), ("t0", t0)):
        if not v > 0:
            raise AdmissionError(f"{name} must be positive")
    lam, mult = measure.arrays
    order = np.argsort(lam)
    lam, mult = lam[order], mult[order]
    counts = np.cumsum(mult)
    violation = None
    for i, x in enumerate(lam):
        if x > lambda0:
            break
        # count every eigenvalue <= x, including later ties
        c = counts[np.searchsorted(lam, x, side="right") - 1]
        if c > C * x**alpha:
            violation = float(x)
            break
    tail = large_time_integral(measure, t0) if lam.size else 0.0
    return TailCheck(violation is None, tail, violation)


@dataclass(frozen=True)
class HomologySummary:
    """Per-degree torsion orders and covolumes of the free parts."""

    torsion_order: Mapping[int, int]
    free_covolume: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if any(int(v) != v or v < 1 for v in self.torsion_order.values()):
            raise AdmissionError("torsion orders must be positive integers")
        if any(not v > 0 for v in self.free_covolume.values()):
            raise AdmissionError("free covolumes must be positive")


def reidemeister_from_homology(h: HomologySummary) -> float:
    """``log tau = sum_p (-1)^p (log |H_p tors| - log vol H_p free)``."""
    degrees = set(h.torsion_order) | set(h.free_covolume)
    return float(sum((-1) ** p * (math.log(h.torsion_order.get(p, 1))
                                  - math.log(h.free_covolume.get(p, 1.0)))
                     for p in degrees))


def boundary_correction(dimV: int, euler_boundary: int) -> float:
    return math.log(2) / 2 * dimV * euler_boundary
