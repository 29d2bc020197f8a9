"""Quadrature helpers with error estimates.

Two schemes are used throughout the package:

* :func:`integrate` wraps QUADPACK (adaptive Gauss-Kronrod) and raises
  :class:`NumericalError` instead of emitting warnings.
* :func:`panel_integrate` applies fixed-order Gauss-Legendre rules on a
  user supplied partition. It is meant for integrands that are smooth on each
  panel but have known breakpoints (lattice shells) or oscillate with a known
  period.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate as _spi

from .errors import AdmissionError, NumericalError

DEFAULT_ABS_TOL = 1e-10
DEFAULT_REL_TOL = 1e-8


@dataclass(frozen=True)
class QuadResult:
    """A quadrature value together with an estimate of its absolute error."""

    value: float
    error: float

    def __float__(self) -> float:
        return float(self.value)

    def __add__(self, other: "QuadResult") -> "QuadResult":
        return QuadResult(self.value + other.value, self.error + other.error)

    def scaled(self, c: float) -> "QuadResult":
        return QuadResult(c * self.value, abs(c) * self.error)


def integrate(f, a, b, abs_tol=DEFAULT_ABS_TOL, rel_tol=DEFAULT_REL_TOL,
              points=None, limit=500) -> QuadResult:
    """Adaptive Gauss-Kronrod integral of a scalar function on ``[a, b]``.

    ``b`` may be ``np.inf``. Breakpoints in ``points`` are only honoured on
    finite intervals (a QUADPACK restriction).
    """
    with warnings.catch_warnings():
        warnings.simplefilter("error", _spi.IntegrationWarning)
        try:
            if points is not None and np.isfinite(a) and np.isfinite(b):
                pts = sorted(p for p in points if a < p < b)
                val, err = _spi.quad(f, a, b, epsabs=abs_tol, epsrel=rel_tol,
                                     points=pts or None, limit=limit)
            else:
                val, err = _spi.quad(f, a, b, epsabs=abs_tol, epsrel=rel_tol,
                                     limit=limit)
        except _spi.IntegrationWarning as exc:
            raise NumericalError(f"quadrature failed on [{a}, {b}]: {exc}") from exc
    tol = max(abs_tol, rel_tol * abs(val))
    if not np.isfinite(val) or err > 10 * tol:
        raise NumericalError(
            f"quadrature on [{a}, {b}] did not converge (estimate {err:.3g})")
    return QuadResult(float(val), float(err))


@lru_cache(maxsize=None)
def _gauss_legendre(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def panel_integrate(f, edges, order=16):
    """Integrate a vectorised ``f`` over consecutive panels ``edges``.

    The value uses ``order`` nodes per panel; the error estimate is the
    absolute difference with the ``order // 2`` rule, which overestimates the
    error of the higher-order result for smooth integrands. ``f`` may return
    complex values.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise AdmissionError("panel_integrate needs at least two edges")
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)

    def rule(n):
        x, w = _gauss_legendre(n)
        nodes = mid[:, None] + half[:, None] * x[None, :]
        vals = f(nodes)
        return (vals * w[None, :]).sum(axis=1) * half

    fine = rule(order)
    coarse = rule(max(order // 2, 2))
    per_panel_err = np.abs(fine - coarse)
    value = fine.sum()
    if not np.all(np.isfinite(np.asarray(value))):
        raise NumericalError("non-finite value in panel quadrature")
    return value, float(per_panel_err.sum())


def check_decay_certificate(f, rate, constant, grid, what="function"):
    """Check ``|f(x)| <= constant * exp(-rate * |x|)`` on ``grid``.

    The comparison is done in log space so that certificates with huge
    constants (e.g. a Gaussian bounded by ``exp(25 - 10 x)``) stay finite.
    """
    if rate <= 0 or constant <= 0:
        raise AdmissionError(f"{what}: decay certificate needs positive constants")
    grid = np.asarray(grid, dtype=float)
    vals = np.abs(np.asarray(f(grid), dtype=complex))
    with np.errstate(divide="ignore"):
        lhs = np.log(vals)
    rhs = np.log(constant) - rate * np.abs(grid)
    # subnormal values carry too few digits to be compared
    bad = (vals > 1e-300) & (lhs > rhs + 1e-9 * np.maximum(1.0, np.abs(rhs)))
    if np.any(bad):
        x = grid[np.argmax(bad)]
        raise AdmissionError(
            f"{what}: decay certificate |f| <= {constant:.3g} exp(-{rate} x) "
            f"fails at x = {x:.6g}")
