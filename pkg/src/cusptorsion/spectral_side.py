"""Scattering matrices and the spectral side of the trace formula.

A :class:`ScatteringModel` is a matrix function ``Psi(s)`` with
``Psi(s) Psi(-s) = 1`` that is unitary on the imaginary axis, together with
the derivative of ``u -> Psi(iu)``. All models are user supplied; a few
explicit families are provided for testing.

Conventions: ``s = iu``, ``Psi'(s) = -i d/du Psi(iu)``, and ``<x, v> =
sum_i x_i conj(v_i)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.linalg import block_diag

from .errors import AdmissionError
from .quadrature import check_decay_certificate, integrate, panel_integrate
from .rep_theory import RepWeights, casimir, weight_multiplicities

ADMISSION_GRID = np.linspace(-8.0, 8.0, 64)
ADMISSION_TOL = 1e-9
SMALL_U = 1e-4


def _as_matrix(x, dim):
    m = np.asarray(x, dtype=complex)
    return m.reshape(dim, dim)


@dataclass(frozen=True)
class ScatteringModel:
    """``Psi`` and ``d/du Psi(iu)``; admissibility is checked on construction.

    ``blocks`` optionally maps a weight ``l`` to the model of the block
    ``Psi_l``; ``psi`` is then their direct sum in key order.
    """

    dim: int
    psi: Callable
    dpsi: Callable
    name: str = "custom"
    blocks: Mapping | None = None

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise AdmissionError("dim must be a positive integer")
        self._admit()

    def _admit(self):
        eye = np.eye(self.dim)
        for u in ADMISSION_GRID:
            for x in (0.0, 0.1):
                s = complex(x, u)
                prod = self.at(s) @ self.at(-s)
                if np.max(np.abs(prod - eye)) > ADMISSION_TOL:
                    raise AdmissionError(
                        f"{self.name}: functional equation Psi(s)Psi(-s) = 1 fails at s = {s}")
            P = self.at(1j * u)
            if np.max(np.abs(P.conj().T @ P - eye)) > ADMISSION_TOL:
                raise AdmissionError(f"{self.name}: Psi(iu) not unitary at u = {u:g}")
            d = 1e-5
            fd = (self.at(1j * (u + d)) - self.at(1j * (u - d))) / (2 * d)
            if np.max(np.abs(fd - self.d_at(u))) > 1e-6 * max(1.0, np.max(np.abs(fd))):
                raise AdmissionError(f"{self.name}: dpsi disagrees with Psi at u = {u:g}")

    def at(self, s) -> np.ndarray:
        return _as_matrix(self.psi(complex(s)), self.dim)

    def d_at(self, u) -> np.ndarray:
        return _as_matrix(self.dpsi(float(u)), self.dim)

    def log_derivative_trace(self, u) -> complex:
        """``tr(Psi(iu)^-1 d/du Psi(iu))``; purely imaginary for unitary ``Psi``."""
        return complex(np.trace(np.linalg.solve(self.at(1j * u), self.d_at(u))))

    def trace_at(self, s) -> complex:
        return complex(np.trace(self.at(s)))


def constant_model(matrix) -> ScatteringModel:
    """Constant ``Psi = U``; admissible iff ``U`` is unitary with ``U^2 = 1``."""
    U = np.atleast_2d(np.asarray(matrix, dtype=complex))
    if U.shape[0] != U.shape[1]:
        raise AdmissionError("constant model needs a square matrix")
    Z = np.zeros_like(U)
    return ScatteringModel(U.shape[0], lambda s: U, lambda u: Z, "constant")


def mobius_model(pole: float = 1.0) -> ScatteringModel:
    """Scalar ``(p - s) / (p + s)``."""
    p = float(pole)
    if not p > 0:
        raise AdmissionError("pole must be positive")
    return ScatteringModel(1, lambda s: (p - s) / (p + s),
                           lambda u: -2j * p / (p + 1j * u) ** 2, f"mobius(pole={p:g})")


def exponential_model(c: float) -> ScatteringModel:
    """Scalar ``exp(-c s)``."""
    return ScatteringModel(1, lambda s: np.exp(-c * s),
                           lambda u: -1j * c * np.exp(-1j * c * u), f"exp(c={c:g})")


def direct_sum(models, keys=None) -> ScatteringModel:
    models = list(models)
    if not models:
        raise AdmissionError("direct sum of no models")
    dim = sum(m.dim for m in models)
    blocks = dict(zip(keys, models)) if keys is not None else None
    return ScatteringModel(dim, lambda s: block_diag(*[m.at(s) for m in models]),
                           lambda u: block_diag(*[m.d_at(u) for m in models]),
                           "+".join(m.name for m in models), blocks)


def model_from_descriptor(d: Mapping) -> ScatteringModel:
    kind = d.get("type")
    if kind == "constant":
        return constant_model(d["matrix"])
    if kind == "mobius_scalar":
        return mobius_model(float(d.get("pole", 1.0)))
    if kind == "exponential":
        return exponential_model(float(d["c"]))
    if kind == "block":
        items = sorted(((int(l), model_from_descriptor(m)) for l, m in d["blocks"].items()))
        return direct_sum([m for _, m in items], [l for l, _ in items])
    raise AdmissionError(f"unknown scattering model type {kind!r}")


@dataclass(frozen=True)
class TestFunction:
    """An even test function ``xi`` with ``|xi(u)| <= C exp(-A |u|)``."""

    __test__ = False  # not a pytest class

    xi: Callable
    decay_rate: float
    decay_constant: float
    name: str = "custom"

    def __post_init__(self):
        check_decay_certificate(self.xi, self.decay_rate, self.decay_constant,
                                np.linspace(-50, 50, 4001), f"test function {self.name}")

    def __call__(self, u):
        return self.xi(u)

    def cutoff(self, tol: float) -> float:
        """``U`` with ``int_{|u|>U} |xi(u)| / |u| du <= tol`` (and ``U >= 1``)."""
        A, C = self.decay_rate, self.decay_constant
        return max(1.0, math.log(2 * C / (A * tol)) / A)


def gaussian_test_function(width: float = 1.0) -> TestFunction:
    """``exp(-(u/w)^2) <= exp(w^2/4) exp(-|u|)``."""
    return TestFunction(lambda u: np.exp(-(np.asarray(u, dtype=float) / width) ** 2),
                        1.0, math.exp(width**2 / 4), f"gaussian(width={width:g})")


# -- Maass-Selberg norms -----------------------------------------------------------

def _heights(Y, dim):
    Y = np.atleast_1d(np.asarray(Y, dtype=float))
    if np.any(Y <= 0):
        raise AdmissionError("heights must be positive")
    if Y.size == dim:
        return Y
    if dim % Y.size:
        raise AdmissionError(f"{Y.size} heights do not fit a model of size {dim}")
    return np.repeat(Y, dim // Y.size)


def _vector(v, dim):
    v = np.asarray(v, dtype=complex).ravel()
    if v.size != dim:
        raise AdmissionError(f"vector has length {v.size}, model has size {dim}")
    return v


def _log_derivative_term(model, u, v):
    s = 1j * u
    dP = -1j * model.d_at(u)                    # Psi'(s)
    x = np.linalg.solve(model.at(s), dP @ v)
    return complex(np.vdot(v, x))


def maass_selberg_norm0(model: ScatteringModel, Y, u: float, v) -> float:
    """Squared norm of the truncated Eisenstein series at ``s = iu``.

    ``2 sum log(Y_j)|v_j|^2 + <Psi(s)^-1 Psi'(s) v, v>
    + sum_j (Y_j^s <Psi(-s) v, v>_j - Y_j^-s <Psi(s) v, v>_j) / s``.
    ``Y`` has one entry per cusp (each cusp owning ``dim / len(Y)``
    coordinates) or one per coordinate. For ``|u| < 1e-4`` the last term is
    replaced by its Taylor limit; ``u = 0`` itself is rejected.
    """
    if u == 0:
        raise AdmissionError("u = 0: evaluate via limit (maass_selberg_norm0_limit)")
    return _ms0(model, Y, u, v)


def maass_selberg_norm0_limit(model: ScatteringModel, Y, v) -> float:
    """The ``u -> 0`` limit of :func:`maass_selberg_norm0`."""
    return _ms0(model, Y, 0.0, v)


def _ms0(model, Y, u, v):
    v = _vector(v, model.dim)
    Y = _heights(Y, model.dim)
    logY = np.log(Y)
    first = 2 * float(np.sum(logY * np.abs(v) ** 2))
    second = _log_derivative_term(model, u, v)
    s = 1j * u
    if abs(u) < SMALL_U:
        # f(s) = Y^s A(-s) - Y^-s A(s) is odd, f(s)/s = 2 (log Y A(0) - A'(0)) + O(s^2)
        A0 = (model.at(0) @ v) * v.conj()
        dA0 = ((-1j * model.d_at(0.0)) @ v) * v.conj()
        third = complex(np.sum(2 * (logY * A0 - dA0)))
    else:
        Am = (model.at(-s) @ v) * v.conj()
        Ap = (model.at(s) @ v) * v.conj()
        third = complex(np.sum(Y**s * Am - Y ** (-s) * Ap) / s)
    return float((first + second + third).real)


def maass_selberg_norm1(model_phi: ScatteringModel, Y, u: float, omega) -> float:
    """``2 sum log(Y_j)|w_j|^2 + <Phi(s)^-1 Phi'(s) w, w>`` at ``s = iu``."""
    w = _vector(omega, model_phi.dim)
    Y = _heights(Y, model_phi.dim)
    first = 2 * float(np.sum(np.log(Y) * np.abs(w) ** 2))
    return float((first + _log_derivative_term(model_phi, u, w)).real)


# -- truncation limit ---------------------------------------------------------------

@dataclass(frozen=True)
class ScatteringLimit:
    value: float
    limit: float          # pi xi(0) tr Psi(0), the actual Y -> inf limit
    quarter_limit: float  # xi(0) tr Psi(0) / 4
    error: float


def scattering_limit(model: ScatteringModel, xi: TestFunction, Y: float,
                     tol: float = 1e-12, order: int = 16) -> ScatteringLimit:
    """``int xi(u) (Y^{2iu} tr Psi(-iu) - Y^{-2iu} tr Psi(iu)) / (2iu) du``.

    The integrand is continuous at 0; panels are no wider than
    ``pi / (4 log Y)`` so that ``Y^{2iu}`` is resolved. As ``Y -> inf`` the
    value tends to ``pi xi(0) tr Psi(0)`` for even ``xi``.
    """
    if not Y >= 1:
        raise AdmissionError("Y must be >= 1")
    U = xi.cutoff(tol / model.dim)
    L = math.log(Y)
    width = min(0.25, math.pi / (4 * L)) if L > 0 else 0.25
    n = int(math.ceil(U / width))
    edges = np.linspace(0.0, n * width, n + 1)
    edges = np.concatenate([-edges[:0:-1], edges])

    def tr(s_arr):
        flat = s_arr.ravel()
        out = np.array([model.trace_at(s) for s in flat])
        return out.reshape(s_arr.shape)

    def g(u):
        plus = tr(-1j * u)
        minus = tr(1j * u)
        return np.asarray(xi(u)) * (np.exp(2j * L * u) * plus - np.exp(-2j * L * u) * minus) / (2j * u)

    val, err = panel_integrate(g, edges, order)
    tr0 = model.trace_at(0).real
    xi0 = float(xi(0.0))
    return ScatteringLimit(float(np.real(val)), math.pi * xi0 * tr0, 0.25 * xi0 * tr0,
                           err + tol)


# -- winding numbers ----------------------------------------------------------------

def winding_integral(model: ScatteringModel, weight: Callable,
                     abs_tol: float = 1e-12, rel_tol: float = 1e-10) -> complex:
    """``-1/(2 pi) int weight(u) tr(Psi(iu)^-1 d/du Psi(iu)) du``.

    The trace is imaginary for unitary ``Psi``, so the result is returned as a
    complex number; real scattering data give a purely imaginary value.
    """
    def part(fn):
        return integrate(lambda u: fn(float(weight(u)) * model.log_derivative_trace(u)),
                         -np.inf, np.inf, abs_tol, rel_tol)

    re = part(lambda z: z.real)
    im = part(lambda z: z.imag)
    return complex(re.value, im.value) * (-1 / (2 * math.pi))


def spectral_winding_term(model: ScatteringModel, phi: Callable, w: RepWeights) -> complex:
    """``-1/(2pi) int sum_l d_l phi(l^2 - 4 + u^2 + lambda_V) tr(Psi_l^-1 dPsi_l/du) du``.

    ``model.blocks`` must map each weight ``l`` to its block.
    """
    if not model.blocks:
        raise AdmissionError("model carries no per-weight blocks")
    mult = weight_multiplicities(w)
    lam = casimir(w)
    total = 0j
    for l, block in model.blocks.items():
        d = mult[l]
        if d:
            total += d * winding_integral(block, lambda u, l=l: phi(l * l - 4 + u * u + lam))
    return total


def intertwiner_sup(model: ScatteringModel, eps: float, n: int = 201) -> float:
    if not eps > 0:
        raise AdmissionError("eps must be positive")
    grid = np.linspace(-eps, eps, n)
    return max(model.log_derivative_trace(u).real for u in grid)


def intertwiner_bound_check(model: ScatteringModel, eps: float, a_bound: float,
                            n: int = 201, atol: float = 1e-12) -> bool:
    """Whether ``Re tr(Psi^-1 dPsi/du) <= a_bound`` on a grid of ``[-eps, eps]``.

    ``atol`` absorbs rounding in the real part, which vanishes exactly for
    unitary models.
    """
    return intertwiner_sup(model, eps, n) <= a_bound + atol
