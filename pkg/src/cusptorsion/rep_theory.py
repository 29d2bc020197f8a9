"""Closed-form constants of the representations V(n1, n2) of SL2(C).

``V(n1, n2) = Sym^n1(C^2) (x) Sym^n2(conj C^2)``. Integer-valued quantities are
computed exactly; the L2-torsion coefficient is converted to floating point
only at the final division by ``48 pi``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from .errors import AdmissionError


@dataclass(frozen=True)
class RepWeights:
    n1: int
    n2: int

    def __post_init__(self):
        for n in (self.n1, self.n2):
            if int(n) != n or n < 0:
                raise AdmissionError("n1, n2 must be nonnegative integers")
        object.__setattr__(self, "n1", int(self.n1))
        object.__setattr__(self, "n2", int(self.n2))

    @property
    def strongly_acyclic(self) -> bool:
        return self.n1 != self.n2


@dataclass(frozen=True)
class WeightSpectrum:
    multiplicities: dict
    parity: int

    def __getitem__(self, m):
        return self.multiplicities.get(m, 0)

    @property
    def weights(self):
        return sorted(self.multiplicities)


def dimension(w: RepWeights) -> int:
    return (w.n1 + 1) * (w.n2 + 1)


def casimir(w: RepWeights) -> int:
    """Casimir eigenvalue ``(n1+n2+2)^2 - 4 + (n1-n2)^2``."""
    return (w.n1 + w.n2 + 2) ** 2 - 4 + (w.n1 - w.n2) ** 2


def weight_multiplicities(w: RepWeights) -> WeightSpectrum:
    """Multiplicities ``d_m`` of the weights ``m = l + k`` of the circle group.

    ``l`` runs over ``-n1, -n1+2, ..., n1`` and ``k`` over ``-n2, ..., n2``.
    """
    counts = Counter(l + k for l in range(-w.n1, w.n1 + 1, 2)
                     for k in range(-w.n2, w.n2 + 1, 2))
    return WeightSpectrum(dict(sorted(counts.items())), (w.n1 - w.n2) % 2)


def form_eigenvalue(w: RepWeights, m: int, eps: int, u: float = 0.0) -> float:
    """Laplace eigenvalue of an Eisenstein section/form at ``s = i u``.

    ``u^2 - (m + eps)^2 + (n1+n2+2)^2 + (n1-n2)^2``; ``eps = 0`` gives the
    value for sections, ``eps = +-2`` the 1-form components.
    """
    if eps not in (-2, 0, 2):
        raise AdmissionError("eps must be one of -2, 0, 2")
    if weight_multiplicities(w)[m] == 0:
        raise AdmissionError(f"{m} is not a weight of V({w.n1},{w.n2})")
    base = -(m + eps) ** 2 + (w.n1 + w.n2 + 2) ** 2 + (w.n1 - w.n2) ** 2
    return u * u + base


def spectral_gap(w: RepWeights, p: int) -> int:
    """Lower bound of the continuous spectrum in degree ``p`` at ``u = 0``.

    Degrees 2 and 3 reduce to 1 and 0 by Hodge duality. Raises unless
    ``n1 != n2``.
    """
    if p not in (0, 1, 2, 3):
        raise AdmissionError("degree must be 0, 1, 2 or 3")
    if not w.strongly_acyclic:
        raise AdmissionError("not strongly acyclic (n1 == n2)")
    epsilons = (0,) if p in (0, 3) else (-2, 0, 2)
    return min(int(form_eigenvalue(w, m, e)) for m in weight_multiplicities(w).weights
               for e in epsilons)


def l2_torsion_numerator(w: RepWeights) -> int:
    a = w.n1 + w.n2 + 2
    b = abs(w.n1 - w.n2)
    return a**3 - b**3 + 3 * b * a * (a - b)


def l2_torsion_coefficient(w: RepWeights) -> float:
    """``t2(V) = -(a^3 - b^3 + 3 b a (a - b)) / (48 pi)``, ``a = n1+n2+2``, ``b = |n1-n2|``."""
    frac = Fraction(-l2_torsion_numerator(w), 48)
    return float(frac) / math.pi
