"""Finite-sequence diagnostics for Benjamini-Schramm convergence of cusped manifolds.

Asymptotic conditions of the form ``X_n = o(vol M_n)`` cannot be decided
from finitely many members. They are replaced by a trend verdict on the ratio
sequence ``X_n / vol M_n``: the least-squares slope of ``log |ratio|`` against
``log vol`` must be at most ``-slope_threshold`` and the last ratio must be
below the first. Raw ratios are always reported alongside the verdicts.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import AdmissionError
from .hyperbolic import CuspGeometry, TruncationHeights
from .lattice2d import ReducedLattice, gauss_reduce, LatticeBasis, scale

DEFAULT_SLOPE_THRESHOLD = 0.1
TRENDING, NOT_TRENDING, NO_DATA = "trending-to-zero", "not trending", "no data"


@dataclass(frozen=True)
class CuspedManifoldDescriptor:
    volume: float
    cusps: tuple = ()
    geodesic_counts: Mapping = field(default_factory=dict)
    height_normalization: float = 1.0

    def __post_init__(self):
        if not self.volume > 0:
            raise AdmissionError("volume must be positive")
        cusps = tuple(c.lattice if isinstance(c, CuspGeometry) else c for c in self.cusps)
        if not all(isinstance(c, ReducedLattice) for c in cusps):
            raise AdmissionError("cusps must be reduced lattices")
        counts = {float(R): int(n) for R, n in dict(self.geodesic_counts).items()}
        radii = sorted(counts)
        if any(counts[a] > counts[b] for a, b in zip(radii, radii[1:])):
            raise AdmissionError("geodesic counts must be nondecreasing in R")
        object.__setattr__(self, "cusps", cusps)
        object.__setattr__(self, "geodesic_counts", dict(sorted(counts.items())))

    @property
    def n_cusps(self) -> int:
        return len(self.cusps)

    def ratio_sum(self, power: int = 1) -> float:
        return float(sum((c.alpha2 / c.alpha1) ** power for c in self.cusps))

    def log_alpha1_sum(self) -> float:
        return float(sum(math.log(c.alpha1) for c in self.cusps))

    @classmethod
    def from_dict(cls, d: Mapping) -> "CuspedManifoldDescriptor":
        from .lattice2d import lattice
        try:
            cusps = tuple(lattice(c["b1"], c["b2"]) for c in d.get("cusps", []))
            return cls(float(d["volume"]), cusps, d.get("geodesic_counts", {}))
        except KeyError as exc:
            raise AdmissionError(f"missing field {exc.args[0]!r}") from exc

    def to_dict(self) -> dict:
        return {"volume": self.volume,
                "cusps": [c.to_descriptor() for c in self.cusps],
                "geodesic_counts": {repr(R): n for R, n in self.geodesic_counts.items()}}


@dataclass(frozen=True)
class TowerDescriptor:
    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise AdmissionError("a tower needs at least one member")
        vols = [m.volume for m in members]
        if any(a > b for a, b in zip(vols, vols[1:])):
            raise AdmissionError("tower volumes must be nondecreasing")
        object.__setattr__(self, "members", members)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def trend_verdict(ratios, volumes, slope_threshold=DEFAULT_SLOPE_THRESHOLD):
    """``(verdict, slope)`` for a ratio sequence against volume.

    Zero ratios are excluded from the regression; an all-zero sequence is
    trending. Constant volumes give no slope and are reported as not trending.
    """
    r = np.abs(np.asarray(ratios, dtype=float))
    v = np.asarray(volumes, dtype=float)
    nz = r > 0
    if not nz.any():
        return TRENDING, float("-inf")
    if nz.sum() < 2 or np.ptp(np.log(v[nz])) == 0:
        return NOT_TRENDING, float("nan")
    slope = float(np.polyfit(np.log(v[nz]), np.log(r[nz]), 1)[0])
    first = r[nz][0]
    ok = slope <= -slope_threshold and r[-1] < first
    return (TRENDING if ok else NOT_TRENDING), slope


CONDITIONS = ("sumcusp", "square", "cusps", "log_alpha1")


@dataclass
class BSReport:
    rows: list
    verdicts: dict
    slopes: dict

    def to_csv(self, digits: int = 12) -> str:
        buf = io.StringIO()
        cols = list(self.rows[0].keys()) if self.rows else []
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for row in self.rows:
            w.writerow([_fmt(row[c], digits) for c in cols])
        return buf.getvalue()

    def to_json(self, digits: int = 17) -> str:
        return json.dumps({"rows": self.rows, "verdicts": self.verdicts,
                           "slopes": self.slopes}, default=_json_default, indent=1)


def _fmt(x, digits):
    if isinstance(x, float):
        return "" if math.isnan(x) else format(x, f".{digits}g")
    return str(x)


def _json_default(o):
    if isinstance(o, np.floating):
        return float(o)
    raise TypeError(type(o).__name__)


def bs_report(t: TowerDescriptor, R_list: Sequence[float] = (),
              slope_threshold: float = DEFAULT_SLOPE_THRESHOLD) -> BSReport:
    if len(t) < 2:
        raise AdmissionError("a BS report needs at least two members")
    rows = []
    for i, m in enumerate(t):
        row = {"member": i, "volume": m.volume, "cusps": m.n_cusps,
               "sumcusp": m.ratio_sum(1) / m.volume,
               "square": m.ratio_sum(2) / m.volume,
               "cusps_ratio": m.n_cusps / m.volume,
               "log_alpha1": m.log_alpha1_sum() / m.volume}
        for R in R_list:
            n = m.geodesic_counts.get(float(R))
            row[f"geodesics_R{R:g}"] = float("nan") if n is None else n / m.volume
        rows.append(row)
    vols = [r["volume"] for r in rows]
    verdicts, slopes = {}, {}
    keys = {"sumcusp": "sumcusp", "square": "square", "cusps": "cusps_ratio",
            "log_alpha1": "log_alpha1"}
    keys.update({f"geodesics_R{R:g}": f"geodesics_R{R:g}" for R in R_list})
    for name, col in keys.items():
        vals = [r[col] for r in rows]
        if any(isinstance(x, float) and math.isnan(x) for x in vals):
            verdicts[name], slopes[name] = NO_DATA, None
            continue
        verdicts[name], slopes[name] = trend_verdict(vals, vols, slope_threshold)
    return BSReport(rows, verdicts, slopes)


def cusp_uniformity(t: TowerDescriptor, C: float) -> list:
    """Per member: whether every cusp satisfies ``vol(L) <= C alpha1^2``."""
    if not C > 0:
        raise AdmissionError("C must be positive")
    return [all(c.covolume <= C * c.alpha1**2 for c in m.cusps) for m in t]


def schedule_scale(volume: float, square_sum: float) -> float:
    return (volume / square_sum) ** 0.1


def truncation_schedule(m: CuspedManifoldDescriptor,
                        square_sum: float | None = None) -> TruncationHeights:
    """``Y_j = max(1, alpha1_j a)`` with ``a = (vol / sum (alpha2/alpha1)^2)^(1/10)``."""
    if not m.cusps:
        return TruncationHeights((), None)
    if square_sum is None:
        square_sum = m.ratio_sum(2)
    if not square_sum > 0:
        raise AdmissionError("square_sum must be positive")
    a = schedule_scale(m.volume, square_sum)
    return TruncationHeights(tuple(max(1.0, c.alpha1 * a) for c in m.cusps), a)


def _power(k):
    def model(n):
        return n**k
    model.__name__ = f"n^{k}"
    return model


PRESETS = {"n2": _power(2), "n4": _power(4)}


def congruence_tower(base: CuspedManifoldDescriptor, levels, index_model: Callable,
                     cusp_model: Callable) -> TowerDescriptor:
    """Members ``n``: each base cusp ``L`` becomes ``cusp_model(n)`` copies of
    ``nL``; the volume is ``base.volume * index_model(n)``."""
    levels = list(range(1, levels + 1)) if isinstance(levels, int) else list(levels)
    if isinstance(index_model, str):
        index_model = PRESETS[index_model]
    if isinstance(cusp_model, str):
        cusp_model = PRESETS[cusp_model]
    idx = [index_model(n) for n in levels]
    if any(a > b for a, b in zip(idx, idx[1:])):
        raise AdmissionError("index_model must be nondecreasing")
    members = []
    for n, k in zip(levels, idx):
        if n == 1 and k == 1 and cusp_model(1) == 1:
            members.append(base)
            continue
        cusps = tuple(scale(c, n) for c in base.cusps for _ in range(cusp_model(n)))
        members.append(CuspedManifoldDescriptor(base.volume * k, cusps))
    return TowerDescriptor(tuple(members))
