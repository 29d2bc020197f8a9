import math

import numpy as np
import pytest

from cusptorsion.bs_sequences import (NO_DATA, NOT_TRENDING, TRENDING, CuspedManifoldDescriptor,
                                      TowerDescriptor, bs_report, congruence_tower,
                                      cusp_uniformity, trend_verdict, truncation_schedule)
from cusptorsion.errors import AdmissionError
from cusptorsion.lattice2d import lattice

Z2 = lattice((1, 0), (0, 1))
LONG = lattice((1, 0), (0, 100))


def member(vol, cusps=(Z2,), counts=None):
    return CuspedManifoldDescriptor(vol, tuple(cusps), counts or {})


def test_descriptor_validation():
    with pytest.raises(AdmissionError):
        member(0.0)
    with pytest.raises(AdmissionError):
        member(1.0, counts={1.0: 5, 2.0: 3})
    with pytest.raises(AdmissionError):
        TowerDescriptor(())
    with pytest.raises(AdmissionError):
        TowerDescriptor((member(2.0), member(1.0)))


def test_constant_tower():
    t = TowerDescriptor((member(5.0, (Z2.scaled(2.0),)),) * 4)
    rep = bs_report(t)
    assert set(rep.verdicts.values()) == {NOT_TRENDING}


def test_synthetic_ratio_slopes():
    n = np.arange(1, 9)
    for k in (1, 2):
        verdict, slope = trend_verdict(1.0 / n**2, n.astype(float) ** k)
        assert verdict == TRENDING
        assert slope == pytest.approx(-2 / k, rel=1e-12)


def test_single_cusp_growing_volume():
    t = TowerDescriptor(tuple(member(float(n), (lattice((1, 0), (0.2, 3.0)),)) for n in range(1, 7)))
    rep = bs_report(t)
    assert rep.verdicts["square"] == TRENDING
    c = (0.2**2 + 3.0**2)
    assert [r["square"] for r in rep.rows] == pytest.approx([c / n for n in range(1, 7)], rel=1e-12)


def test_verdicts_invariant_under_volume_rescaling():
    base = congruence_tower(member(2.0), 6, "n4", "n2")
    scaled = TowerDescriptor(tuple(CuspedManifoldDescriptor(7.5 * m.volume, m.cusps) for m in base))
    a, b = bs_report(base), bs_report(scaled)
    assert a.verdicts == b.verdicts
    for k in a.slopes:
        assert a.slopes[k] == pytest.approx(b.slopes[k], rel=1e-9)


def test_geodesic_data():
    t = TowerDescriptor((member(1.0), member(10.0)))
    assert bs_report(t, [1.0]).verdicts["geodesics_R1"] == NO_DATA
    t = TowerDescriptor(tuple(member(float(v), counts={1.0: 3}) for v in (1, 10, 100)))
    rep = bs_report(t, [1.0])
    assert rep.verdicts["geodesics_R1"] == TRENDING
    with pytest.raises(AdmissionError):
        bs_report(TowerDescriptor((member(1.0),)))


def test_report_formats():
    rep = bs_report(congruence_tower(member(2.0), 3, "n4", "n2"))
    lines = rep.to_csv().splitlines()
    assert len(lines) == 4 and lines[0].startswith("member,volume")
    assert '"verdicts"' in rep.to_json()


def test_cusp_uniformity():
    t = TowerDescriptor((member(1.0), member(2.0)))
    assert cusp_uniformity(t, 1.0) == [True, True]
    assert cusp_uniformity(TowerDescriptor((member(1.0, (LONG,)),)), 10.0) == [False]
    base = member(3.0, (lattice((1, 0), (0.3, 2.2)),))
    tower = congruence_tower(base, 5, "n4", "n2")
    C = base.cusps[0].uniformity_ratio
    assert all(cusp_uniformity(tower, C * (1 + 1e-12)))
    with pytest.raises(AdmissionError):
        cusp_uniformity(t, 0)


def test_schedule():
    m = member(1000.0)
    Y = truncation_schedule(m, 10.0)
    assert Y.scale == pytest.approx(100 ** 0.1, rel=1e-15)
    assert Y.Y[0] == pytest.approx(100 ** 0.1, rel=1e-15)
    m = member(1.0, (Z2.scaled(3.0),))
    Y = truncation_schedule(m, 1.0)
    assert Y.scale == 1.0 and Y.Y == (3.0,)
    assert truncation_schedule(member(1.0, (Z2.scaled(0.5),)), 1.0).Y == (1.0,)
    assert len(truncation_schedule(member(1.0, ()))) == 0
    with pytest.raises(AdmissionError):
        truncation_schedule(m, 0.0)


def test_schedule_grows_along_tower():
    tower = congruence_tower(member(2.0, (Z2, lattice((1, 0), (0.4, 1.5)))), 8, "n4", "n2")
    scales = []
    for m in tower:
        Y = truncation_schedule(m)
        assert Y.Y == pytest.approx([max(1.0, c.alpha1 * Y.scale) for c in m.cusps], rel=1e-14)
        scales.append(Y.scale)
    assert all(a < b for a, b in zip(scales, scales[1:]))


def test_congruence_tower():
    base = member(2.0, (lattice((1, 0), (0.3, 2.2)),))
    t = congruence_tower(base, 4, "n4", "n2")
    for n, m in enumerate(t, start=1):
        assert m.volume == 2.0 * n**4 and m.n_cusps == n**2
        for c in m.cusps:
            assert c.alpha1 == pytest.approx(n * base.cusps[0].alpha1, rel=1e-15)
            assert c.alpha2 / c.alpha1 == pytest.approx(
                base.cusps[0].alpha2 / base.cusps[0].alpha1, rel=1e-14)
    assert list(congruence_tower(base, 1, "n4", "n2")) == [base]
    with pytest.raises(AdmissionError):
        congruence_tower(base, 4, lambda n: 5 - n, lambda n: 1)
