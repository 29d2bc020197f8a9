import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cusptorsion.errors import AdmissionError
from cusptorsion.hyperbolic import (CuspGeometry, TruncationHeights, cusp_boundary_area,
                                    cusp_volume_above, default_log_grid, ell, ell_inverse,
                                    ell_reference, log_lower_bound_constant,
                                    parabolic_distance)
from cusptorsion.lattice2d import lattice

Z2 = lattice((1, 0), (0, 1))

# 4 asinh(1) and 4 asinh(1/2), mpmath at 30 digits
ELL_2 = 3.5254943480781721
ELL_1 = 1.9248473002384139
# infimum of ell(r)/log(1+r) on the default grid, recorded at first run
C_STAR = 2.0009997500416303


def test_ell_values():
    assert ell(2) == pytest.approx(ELL_2, rel=1e-15)
    assert ell(1) == pytest.approx(ELL_1, rel=1e-15)
    assert ell(0) == 0
    assert ell(2) == pytest.approx(2 * (math.log(1 + 2**-0.5) - math.log(1 - 2**-0.5)), rel=1e-14)


def test_ell_against_log_form():
    for r in (1e-3, 0.5, 2.0, 17.0, 300.0):
        assert ell(r) == pytest.approx(ell_reference(r), rel=1e-10)


def test_ell_small_and_large_r():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 40
    for r in (1e-8, 1e-4, 1e4, 1e8):
        ref = 4 * mp.asinh(mp.mpf(r) / 2)
        assert ell(r) == pytest.approx(float(ref), rel=1e-13)


def test_ell_monotone():
    g = np.linspace(0, 1e3, 10_000)
    assert np.all(np.diff(ell(g)) > 0)


def test_ell_inverse():
    r = np.geomspace(1e-6, 1e6, 50)
    assert np.allclose(ell_inverse(ell(r)), r, rtol=1e-12)


def test_ell_rejects_negative():
    with pytest.raises(AdmissionError):
        ell(-1.0)


def test_parabolic_examples():
    assert parabolic_distance(2, 1) == pytest.approx(ELL_2, rel=1e-14)
    assert parabolic_distance(0, 3.0) == 0
    assert parabolic_distance(4, 2) == pytest.approx(ell(2), rel=1e-14)
    with pytest.raises(AdmissionError):
        parabolic_distance(1, 0)
    with pytest.raises(AdmissionError):
        parabolic_distance(1, -2)


@given(st.floats(0, 1e6), st.floats(1e-3, 1e3))
def test_parabolic_is_ell_property(n, y):
    a, b = parabolic_distance(n, y), ell(n / y)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-300)


def test_log_lower_bound():
    c = log_lower_bound_constant()
    assert c == pytest.approx(C_STAR, rel=1e-12)
    g = default_log_grid()
    assert np.all(ell(g) >= c * np.log1p(g) * (1 - 1e-15))
    # the ratio tends to 4 at infinity
    assert ell(1e6) / math.log1p(1e6) == pytest.approx(4, abs=1e-3)
    assert log_lower_bound_constant([0.7]) > 0


def test_boundary_area_and_volume():
    c = CuspGeometry(Z2)
    assert cusp_boundary_area(c, 1) == 1
    assert cusp_volume_above(c, 1) == 0.5
    assert cusp_boundary_area(c, 1e8) < 1e-15
    with pytest.raises(AdmissionError):
        cusp_boundary_area(c, 0.5)
    n = 4
    c4 = CuspGeometry(Z2.scaled(n))
    assert cusp_boundary_area(c4, 3 * n) == pytest.approx(cusp_boundary_area(c, 3), rel=1e-15)


def test_volume_is_integral_of_area():
    from scipy.integrate import quad
    c = CuspGeometry(lattice((1.3, 0), (0.2, 0.9)))
    val, _ = quad(lambda y: c.lattice.covolume / y**3, 2.0, np.inf)
    assert cusp_volume_above(c, 2.0) == pytest.approx(val, rel=1e-12)


def test_cusp_geometry_normalisation():
    c = CuspGeometry(Z2, 2.0)
    assert c.effective_lattice.alpha1 == 2.0
    with pytest.raises(AdmissionError):
        CuspGeometry(Z2, 0.0)


def test_truncation_heights():
    t = TruncationHeights([1, 2.5])
    assert len(t) == 2 and list(t) == [1.0, 2.5]
    with pytest.raises(AdmissionError):
        TruncationHeights([0.9])
