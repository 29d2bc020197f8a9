import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cusptorsion.errors import AdmissionError, NumericalError
from cusptorsion.lattice2d import (LatticeBasis, ShellTable, count_points, error_bound_ratio,
                                   error_term, gauss_reduce, kappa, lattice, scale,
                                   GAUSS_CIRCLE_C0, KAPPA_VARIANTS)

from helpers import oracle_count, random_reduced, rng, sup_error_ratio

Z2 = lattice((1, 0), (0, 1))

# Kronecker limit formula for the square lattice, evaluated with mpmath at 50 digits:
# 2 pi (gamma - log 2 - 2 log|eta(i)|)
KAPPA_Z2 = 2.5849817595792532


def check_reduced(lat, vol0):
    assert lat.alpha1 <= lat.alpha2 * (1 + 1e-15)
    dot = lat.b1[0] * lat.b2[0] + lat.b1[1] * lat.b2[1]
    assert abs(dot) <= 0.5 * lat.alpha1**2 * (1 + 1e-12)
    assert lat.covolume <= lat.alpha1 * lat.alpha2 * (1 + 1e-12)
    assert lat.alpha1 * lat.alpha2 <= 2 / math.sqrt(3) * lat.covolume * (1 + 1e-12)
    assert lat.covolume == pytest.approx(vol0, rel=1e-12)


def test_reduce_examples():
    assert (Z2.alpha1, Z2.alpha2, Z2.covolume) == (1.0, 1.0, 1.0)
    lat = lattice((1, 0), (0.5, 0.5))
    assert lat.alpha1 == pytest.approx(math.sqrt(0.5), rel=1e-15)
    assert lat.alpha2 == pytest.approx(math.sqrt(0.5), rel=1e-15)
    assert lat.covolume == pytest.approx(0.5, rel=1e-15)
    lat = lattice((100, 0), (99, 1))
    assert lat.alpha1 == pytest.approx(math.sqrt(2), rel=1e-15)
    assert lat.covolume == pytest.approx(100, rel=1e-12)


def test_reduce_matches_bruteforce_shortest_vector():
    g = rng(1)
    for _ in range(50):
        b1, b2 = g.uniform(-10, 10, 2), g.uniform(-10, 10, 2)
        lat = gauss_reduce(LatticeBasis(b1, b2))
        k = np.arange(-30, 31)
        m, n = np.meshgrid(k, k)
        v = m[..., None] * b1 + n[..., None] * b2
        q = np.hypot(v[..., 0], v[..., 1])
        assert lat.alpha1 == pytest.approx(q[q > 1e-12].min(), rel=1e-12)


def test_reduce_preserves_lattice():
    lat = lattice((3.1, 0.2), (7.5, 1.9))
    U = np.array(lat.transform)
    assert abs(round(np.linalg.det(U))) == 1
    B = np.array([(3.1, 0.2), (7.5, 1.9)])
    assert np.allclose(U @ B, np.array([lat.b1, lat.b2]), atol=1e-12)


def test_degenerate_basis():
    with pytest.raises(AdmissionError, match="degenerate lattice"):
        lattice((1, 2), (2, 4))


@given(st.lists(st.floats(-10, 10), min_size=4, max_size=4))
def test_reduction_invariants_property(xs):
    b1, b2 = xs[:2], xs[2:]
    det = abs(b1[0] * b2[1] - b1[1] * b2[0])
    try:
        lat = lattice(b1, b2)
    except AdmissionError:
        # degenerate, or too small for double precision
        assert det <= 1e-14 * math.hypot(*b1) * math.hypot(*b2) or det < 1e-150 \
            or min(math.hypot(*b1), math.hypot(*b2)) < 1e-150
        return
    check_reduced(lat, det)


def test_subnormal_basis_rejected():
    with pytest.raises(AdmissionError, match="floating-point range"):
        lattice((0.0, 1.0), (4e-261, 0.0))


def test_count_examples():
    assert count_points(Z2, 2) == 13
    assert count_points(Z2, 0) == 1
    assert count_points(Z2, 0.99) == 1
    assert count_points(lattice((0.3, 0.1), (0.2, 2.0)), 0) == 1


def test_count_matches_oracle():
    g = rng(2)
    for _ in range(30):
        lat = random_reduced(g)
        for r in (lat.alpha1, 2 * lat.alpha2, 10 * lat.alpha2):
            assert count_points(lat, r) == oracle_count(lat, r)


def test_counting_budget():
    with pytest.raises(NumericalError, match="counting budget exceeded"):
        count_points(Z2, 1e4, budget=10**6)


def test_error_term_examples():
    assert error_term(Z2, 2) == pytest.approx(abs(12 - 4 * math.pi), rel=1e-14)
    assert error_term(Z2, 0) == 0
    assert error_term(Z2, 0.5, signed=True) == pytest.approx(-math.pi / 4, rel=1e-14)
    assert error_term(Z2, 0.5) == pytest.approx(math.pi / 4, rel=1e-14)


def test_error_bound_ratio_examples():
    assert error_bound_ratio(Z2, 2) == pytest.approx(abs(12 - 4 * math.pi) / 3, rel=1e-14)
    e10 = abs(oracle_count(Z2, 10) - 1 - 100 * math.pi)
    assert error_bound_ratio(Z2, 10) == pytest.approx(e10 / 11, rel=1e-14)
    assert error_bound_ratio(scale(Z2, 3), 6) == pytest.approx(error_bound_ratio(Z2, 2), rel=1e-14)
    with pytest.raises(AdmissionError):
        error_bound_ratio(Z2, 0)


def test_gauss_circle_constant_small_sweep():
    g = rng(4)
    worst = max(sup_error_ratio(lat, 100 * lat.alpha1) for lat in
                (random_reduced(g) for _ in range(100)))
    assert worst <= GAUSS_CIRCLE_C0


def test_shell_table_head_integral_matches_quadrature():
    from scipy.integrate import quad
    lat = lattice((1.0, 0.0), (0.3, 1.7))
    t = ShellTable(lat, 12)
    f = lambda x: float(t.error(x)) / x**3
    pts = [p for p in np.unique(t.norms) if p < 7]
    val, _ = quad(f, lat.alpha1, 7, points=pts, limit=500, epsabs=1e-13)
    assert t.head_integral(7.0) == pytest.approx(val, abs=1e-11)


def test_kappa_z2_matches_kronecker():
    assert kappa(Z2).kappa == pytest.approx(KAPPA_Z2, abs=1e-13)


def test_kappa_matches_epstein_oracle():
    # constant term of the Epstein zeta function of the basis (1, tau), via mpmath:
    # kappa = (2 pi / v) (gamma - log 2 - log v - 2 log|eta(tau)|)
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 30
    for tau in (complex(0.3, 1.7), complex(-0.5, math.sqrt(3) / 2), complex(0.1, 4.0)):
        v = tau.imag
        q = mp.exp(2j * mp.pi * tau)
        eta = mp.exp(1j * mp.pi * tau / 12) * mp.qp(q)
        ref = 2 * mp.pi / v * (mp.euler - mp.log(2) - mp.log(v) - 2 * mp.log(abs(eta)))
        lat = lattice((1, 0), (tau.real, tau.imag))
        assert kappa(lat).kappa == pytest.approx(float(ref), abs=1e-12)


def test_kappa_direct_method_agrees_within_bound():
    cc = kappa(Z2, quad_tol=0.1, method="direct")
    assert abs(cc.kappa - KAPPA_Z2) <= cc.abs_error
    with pytest.raises(NumericalError):
        kappa(Z2, quad_tol=1e-10, method="direct", budget=10**6)


def test_kappa_scaling_rule():
    for c in (2.0, 3.0, 0.5):
        lhs = kappa(Z2.scaled(c)).kappa
        rhs = KAPPA_Z2 / c**2 - 2 * math.pi * math.log(c) / c**2
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_kappa_rotation_invariance():
    lat = lattice((1.2, 0.1), (0.4, 2.3))
    k0 = kappa(lat).kappa
    for th in (0.3, 1.1, 2.9):
        assert kappa(lat.rotated(th)).kappa == pytest.approx(k0, abs=1e-10)


def test_kappa_variant_differences():
    vals = {v: kappa(Z2, variant=v) for v in KAPPA_VARIANTS}
    I = vals["derived"].error_integral
    assert vals["derived"].kappa - vals["statement"].kappa == pytest.approx(2 * math.pi)
    assert vals["statement"].kappa - vals["proof"].kappa == pytest.approx(I)
    assert vals["conv1"].kappa - vals["proof"].kappa == pytest.approx(2 * math.pi)
    with pytest.raises(AdmissionError):
        kappa(Z2, variant="other")
    with pytest.raises(AdmissionError):
        kappa(Z2, quad_tol=0)


def test_scale():
    lat = scale(Z2, 3)
    assert (lat.alpha1, lat.covolume) == (3.0, 9.0)
    base = lattice((1.0, 0.2), (0.1, 3.0))
    for n in range(1, 11):
        s = scale(base, n)
        assert s.alpha2 / s.alpha1 == pytest.approx(base.alpha2 / base.alpha1, rel=1e-15)
        assert s.uniformity_ratio == pytest.approx(base.uniformity_ratio, rel=1e-14)
    with pytest.raises(AdmissionError):
        scale(Z2, 0)


def test_descriptor_roundtrip():
    lat = lattice((1.0, 0.2), (0.1, 3.0))
    d = lat.to_descriptor()
    assert lattice(d["b1"], d["b2"]).covolume == pytest.approx(lat.covolume, rel=1e-14)
