import math

import numpy as np
import pytest
from scipy.special import erf, erfc

from cusptorsion.errors import AdmissionError
from cusptorsion.rep_theory import RepWeights
from cusptorsion.spectral_side import (ScatteringModel, TestFunction, constant_model,
                                       direct_sum, exponential_model, gaussian_test_function,
                                       intertwiner_bound_check, intertwiner_sup,
                                       maass_selberg_norm0, maass_selberg_norm0_limit,
                                       maass_selberg_norm1, mobius_model,
                                       model_from_descriptor, scattering_limit,
                                       spectral_winding_term, winding_integral)

from helpers import rng

ONE = constant_model([[1]])
MOB = mobius_model(1.0)
SWAP = constant_model([[0, 1], [1, 0]])
XI = gaussian_test_function()
GAUSS = lambda u: math.exp(-u * u)


def test_admission():
    with pytest.raises(AdmissionError, match="functional equation"):
        constant_model([[2]])
    with pytest.raises(AdmissionError):
        constant_model([[1j]])
    with pytest.raises(AdmissionError, match="dpsi"):
        ScatteringModel(1, lambda s: (1 - s) / (1 + s), lambda u: 0.0)
    with pytest.raises(AdmissionError, match="unitary"):
        ScatteringModel(1, lambda s: np.exp(1j * s), lambda u: -np.exp(-u))


def test_descriptors():
    assert model_from_descriptor({"type": "mobius_scalar", "pole": 1}).dim == 1
    blk = model_from_descriptor({"type": "block", "blocks": {"2": {"type": "mobius_scalar"},
                                                             "0": {"type": "constant", "matrix": [[1]]}}})
    assert blk.dim == 2 and list(blk.blocks) == [0, 2]
    with pytest.raises(AdmissionError):
        model_from_descriptor({"type": "eisenstein"})


def test_ms0_examples():
    assert maass_selberg_norm0(ONE, [math.e], math.pi / 2, [1]) == pytest.approx(2 + 4 / math.pi, rel=1e-14)
    assert maass_selberg_norm0(ONE, [math.e], 1e-6, [1]) == pytest.approx(4.0, abs=1e-6)
    assert maass_selberg_norm0(ONE, [math.e], 0.3, [0]) == 0
    with pytest.raises(AdmissionError, match="limit"):
        maass_selberg_norm0(ONE, [math.e], 0.0, [1])
    assert maass_selberg_norm0_limit(ONE, [math.e], [1]) == pytest.approx(4.0, rel=1e-15)


def test_ms0_mobius_closed_form():
    # at Y = 1 the norm is 2p/(p^2+u^2)
    for u in (0.05, 0.7, 3.0):
        assert maass_selberg_norm0(MOB, [1.0], u, [1]) == pytest.approx(2 / (1 + u * u), rel=1e-12)


def test_ms0_series_matches_direct():
    for m in (ONE, MOB, SWAP):
        v = np.ones(m.dim) / math.sqrt(m.dim)
        near = maass_selberg_norm0(m, [2.0], 0.99e-4, v)
        far = maass_selberg_norm0(m, [2.0], 1.01e-4, v)
        assert near == pytest.approx(far, abs=1e-7)


def test_ms0_nonnegative_random():
    g = rng(21)
    models = [ONE, MOB, mobius_model(2.5), SWAP, direct_sum([MOB, mobius_model(0.5)])]
    worst = math.inf
    for _ in range(1000):
        m = models[g.integers(len(models))]
        Y = g.uniform(1, 50, m.dim)
        u = g.uniform(-10, 10)
        v = g.normal(size=m.dim) + 1j * g.normal(size=m.dim)
        worst = min(worst, maass_selberg_norm0(m, Y, u, v))
    assert worst >= -1e-9


def test_ms1():
    assert maass_selberg_norm1(SWAP, [math.e**2], 0.5, [1, 0]) == pytest.approx(4.0)
    assert maass_selberg_norm1(SWAP, [math.e**2], 0.5, [0, 0]) == 0
    two = direct_sum([ONE, ONE])
    assert maass_selberg_norm1(two, [3.0], 0.4, [1, 1]) == pytest.approx(
        2 * maass_selberg_norm1(ONE, [3.0], 0.4, [1]))


def test_heights_layout():
    with pytest.raises(AdmissionError):
        maass_selberg_norm0(direct_sum([ONE, ONE, ONE]), [1, 2], 0.3, [1, 1, 1])


def test_scattering_limit_identity_model():
    for Y in (2.0, 10.0, 100.0):
        r = scattering_limit(ONE, XI, Y)
        assert r.value == pytest.approx(math.pi * erf(math.log(Y)), abs=1e-10)
    r = scattering_limit(ONE, XI, 1e4)
    assert r.limit == pytest.approx(math.pi)
    assert r.quarter_limit == 0.25


def test_scattering_limit_converges_to_pi():
    for m in (ONE, MOB):
        devs = [abs(scattering_limit(m, XI, Y).value - math.pi) for Y in (1e2, 1e3, 1e4)]
        assert devs[-1] < 1e-9
        assert devs[1] <= devs[0] + 1e-12 and devs[2] <= devs[1] + 1e-12


def test_scattering_limit_linearity_and_zero():
    xi0 = TestFunction(lambda u: np.asarray(u) ** 2 * np.exp(-np.asarray(u) ** 2), 1.0, 1.5)
    r = scattering_limit(ONE, xi0, 1e4)
    assert r.limit == 0 and abs(r.value) < 1e-6
    doubled = scattering_limit(constant_model(np.eye(2)), XI, 100.0)
    single = scattering_limit(ONE, XI, 100.0)
    assert doubled.limit == 2 * single.limit
    assert doubled.value == pytest.approx(2 * single.value, rel=1e-12)


def test_winding():
    assert winding_integral(ONE, GAUSS) == 0
    c = 0.7
    w = winding_integral(exponential_model(c), GAUSS)
    assert w.real == pytest.approx(0, abs=1e-14)
    assert w.imag == pytest.approx(c * math.sqrt(math.pi) / (2 * math.pi), rel=1e-10)


def test_winding_mobius_oracle():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 30
    # -1/(2 pi) int e^{-u^2} (-2i/(1+u^2)) du
    ref = mp.quad(lambda u: mp.exp(-u * u) / (1 + u * u), [-mp.inf, 0, mp.inf]) / mp.pi
    w = winding_integral(MOB, GAUSS)
    assert w.imag == pytest.approx(float(ref), abs=1e-8)
    assert w.imag == pytest.approx(math.e * erfc(1), abs=1e-12)
    assert w.real == pytest.approx(0, abs=1e-14)


def test_winding_additive():
    parts = [MOB, mobius_model(2.0), exponential_model(0.3)]
    total = winding_integral(direct_sum(parts), GAUSS)
    assert total == pytest.approx(sum(winding_integral(p, GAUSS) for p in parts), abs=1e-10)


def test_spectral_winding_term():
    blk = direct_sum([MOB, mobius_model(2.0)], keys=[0, 2])
    phi = lambda x: math.exp(-x / 20)
    got = spectral_winding_term(blk, phi, RepWeights(2, 0))
    lam = 16
    ref = sum(winding_integral(m, lambda u, l=l: phi(l * l - 4 + u * u + lam))
              for l, m in ((0, MOB), (2, mobius_model(2.0))))
    assert got == pytest.approx(ref, abs=1e-12)
    with pytest.raises(AdmissionError):
        spectral_winding_term(MOB, phi, RepWeights(2, 0))


def test_intertwiner_check():
    assert intertwiner_bound_check(ONE, 0.1, 0.0)
    assert not intertwiner_bound_check(ONE, 0.1, -0.5)
    assert abs(intertwiner_sup(MOB, 0.1)) < 1e-12
    assert intertwiner_bound_check(MOB, 0.1, 1.0)
    with pytest.raises(AdmissionError):
        intertwiner_sup(MOB, 0.0)
