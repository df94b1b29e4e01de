import math

import numpy as np
import pytest
from scipy import integrate, special

from planar_symplectic.errors import AccuracyError, DomainError
from planar_symplectic.numerics import (GeneralizedPowerSeries, QuadratureSpec,
                                        complex_derivatives, gauss_legendre,
                                        gps_caputo, gps_eval, integrate_box,
                                        integrate_disk_polar, integrate_interval,
                                        integrate_plane)


def test_gauss_legendre_polynomial_exactness():
    x, w = gauss_legendre(10, 0.0, 2.0)
    assert np.sum(w * x ** 19) == pytest.approx(2.0 ** 20 / 20, rel=1e-14)


def test_integrate_interval_kinds():
    spec = QuadratureSpec(1e-13, 1e-13)
    assert integrate_interval(np.cos, ("finite", 0, 1), spec) == pytest.approx(math.sin(1), abs=1e-14)
    g = lambda u: np.exp(-u * u)
    assert integrate_interval(g, ("both",), spec) == pytest.approx(math.sqrt(math.pi), abs=1e-13)
    assert integrate_interval(g, ("left", 0.3), spec) == pytest.approx(
        math.sqrt(math.pi) / 2 * special.erfc(-0.3), abs=1e-13)
    # array-valued integrand
    v = integrate_interval(lambda u: np.stack([u, u * u], axis=1), ("finite", 0, 1), spec)
    assert np.allclose(v, [0.5, 1 / 3], atol=1e-14)


def test_integrate_interval_reports_failure():
    spec = QuadratureSpec(1e-12, 1e-12, max_depth=2)
    with pytest.raises(AccuracyError) as exc:
        integrate_interval(lambda u: np.sin(400 * u), ("finite", 0, 7), spec, order=4)
    assert exc.value.partial is not None


def test_plane_and_box_use_dA():
    # int e^{-|w|^2} d^2w / pi = 1
    spec = QuadratureSpec(1e-12, 1e-12, 8, 8.0)
    assert integrate_plane(lambda w: np.exp(-np.abs(w) ** 2), 0.0, spec) == pytest.approx(1, abs=1e-11)
    assert integrate_box(lambda w: np.ones(w.shape), 0, 1, 0, 2) == pytest.approx(2 / math.pi)
    assert integrate_disk_polar(lambda w: np.ones(w.shape), 0.3j, 2.0) == pytest.approx(4.0)


def test_polar_singular_mode_matches_cauchy_value():
    # int_{|w|<r} (1/(z-w)) dA(w) = conj(z) for |z| < r; at the centre it vanishes
    val = integrate_disk_polar(lambda w: np.ones(w.shape), 0.0, 1.0, singular=True)
    assert abs(val) < 1e-14


def test_gps_eval_and_caputo_monomials():
    s = GeneralizedPowerSeries(0.5, 1.0, np.array([1.0, 2.0, 0.0, -1.0]))
    z = 0.7 + 0.2j
    assert gps_eval(s, z) == pytest.approx(z ** 0.5 + 2 * z ** 1.5 - z ** 3.5)
    d = gps_caputo(s, 0.5)
    want = (special.gamma(1.5) / special.gamma(1.0) + 2 * special.gamma(2.5) / special.gamma(2) * z
            - special.gamma(4.5) / special.gamma(4) * z ** 3)
    assert gps_eval(d, z) == pytest.approx(want, rel=1e-14)


def test_caputo_constant_convention():
    c = GeneralizedPowerSeries(0.0, 1.0, np.array([1.0, 0.0]))
    z = 0.4 + 0.1j
    assert gps_eval(gps_caputo(c, 0.5), z) == 0
    assert gps_eval(gps_caputo(c, 0.5, "power_rule"), z) == pytest.approx(z ** -0.5 / special.gamma(0.5))
    # integer order: both conventions agree (1/Gamma at non-positive integers is 0)
    assert gps_eval(gps_caputo(c, 1.0, "power_rule"), z) == 0


def test_caputo_against_defining_integral():
    # D^nu f(x) = 1/Gamma(1-nu) int_0^x f'(t)(x-t)^{-nu} dt, nu = 0.3, f = x^{1.7}
    nu, b, x = 0.3, 1.7, 0.9
    val, _ = integrate.quad(lambda t: b * t ** (b - 1), 0, x, weight="alg", wvar=(0, -nu))
    want = val / special.gamma(1 - nu)
    s = GeneralizedPowerSeries(b, 1.0, np.array([1.0, 0.0]))
    assert gps_eval(gps_caputo(s, nu), x).real == pytest.approx(want, rel=1e-10)


def test_gps_domain():
    with pytest.raises(DomainError):
        GeneralizedPowerSeries(0, 1, np.array([1.0]))
    with pytest.raises(DomainError):
        gps_caputo(GeneralizedPowerSeries(-1.5, 1, np.array([1.0, 1.0])), 0.5)


def test_complex_derivatives():
    F = lambda z: np.abs(z) ** 2 + z ** 3
    z = 0.3 - 0.4j
    # d|z|^2/d zbar = z ; d dbar |z|^2 = 1
    assert complex_derivatives(F, z, "dbar") == pytest.approx(z, abs=1e-9)
    assert complex_derivatives(F, z, "d") == pytest.approx(np.conj(z) + 3 * z ** 2, abs=1e-9)
    assert complex_derivatives(F, z, "laplacian_quarter") == pytest.approx(1.0, abs=1e-7)
    with pytest.raises(DomainError):
        complex_derivatives(F, z, "dbar", h=0.5)
