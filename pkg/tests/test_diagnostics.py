import json
import math

import numpy as np
import pytest

from planar_symplectic.diagnostics import (ResidualReport, berezin, convergence_study,
                                           crossover_ratio, fractional_cd_terms,
                                           gaussian_window, identity_checks,
                                           mass_one_residual, ode_residual,
                                           ward_residual)
from planar_symplectic.errors import DomainError
from planar_symplectic.finite_kernels import (FinitePreKernel, RadialPotential,
                                              RescaledPreKernel, correlation, density,
                                              micro_scale, skew_orthogonal_basis)
from planar_symplectic.limit_kernels import EdgeFamilyKernel, bulk_density


def test_report_serialisation():
    rep = ResidualReport("x", [0.1 + 0.2j, 1j], [1e-9, 3e-9], 1e-8)
    d = json.loads(rep.to_json())
    assert d["passed"] and d["max_residual"] == 3e-9
    assert d["points"][0] == {"re": 0.1, "im": 0.2, "residual": 1e-9}
    assert not ResidualReport("x", [0j], [1.0], 0.5).passed
    with pytest.raises(DomainError):
        ResidualReport("x", [0j], [], 1.0)


def test_berezin_diagonal_and_definition():
    k = EdgeFamilyKernel()
    z, w = 0.3 + 0.4j, -0.2 + 0.9j
    assert berezin(k, z, z) == pytest.approx(bulk_density(z), rel=1e-12)
    Rz, Rw = density(k, z), density(k, w)
    want = (Rz * Rw - correlation(k, [z, w])) / Rz
    assert berezin(k, z, w) == pytest.approx(want, rel=1e-10, abs=1e-14)
    with pytest.raises(DomainError):
        berezin(k, 0.5, 0.2j)


def test_mass_one_bulk_and_finite():
    assert mass_one_residual(EdgeFamilyKernel(), 0.3 + 0.4j) < 1e-6
    pot = RadialPotential.gaussian(3)
    k = RescaledPreKernel(FinitePreKernel(skew_orthogonal_basis(pot), True), micro_scale(pot))
    assert mass_one_residual(k, 0.4j) < 1e-6


def test_ward_bulk():
    assert ward_residual(EdgeFamilyKernel(), 0.5j) < 1e-3


def test_ode_identities():
    assert ode_residual(("finite_gaussian", 12), 0.3 + 0.2j, -0.4 + 0.5j) < 1e-10
    assert ode_residual("edge_limit", 0.3 - 0.2j, 0.1 + 0.4j) < 1e-8
    with pytest.raises(DomainError):
        ode_residual("nope", 0, 0)


def test_fractional_cd_integer_order_is_ordinary_derivative():
    lhs, rhs = fractional_cd_terms(1.0, 0.0, 0.5 + 0.1j, 0.3 - 0.2j)
    assert abs(lhs - rhs) < 1e-12


def test_identity_checks():
    assert identity_checks("comb_identity", m=4, c=0.5).passed
    assert identity_checks("wronskian_const", m=3).passed
    assert identity_checks("q_asymptotic").passed
    with pytest.raises(DomainError):
        identity_checks("comb_identity", m=9, c=0)


def test_crossover_ratio_improves_with_t():
    r2, r5 = crossover_ratio(2.0, 0.0), crossover_ratio(5.0, 0.0)
    assert abs(r5 - 1) < abs(r2 - 1) < 0.1


def test_convergence_study_on_small_grid():
    tab = convergence_study(RadialPotential.gaussian, gaussian_window(0.0), [5, 10, 20],
                            (-2, 2, -2, 2, 21, 21), EdgeFamilyKernel(), keep_densities=True)
    assert tab.strictly_decreasing()
    assert set(tab.finite_densities) == {5, 10, 20}
    with pytest.raises(DomainError):
        convergence_study(RadialPotential.gaussian, gaussian_window(0.0), [10, 5],
                          (-1, 1, -1, 1, 3, 3), EdgeFamilyKernel())
