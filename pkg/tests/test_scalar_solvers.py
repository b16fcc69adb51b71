import math

import numpy as np
import pytest
from scipy import integrate, optimize

from kottler.errors import BelowDeSitterError, DomainError, QuadratureError, SolverError
from kottler.scalar_solvers import (
    ModelParams, ToleranceConfig, alpha_by_bisection, alpha_roots, bisect, df_m, f_m, f_m_near_root,
    horizon_radii, m_max, photon_radius, singular_integral, solve_alpha, substitution_integral,
    surface_gravity_inner, surface_gravity_outer, surface_gravity_routes, u_max, virtual_mass,
)

from oracles import SDS

MMAX3 = m_max(3)
P = ModelParams(3, 0.1)


def test_m_max_closed_form():
    assert m_max(3) == pytest.approx(1 / math.sqrt(27), rel=1e-15)
    assert m_max(4) == pytest.approx(0.125, rel=1e-15)


def test_model_params_rejects_bad_input():
    with pytest.raises(DomainError):
        ModelParams(2, 0.1)
    with pytest.raises(DomainError):
        ModelParams(3, -0.01)
    with pytest.raises(DomainError):
        ModelParams(3, MMAX3 * 1.01)


def test_mass_near_m_max_snaps_to_degenerate():
    assert ModelParams(3, MMAX3 * (1 - 1e-12)).is_degenerate
    assert not ModelParams(3, MMAX3 * (1 - 1e-6)).is_degenerate


def test_horizon_radii_examples():
    assert horizon_radii(ModelParams(3, 0.0)) == (0.0, 1.0)
    r_minus, r_plus = horizon_radii(ModelParams(3, MMAX3))
    assert r_minus == pytest.approx(math.sqrt(1 / 3), abs=1e-7)
    assert r_plus == pytest.approx(math.sqrt(1 / 3), abs=1e-7)
    r_minus, r_plus = horizon_radii(P)
    assert r_minus == pytest.approx(SDS["r_minus"], abs=1e-14)
    assert r_plus == pytest.approx(SDS["r_plus"], abs=1e-14)


def test_horizon_radii_agree_with_brentq():
    for m in np.linspace(0.005, 0.19, 20):
        p = ModelParams(3, float(m))
        poly = lambda r: r**3 - r + 2 * m
        r0 = photon_radius(p)
        expected = (optimize.brentq(poly, 1e-300, r0, xtol=1e-15), optimize.brentq(poly, r0, 1.0, xtol=1e-15))
        assert horizon_radii(p) == pytest.approx(expected, abs=1e-13)


def test_horizon_radii_in_four_dimensions():
    r_minus, r_plus = horizon_radii(ModelParams(4, 0.05))
    assert r_minus**2 == pytest.approx((1 - math.sqrt(0.6)) / 2, rel=1e-12)
    assert r_plus**2 == pytest.approx((1 + math.sqrt(0.6)) / 2, rel=1e-12)


def test_photon_radius_and_u_max_examples():
    assert photon_radius(ModelParams(3, 0.0)) == 0.0
    assert photon_radius(P) == pytest.approx(0.4641589, abs=1e-7)
    assert photon_radius(ModelParams(3, MMAX3)) == pytest.approx(math.sqrt(1 / 3), rel=1e-12)
    assert u_max(ModelParams(3, 0.0)) == 1.0
    assert u_max(ModelParams(3, MMAX3)) == 0.0
    assert u_max(P) == pytest.approx(0.594701, abs=1e-6)
    assert u_max(P) ** 2 == pytest.approx(1 - 3 * 0.1 ** (2 / 3), rel=1e-14)


def test_u_max_is_the_maximum_of_f():
    for m in (0.01, 0.1, 0.19):
        p = ModelParams(3, m)
        assert u_max(p) ** 2 == pytest.approx(f_m(p, photon_radius(p)), rel=1e-12)
        assert df_m(p, photon_radius(p)) == pytest.approx(0.0, abs=1e-13)


def test_surface_gravity_examples():
    assert surface_gravity_outer(ModelParams(3, 0.0)) == 1.0
    assert surface_gravity_inner(ModelParams(3, MMAX3)) == pytest.approx(math.sqrt(3), rel=1e-12)
    assert surface_gravity_outer(P) == pytest.approx(SDS["k_plus"], rel=1e-12)
    assert surface_gravity_inner(P) == pytest.approx(SDS["k_minus"], rel=1e-12)


def test_surface_gravity_routes_agree():
    for m in np.linspace(0.01, 0.19, 10):
        for region in ("outer", "inner"):
            closed, derivative = surface_gravity_routes(ModelParams(3, float(m)), region)
            assert closed == pytest.approx(derivative, rel=1e-9)


def test_surface_gravity_excluded_endpoints():
    with pytest.raises(DomainError):
        surface_gravity_outer(ModelParams(3, MMAX3))
    with pytest.raises(DomainError):
        surface_gravity_inner(ModelParams(3, 0.0))


def test_virtual_mass_examples():
    assert virtual_mass(3, 1.0, "outer") == 0.0
    assert virtual_mass(3, math.sqrt(3), "outer") == pytest.approx(MMAX3, rel=1e-12)
    # 1.26018 is k_+(0.1) rounded to 5 decimals
    assert virtual_mass(3, 1.26018, "outer") == pytest.approx(0.1000043212660929, abs=1e-12)
    assert virtual_mass(3, 1.26018, "outer") == pytest.approx(0.1, abs=1e-5)
    assert virtual_mass(3, SDS["k_plus"], "outer") == pytest.approx(0.1, abs=1e-12)
    assert virtual_mass(3, SDS["k_minus"], "inner") == pytest.approx(0.1, abs=1e-12)


def test_virtual_mass_errors_name_the_interval():
    with pytest.raises(BelowDeSitterError, match="below"):
        virtual_mass(3, 0.5, "outer")
    with pytest.raises(DomainError, match=r"\[1, "):
        virtual_mass(3, 1.9, "outer")
    with pytest.raises(DomainError):
        virtual_mass(3, 1.5, "inner")


def test_alpha_examples():
    assert solve_alpha(ModelParams(3, MMAX3)) == pytest.approx(1.0, abs=1e-10)
    assert solve_alpha(P) == pytest.approx(SDS["alpha"], abs=1e-9)
    assert solve_alpha(ModelParams(3, 1e-4)) > 1e3


def test_alpha_two_routes_agree():
    for m in np.linspace(0.002, MMAX3 * 0.999, 15):
        p = ModelParams(3, float(m))
        assert alpha_by_bisection(p) == pytest.approx(solve_alpha(p), rel=1e-10)


def test_alpha_quadratic_has_one_positive_root():
    for m in np.linspace(0.002, MMAX3 * 0.999, 15):
        high, low = alpha_roots(ModelParams(3, float(m)))
        assert low < 0 < high


def test_bisect_matches_brentq_and_reports_failure():
    root = bisect(math.cos, 0.0, 3.0)
    assert root == pytest.approx(optimize.brentq(math.cos, 0.0, 3.0, xtol=1e-15), abs=1e-15)
    with pytest.raises(SolverError) as info:
        bisect(lambda x: x - 1.0, 0.0, 3.0, ToleranceConfig(max_iter=3))
    lo, hi = info.value.bracket
    assert lo < 1.0 < hi


def test_singular_integral_examples():
    assert singular_integral(lambda t: 1 / np.sqrt(t), 0.0, 1.0) == pytest.approx(2.0, abs=1e-10)
    value = singular_integral(lambda t, da, db: 1 / (t * np.sqrt(db * (1 + t))), 0.5, 1.0, offsets=True)
    assert value == pytest.approx(math.log(2 + math.sqrt(3)), abs=1e-8)


def test_singular_integral_against_scipy():
    expected, _ = integrate.quad(lambda t: t**-0.5 * (1 - t) ** -0.5 * math.exp(t), 0, 1, epsabs=1e-13)
    got = singular_integral(lambda t, da, db: np.exp(t) / np.sqrt(da * db), 0.0, 1.0, 1e-12, offsets=True)
    assert got == pytest.approx(expected, rel=1e-10)


def test_two_quadrature_schemes_agree_on_the_outer_phi_integral():
    r0, r_plus = photon_radius(P), SDS["r_plus"]

    def integrand(t, da, db):
        return 1 / (t * np.sqrt(f_m_near_root(P, r_plus, -db)))

    ts = singular_integral(integrand, r0, r_plus, 1e-12, offsets=True)
    gl = substitution_integral(integrand, r0, r_plus, "b", 1e-12, offsets=True)
    assert ts > 0
    assert ts == pytest.approx(gl, abs=1e-8)


def test_quadrature_failure_carries_estimates():
    with pytest.raises(QuadratureError) as info:
        singular_integral(lambda t: np.sin(1e4 * t) / np.sqrt(t), 0.0, 1.0, 1e-15, max_level=2)
    assert info.value.nodes > 0
    assert len(info.value.estimates) == 2
