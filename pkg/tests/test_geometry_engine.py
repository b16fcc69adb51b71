import math

import numpy as np
import pytest

from kottler.errors import DomainError, ResolutionError
from kottler.geometry_engine import (
    conformal_identity_residuals, conformal_scalar_curvature, derivatives, expansion_check, fd_weights,
    horizon_gradient_expansion, infer_branch, lojasiewicz_limit, mean_curvature_pair, phi_flux,
    sigma_geometry_fd, static_residuals,
)
from kottler.model_solutions import build_model, export_profile
from kottler.profiles import WarpedProfile
from kottler.pseudo_radial import Branch, PseudoRadialBranch
from kottler.scalar_solvers import ModelParams, m_max, u_max

from oracles import SDS

P = ModelParams(3, 0.1)
NARIAI = ModelParams(3, m_max(3))


def _sds(samples=1024, chart="area"):
    return export_profile(build_model("sds", P), samples, chart)


def _nariai(samples=1024):
    return export_profile(build_model("nariai", NARIAI), samples)


def test_fd_weights_reproduce_classic_stencils():
    w = fd_weights(0.0, np.array([-1.0, 0.0, 1.0]), 2)
    assert np.allclose(w[1], [-0.5, 0.0, 0.5])
    assert np.allclose(w[2], [1.0, -2.0, 1.0])


def test_derivatives_are_exact_on_polynomials():
    x = np.sort(np.random.default_rng(0).uniform(0, 1, 200))
    d1, d2, d3 = derivatives(x**5, x, 3)
    assert np.allclose(d1, 5 * x**4, atol=1e-7)
    assert np.allclose(d2, 20 * x**3, atol=1e-5)
    assert np.allclose(d3, 60 * x**2, atol=1e-3)


def test_sds_static_residuals_at_2048_samples():
    reports = static_residuals(_sds(2048))
    assert [r.identity for r in reports] == ["static_radial", "static_tangential", "laplacian",
                                             "scalar_curvature"]
    assert all(r.passed and r.max_residual < 1e-6 for r in reports)


def test_nariai_static_residuals_are_tiny():
    assert all(r.max_residual < 1e-8 for r in static_residuals(_nariai()))


def test_perturbed_profile_is_detected():
    prof = _sds(1024)
    x = (prof.coord - prof.coord[0]) / (prof.coord[-1] - prof.coord[0])
    bump = np.exp(-((x - 0.7) / 0.1) ** 2)
    reports = {r.identity: r for r in static_residuals(prof.with_u(prof.u * (1 + 0.01 * bump)))}
    assert reports["static_radial"].max_residual > 1e-3
    assert not reports["static_radial"].passed
    # continuous maximum of the residual, from 30-digit mpmath differentiation of the bumped potential
    assert reports["static_radial"].max_residual == pytest.approx(0.6023315, rel=1e-3)


def test_too_few_samples_is_a_resolution_error():
    with pytest.raises(ResolutionError):
        WarpedProfile(3, "area", np.linspace(0, 1, 5), np.ones(5), np.ones(5))


def test_conformal_scalar_curvature_is_constant_on_nariai():
    prof = _nariai()
    branch, scale = infer_branch(prof, "outer")
    rep = conformal_scalar_curvature(prof.with_u(prof.u * scale), branch)
    assert rep.details["min"] == pytest.approx(2.0, abs=1e-8)
    assert rep.details["max"] == pytest.approx(2.0, abs=1e-8)


def test_de_sitter_conformal_laplacian_vanishes():
    prof = export_profile(build_model("desitter", ModelParams(3, 0.0)), 1024, "proper")
    branch, scale = infer_branch(prof, "outer")
    assert branch.params.m == 0.0
    reports = {r.identity: r for r in conformal_identity_residuals(prof.with_u(prof.u * scale), branch)}
    assert reports["conformal_laplacian"].max_residual < 1e-6


def test_lojasiewicz_ratio_tends_to_one():
    prof = _sds(4096)
    limit = lojasiewicz_limit(prof)
    i = int(np.argmax(prof.u))
    (V1,) = derivatives(prof.u**2, prof.coord, 1)
    du2 = (V1[i + 3] / 2) ** 2
    assert limit * (prof.u[i] - prof.u[i + 3]) / du2 == pytest.approx(1.0, abs=1e-2)


def test_lojasiewicz_rejects_boundary_maximum():
    prof = _sds(256)
    half = len(prof) // 2
    clipped = WarpedProfile(3, "area", prof.coord[:half], np.sqrt(prof.coord[:half]), prof.warp[:half])
    with pytest.raises(DomainError):
        lojasiewicz_limit(clipped)


def test_expansion_negative_controls():
    assert expansion_check(P, terms=3).details["slope"] == pytest.approx(4.0, abs=0.1)
    two = expansion_check(P, terms=2)
    assert two.details["slope"] == pytest.approx(3.0, abs=0.1)
    assert not two.passed


def test_flux_is_four_pi_on_the_outer_region():
    prof = _sds(2048)
    branch = PseudoRadialBranch(P, Branch.OUTER)
    du = build_model("sds", P).du_norm(prof.warp)
    s = np.linspace(0.05, 0.95, 40) * branch.phi0
    assert np.allclose(phi_flux(prof, branch, s, du_norm=du), 4 * math.pi, atol=1e-8)


def test_flux_scales_with_the_gradient():
    prof = _sds(2048)
    branch = PseudoRadialBranch(P, Branch.OUTER)
    du = build_model("sds", P).du_norm(prof.warp)
    s = np.linspace(0.1, 0.9, 9) * branch.phi0
    full = phi_flux(prof, branch, s, du_norm=du)
    assert np.allclose(phi_flux(prof, branch, s, du_norm=0.9 * du), 0.9 * full, rtol=1e-12)


def test_flux_is_constant_on_nariai():
    prof = _nariai()
    branch, _ = infer_branch(prof, "outer")
    s = np.linspace(0.1, 1.5, 30)
    flux = phi_flux(prof, branch, s, du_norm=math.sqrt(3) * np.abs(np.cos(math.sqrt(3) * prof.coord)))
    assert np.ptp(flux) < 1e-8


def test_flux_rejects_levels_outside_the_region():
    prof = _sds(512)
    branch = PseudoRadialBranch(P, Branch.OUTER)
    with pytest.raises(DomainError):
        phi_flux(prof, branch, [branch.phi0 + 1.0])


def test_sigma_geometry_fd_on_de_sitter_is_rejected():
    with pytest.raises(DomainError):
        sigma_geometry_fd(export_profile(build_model("desitter", ModelParams(3, 0.0)), 256, "proper"))


def test_mean_curvature_pair_on_the_model():
    prof = _sds(2048, "proper")
    i = int(np.argmax(prof.u))
    at_sigma = mean_curvature_pair(prof, prof.coord[i], P)
    assert at_sigma.H == pytest.approx(SDS["H"], rel=1e-5)
    assert abs(at_sigma.H_g) < 1e-6
    away = mean_curvature_pair(prof, prof.coord[i + 300], P)
    assert away.H_g == pytest.approx(away.H_g_direct, abs=1e-5)
    assert not away.critical


def test_horizon_gradient_expansion_matches_prediction():
    res = horizon_gradient_expansion(_sds(2048, "proper"), "last")
    assert res["W0"] == pytest.approx((SDS["k_plus"] * u_max(P)) ** 2, rel=1e-8)
    assert res["measured"] == pytest.approx(res["predicted"], rel=1e-5)


def test_infer_branch_recovers_the_mass():
    prof = _sds(1024)
    outer, scale = infer_branch(prof, "outer")
    inner, _ = infer_branch(prof, "inner")
    assert outer.params.m == pytest.approx(0.1, abs=1e-9)
    assert inner.params.m == pytest.approx(0.1, abs=1e-9)
    assert scale == pytest.approx(1.0, abs=1e-12)
    cyl, _ = infer_branch(_nariai(), "inner")
    assert cyl.branch is Branch.CYLINDRICAL and cyl.side == "inner"
