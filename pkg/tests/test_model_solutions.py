import math

import numpy as np
import pytest
from scipy import integrate

from kottler.errors import DomainError
from kottler.model_solutions import (
    HorizonLabel, ModelKind, build_model, classify_kappa, export_profile, horizons,
    proper_distance_to_horizons, sigma_geometry,
)
from kottler.profiles import Chart
from kottler.scalar_solvers import ModelParams, f_m, m_max, photon_radius

from oracles import SDS

MMAX3 = m_max(3)
P = ModelParams(3, 0.1)


def test_kind_and_mass_must_match():
    with pytest.raises(DomainError):
        build_model("desitter", P)
    with pytest.raises(DomainError):
        build_model("nariai", P)
    with pytest.raises(DomainError):
        build_model("sds", ModelParams(3, 0.0))
    with pytest.raises(DomainError):
        build_model("sds", ModelParams(3, MMAX3))


def test_round_kinds_reject_other_fibers():
    with pytest.raises(DomainError):
        build_model("sds", P, fiber_area_normalization=1.0)
    assert build_model("gen-sds", P, fiber_area_normalization=1.0).fiber_area_normalization == 1.0
    with pytest.raises(DomainError):
        build_model("gen-sds", P, fiber_einstein_constant=2.0)


def test_kind_parsing():
    assert ModelKind.parse("SDS") is ModelKind.SCHWARZSCHILD_DE_SITTER
    assert ModelKind.parse("gen-nariai").is_cylindrical
    with pytest.raises(DomainError):
        ModelKind.parse("kerr")


def test_sds_horizons():
    outer, inner = horizons(build_model("sds", P))
    assert outer.label is HorizonLabel.COSMOLOGICAL and inner.label is HorizonLabel.BLACK_HOLE
    assert (outer.radius, outer.kappa) == pytest.approx((SDS["r_plus"], SDS["k_plus"]), rel=1e-12)
    assert (inner.radius, inner.kappa) == pytest.approx((SDS["r_minus"], SDS["k_minus"]), rel=1e-12)
    assert outer.area == pytest.approx(SDS["area_plus"], rel=1e-12)
    assert inner.area == pytest.approx(SDS["area_minus"], rel=1e-12)


def test_de_sitter_and_nariai_horizons():
    (rec,) = horizons(build_model("desitter", ModelParams(3, 0.0)))
    assert (rec.label, rec.radius, rec.kappa) == (HorizonLabel.COSMOLOGICAL, 1.0, 1.0)
    assert rec.area == pytest.approx(4 * math.pi)
    recs = horizons(build_model("nariai", ModelParams(3, MMAX3)))
    assert len(recs) == 2
    for rec in recs:
        assert rec.label is HorizonLabel.CYLINDRICAL
        assert rec.kappa == pytest.approx(math.sqrt(3))
        assert rec.area == pytest.approx(4 * math.pi / 3, rel=1e-14)


def test_classify_kappa():
    assert classify_kappa(1.2, 3) is HorizonLabel.COSMOLOGICAL
    assert classify_kappa(3.0, 3) is HorizonLabel.BLACK_HOLE
    assert classify_kappa(math.sqrt(3), 3) is HorizonLabel.CYLINDRICAL


def test_sigma_geometry_closed_forms():
    geo = sigma_geometry(P)
    assert geo["H"] == pytest.approx(SDS["H"], rel=1e-13)
    assert geo["R_sigma"] == pytest.approx(SDS["R_sigma"], rel=1e-13)
    assert geo["area"] == pytest.approx(SDS["sigma_area"], rel=1e-13)
    # H = 2 u_max / r_0 and R = 2 / r_0^2 on the model
    assert geo["H"] == pytest.approx(2 * SDS["umax"] / SDS["r0"], rel=1e-13)
    assert geo["R_sigma"] == pytest.approx(2 / SDS["r0"] ** 2, rel=1e-13)
    nariai = sigma_geometry(ModelParams(3, MMAX3))
    assert (nariai["H"], nariai["R_sigma"]) == (0.0, 6.0)
    assert sigma_geometry(ModelParams(3, MMAX3 * (1 - 1e-8)))["H"] < 1e-3
    with pytest.raises(DomainError):
        sigma_geometry(ModelParams(3, 0.0))


def test_proper_distances_against_scipy():
    to_inner, to_outer = proper_distance_to_horizons(P)
    r0 = SDS["r0"]
    inner, _ = integrate.quad(lambda r: f_m(P, r) ** -0.5, SDS["r_minus"], r0, epsabs=1e-12, limit=200)
    outer, _ = integrate.quad(lambda r: f_m(P, r) ** -0.5, r0, SDS["r_plus"], epsabs=1e-12, limit=200)
    assert to_inner == pytest.approx(-inner, abs=1e-7)
    assert to_outer == pytest.approx(outer, abs=1e-7)


def test_sds_area_export_endpoints_and_sigma_node():
    prof = export_profile(build_model("sds", P), 512, "area")
    assert prof.chart is Chart.AREA_RADIUS and len(prof) == 512
    assert prof.coord[0] == pytest.approx(SDS["r_minus"], abs=1e-12)
    assert prof.coord[-1] == pytest.approx(SDS["r_plus"], abs=1e-12)
    assert prof.u[0] == 0.0 and prof.u[-1] == 0.0
    assert photon_radius(P) in prof.coord
    assert np.max(prof.u) == pytest.approx(SDS["umax"], rel=1e-15)
    inside = slice(1, -1)
    assert np.allclose(prof.u[inside] ** 2, f_m(P, prof.coord[inside]), rtol=1e-12, atol=1e-15)


def test_sds_proper_export_matches_the_area_relation():
    prof = export_profile(build_model("sds", P), 512, "proper")
    assert prof.coord[0] == 0.0
    to_inner, to_outer = proper_distance_to_horizons(P)
    assert prof.coord[-1] == pytest.approx(to_outer - to_inner, rel=1e-10)
    assert np.max(np.abs(prof.u**2 - f_m(P, prof.warp))) < 1e-13


def test_nariai_export():
    prof = export_profile(build_model("nariai", ModelParams(3, MMAX3)), 256)
    assert prof.chart is Chart.PROPER_DISTANCE
    assert prof.coord[-1] == pytest.approx(math.pi / math.sqrt(3), abs=1e-10)
    assert np.all(prof.warp == prof.warp[0])
    with pytest.raises(DomainError):
        export_profile(build_model("nariai", ModelParams(3, MMAX3)), 256, "area")


def test_de_sitter_exports():
    triple = build_model("desitter", ModelParams(3, 0.0))
    area = export_profile(triple, 128, "area")
    assert area.u[-1] == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(area.u, np.sqrt(1 - area.coord**2), atol=1e-15)
    proper = export_profile(triple, 128, "proper")
    assert np.allclose(proper.u, np.cos(proper.coord), atol=1e-15)


def test_export_rejects_too_few_samples():
    with pytest.raises(DomainError):
        export_profile(build_model("sds", P), 8)
