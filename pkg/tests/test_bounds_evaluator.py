import math

import mpmath as mp
import pytest

from kottler.bounds_evaluator import (
    RegionInput, RegionKind, UniquenessVerdict, Verdict, ambrozio_bound, area_bound_3d, classify_difference,
    compare_cell, compare_grid, evaluate_region, horizons_from_csv, lower_bound, scalar_curvature_bound,
    sigma_bound_3d, uniqueness_check, weighted_balance_3d,
)
from kottler.errors import InputError
from kottler.scalar_solvers import (
    ModelParams, horizon_radii, m_max, surface_gravity_inner, surface_gravity_outer, virtual_mass,
)

from oracles import SDS

MMAX3 = m_max(3)
FOUR_PI_THIRD = 4 * math.pi / 3
OUTER = RegionInput(3, [(SDS["k_plus"], SDS["area_plus"])], sigma_area=SDS["sigma_area"])
INNER = RegionInput(3, [(SDS["k_minus"], SDS["area_minus"])], sigma_area=SDS["sigma_area"])
NARIAI = RegionInput(3, [(math.sqrt(3), FOUR_PI_THIRD)], sigma_area=FOUR_PI_THIRD)


def test_region_kinds():
    assert OUTER.region_kind is RegionKind.OUTER
    assert INNER.region_kind is RegionKind.INNER
    assert NARIAI.region_kind is RegionKind.CYLINDRICAL
    assert OUTER.virtual_mass() == pytest.approx(0.1, abs=1e-12)


def test_region_input_validation():
    with pytest.raises(InputError):
        RegionInput(3, [(1.2,)])
    with pytest.raises(InputError):
        RegionInput(3, [(-1.0, 2.0)])
    with pytest.raises(InputError):
        RegionInput(2, [(1.2, 2.0)])


def test_area_bound_sharp_on_models():
    for region, expected in ((OUTER, SDS["area_plus"]), (INNER, SDS["area_minus"]), (NARIAI, FOUR_PI_THIRD)):
        entry = area_bound_3d(region)
        assert entry.rhs == pytest.approx(expected, rel=1e-10)
        assert entry.sharp and entry.verdict is Verdict.SATISFIED


def test_area_bound_below_de_sitter_flags_positive_mass():
    entry = area_bound_3d(RegionInput(3, [(0.5, 1.0)]))
    assert entry.verdict is Verdict.POSITIVE_MASS_VIOLATION


def test_scalar_curvature_bound_four_dimensional_sds():
    p = ModelParams(4, 0.05)
    _, r_plus = horizon_radii(p)
    area = 2 * math.pi**2 * r_plus**3
    region = RegionInput(4, [(surface_gravity_outer(p), area)])
    entry = scalar_curvature_bound(region, fiber_einstein_constant=2.0)
    assert abs(entry.margin) <= 1e-8 * entry.rhs


def test_scalar_curvature_bound_nariai_and_errors():
    entry = scalar_curvature_bound(NARIAI, scalar_integral=6 * FOUR_PI_THIRD)
    assert entry.rhs == pytest.approx(FOUR_PI_THIRD, rel=1e-15) and entry.sharp
    low = scalar_curvature_bound(OUTER, scalar_integral=0.5 * 8 * math.pi)
    assert low.verdict is Verdict.VIOLATED
    with pytest.raises(InputError):
        scalar_curvature_bound(OUTER)


def test_lower_bound_examples():
    entry = lower_bound(OUTER)
    assert entry.lhs == pytest.approx(3.5853440498852519 * SDS["sigma_area"], rel=1e-10)
    assert entry.sharp
    assert lower_bound(NARIAI).sharp
    degenerate = lower_bound(RegionInput(3, [(SDS["k_plus"], SDS["area_plus"])], sigma_area=0.0))
    assert degenerate.verdict is Verdict.DEGENERATE
    with pytest.raises(InputError):
        lower_bound(RegionInput(3, [(SDS["k_plus"], SDS["area_plus"])]))


def test_sigma_bound_examples():
    assert sigma_bound_3d(SDS["sigma_area"], 0.1).sharp
    assert sigma_bound_3d(1.0, MMAX3).rhs == pytest.approx(FOUR_PI_THIRD, rel=1e-12)
    assert sigma_bound_3d(0.0, 0.1).verdict is Verdict.SATISFIED


def test_weighted_balance_single_horizon_is_sharp():
    assert weighted_balance_3d(OUTER).sharp
    assert weighted_balance_3d(INNER).sharp
    assert weighted_balance_3d(NARIAI).sharp


def test_weighted_balance_two_horizon_regression():
    entry = weighted_balance_3d(RegionInput(3, [(1.2, 5.0), (1.1, 5.0)]))
    # independent evaluation: invert k_+(m) = 1.2 and apply the weighted formula
    with mp.workdps(30):
        def k_plus(m):
            r0 = mp.cbrt(m)
            r_plus = mp.findroot(lambda r: r**3 - r + 2 * m, (r0, mp.mpf(1)), solver="illinois")
            umax = mp.sqrt(1 - 3 * m ** (mp.mpf(2) / 3))
            return (r_plus - m / r_plus**2) / umax, r_plus

        m = mp.findroot(lambda x: k_plus(x)[0] - mp.mpf("1.2"), (mp.mpf("0.001"), mp.mpf("0.19")),
                        solver="illinois")
        r_plus = k_plus(m)[1]
        c = mp.mpf(3) / 2 * r_plus**2
        a2 = (mp.mpf("1.1") / mp.mpf("1.2")) ** 2
        lhs = (mp.mpf("1.2") * 5 + (a2 - c * (1 - a2)) * mp.mpf("1.1") * 5) / mp.mpf("2.3")
        rhs = 4 * mp.pi * r_plus**2
    assert entry.lhs == pytest.approx(float(lhs), rel=1e-10)
    assert entry.rhs == pytest.approx(float(rhs), rel=1e-10)
    assert entry.lhs == pytest.approx(4.134224188332199, rel=1e-10)
    assert entry.verdict is Verdict.SATISFIED and not entry.sharp


def test_weighted_balance_needs_horizons():
    with pytest.raises(InputError):
        weighted_balance_3d(RegionInput(3, []))


def test_ambrozio_examples():
    assert ambrozio_bound([(math.sqrt(3), FOUR_PI_THIRD)] * 2).sharp
    both = ambrozio_bound([(SDS["k_plus"], SDS["area_plus"]), (SDS["k_minus"], SDS["area_minus"])])
    assert both.lhs == pytest.approx(SDS["cell_ours"] / 4.7525434981158929, rel=1e-10)
    assert both.lhs == pytest.approx(2.97724, abs=1e-3)
    assert both.lhs < FOUR_PI_THIRD
    out = ambrozio_bound([(1.0, 4 * math.pi)])
    assert out.verdict is Verdict.OUT_OF_HYPOTHESIS


def test_evaluate_region_on_models_is_all_sharp():
    for region in (OUTER, INNER, NARIAI):
        report = evaluate_region(region)
        assert {e.name for e in report} >= {"area_bound", "weighted_balance", "lower_bound", "sigma_bound"}
        assert all(e.sharp for e in report)
        assert not report.violated


def test_classify_difference():
    assert classify_difference(5.0) == "ours_much_stronger"
    assert classify_difference(1.0) == "ours_stronger"
    assert classify_difference(0.0) == "ambrozio_stronger"
    assert classify_difference(-1.0) == "ambrozio_stronger"


def test_compare_cell_at_the_nariai_limit():
    ambro, ours, diff, _ = compare_cell(MMAX3, MMAX3)
    # both horizons carry kappa = sqrt(3) and area 4 pi / 3
    assert ambro == pytest.approx(FOUR_PI_THIRD * 2 * math.sqrt(3), rel=1e-9)
    assert ours == pytest.approx(2 * math.sqrt(3) * FOUR_PI_THIRD, rel=1e-9)
    assert diff == pytest.approx(0.0, abs=1e-8)


def test_compare_grid_shape_and_ordering():
    rows = compare_grid(4)
    assert len(rows) == 16
    assert rows[0][0] == rows[1][0] and rows[0][1] < rows[1][1]
    assert rows[0][0] == pytest.approx(MMAX3 / 1000)


def test_uniqueness_verdicts():
    assert uniqueness_check(OUTER, INNER).verdict is UniquenessVerdict.SCHWARZSCHILD_DE_SITTER
    assert uniqueness_check(NARIAI, NARIAI).verdict is UniquenessVerdict.NARIAI
    res = uniqueness_check(RegionInput(3, [(1.1, 1.0)]), RegionInput(3, [(3.8, 1.0)]))
    assert res.m_plus == pytest.approx(virtual_mass(3, 1.1, "outer"), rel=1e-12)
    assert res.m_plus == pytest.approx(0.025394752164393209, rel=1e-9)
    assert res.m_minus == pytest.approx(0.090255866753019327, rel=1e-9)
    assert res.verdict is UniquenessVerdict.INCONSISTENT
    p = ModelParams(3, 0.1)
    lighter = RegionInput(3, [(surface_gravity_inner(ModelParams(3, 0.05)), 1.0)])
    assert uniqueness_check(RegionInput(3, [(surface_gravity_outer(p), 1.0)]), lighter).verdict \
        is UniquenessVerdict.INCONCLUSIVE


def test_uniqueness_rejects_swapped_regions():
    with pytest.raises(InputError):
        uniqueness_check(INNER, OUTER)


def test_horizons_csv(tmp_path):
    path = tmp_path / "h.csv"
    path.write_text("kappa,area\n1.5,2.0\n2.5,0.5\n")
    assert horizons_from_csv(str(path)) == [(1.5, 2.0), (2.5, 0.5)]
    path.write_text("kappa,area\n1.5,x\n")
    with pytest.raises(InputError, match="line 2"):
        horizons_from_csv(str(path))
