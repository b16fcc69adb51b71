"""Area inequalities evaluated on horizon data.

A region is summarized by its horizons, each a pair ``(kappa, area)`` where
``kappa`` is the normalized surface gravity ``|Du| / max u``. The largest
``kappa`` decides the region kind (outer below ``sqrt(n)``, inner above,
cylindrical at the threshold) and, through its inverse surface-gravity
function, the virtual mass ``m`` that sets the model radii ``r_-(m)``,
``r_0(m)`` and ``r_+(m)`` used by every bound.

Each bound is reported as ``lhs <= rhs`` with ``margin = rhs - lhs``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import BelowDeSitterError, DomainError, InputError
from .model_solutions import HorizonLabel, classify_kappa
from .profiles import sphere_area
from .scalar_solvers import (
    KAPPA_TIE_TOL,
    ModelParams,
    horizon_radii,
    m_max,
    photon_radius,
    solve_alpha,
    surface_gravity_inner,
    surface_gravity_outer,
    virtual_mass,
)

__all__ = [
    "RegionKind",
    "Verdict",
    "RegionInput",
    "BoundsEntry",
    "BoundsReport",
    "UniquenessVerdict",
    "UniquenessResult",
    "SHARP_TOL",
    "MASS_TOL",
    "area_bound_3d",
    "scalar_curvature_bound",
    "lower_bound",
    "sigma_bound_3d",
    "weighted_balance_3d",
    "ambrozio_bound",
    "compare_cell",
    "compare_grid",
    "classify_difference",
    "uniqueness_check",
    "evaluate_region",
    "horizons_from_csv",
    "HORIZONS_HEADER",
    "GRID_HEADER",
]

SHARP_TOL = 1e-6
MASS_TOL = 1e-8
MUCH_STRONGER_GAP = 3.0
HORIZONS_HEADER = ("kappa", "area")
GRID_HEADER = ("m_plus", "m_minus", "rhs_ambrozio", "rhs_ours", "diff", "class")


class RegionKind(str, Enum):
    OUTER = "Outer"
    INNER = "Inner"
    CYLINDRICAL = "Cylindrical"


class Verdict(str, Enum):
    SATISFIED = "satisfied"
    VIOLATED = "violated"
    DEGENERATE = "degenerate"
    OUT_OF_HYPOTHESIS = "out_of_hypothesis"
    POSITIVE_MASS_VIOLATION = "positive_mass_violation"


@dataclass(frozen=True)
class RegionInput:
    """Horizon summary of one region.

    Parameters
    ----------
    n : int
        Dimension.
    horizons : sequence of (kappa, area)
        Normalized surface gravities and areas of the boundary components.
    sigma_area : float, optional
        Area of the part of the maximum set bounding the region.
    """

    n: int
    horizons: tuple
    sigma_area: float | None = None
    tie_tol: float = KAPPA_TIE_TOL

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise InputError(f"dimension must be an integer >= 3, got {self.n!r}")
        pairs = []
        for item in self.horizons:
            try:
                kappa, area = (float(v) for v in item)
            except (TypeError, ValueError):
                raise InputError(f"horizon entry {item!r} is not a (kappa, area) pair") from None
            if not (math.isfinite(kappa) and math.isfinite(area)) or kappa <= 0 or area < 0:
                raise InputError(f"horizon entry ({kappa!r}, {area!r}) needs kappa > 0 and area >= 0")
            pairs.append((kappa, area))
        pairs.sort(key=lambda p: -p[0])
        object.__setattr__(self, "horizons", tuple(pairs))
        if self.sigma_area is not None and not self.sigma_area >= 0:
            raise InputError("sigma_area must be nonnegative")

    @property
    def kappa_max(self) -> float:
        if not self.horizons:
            raise InputError("region has no horizons")
        return self.horizons[0][0]

    @property
    def region_kind(self) -> RegionKind:
        label = classify_kappa(self.kappa_max, self.n, self.tie_tol)
        return {
            HorizonLabel.COSMOLOGICAL: RegionKind.OUTER,
            HorizonLabel.BLACK_HOLE: RegionKind.INNER,
            HorizonLabel.CYLINDRICAL: RegionKind.CYLINDRICAL,
        }[label]

    @property
    def weights(self) -> np.ndarray:
        """``A_i = kappa_i / max kappa`` in ``(0, 1]``."""
        k = np.array([h[0] for h in self.horizons])
        return k / k[0]

    @property
    def total_area(self) -> float:
        return float(sum(h[1] for h in self.horizons))

    def virtual_mass(self) -> float:
        """Mass of the model whose horizon has this region's largest ``kappa``."""
        kind = self.region_kind
        if kind is RegionKind.CYLINDRICAL:
            return m_max(self.n)
        return virtual_mass(self.n, self.kappa_max, "outer" if kind is RegionKind.OUTER else "inner")


@dataclass(frozen=True)
class BoundsEntry:
    """One inequality ``lhs <= rhs``."""

    name: str
    lhs: float
    rhs: float
    margin: float
    sharp: bool
    verdict: Verdict

    def to_dict(self) -> dict:
        out = asdict(self)
        out["verdict"] = self.verdict.value
        return out


class BoundsReport(list):
    """List of :class:`BoundsEntry` with a JSON-ready view."""

    def to_dicts(self) -> list[dict]:
        return [e.to_dict() for e in self]

    @property
    def violated(self) -> bool:
        bad = (Verdict.VIOLATED, Verdict.POSITIVE_MASS_VIOLATION)
        return any(e.verdict in bad for e in self)


def _entry(name: str, lhs: float, rhs: float, sharp_tol: float = SHARP_TOL,
           verdict: Verdict | None = None) -> BoundsEntry:
    margin = rhs - lhs
    scale = max(abs(lhs), abs(rhs), 1e-300)
    sharp = abs(margin) <= sharp_tol * scale
    if verdict is None:
        verdict = Verdict.SATISFIED if (sharp or margin >= 0) else Verdict.VIOLATED
    return BoundsEntry(name, float(lhs), float(rhs), float(margin), bool(sharp), verdict)


def _positive_mass_entry(name: str, lhs: float) -> BoundsEntry:
    return BoundsEntry(name, float(lhs), math.nan, math.nan, False, Verdict.POSITIVE_MASS_VIOLATION)


def _region_mass(region: RegionInput, m: float | None) -> float:
    return region.virtual_mass() if m is None else float(m)


def _model_radius(region: RegionInput, m: float) -> float:
    """``r_+(m)`` for outer regions and ``r_-(m)`` for inner ones."""
    params = ModelParams(region.n, m)
    r_minus, r_plus = horizon_radii(params)
    return r_plus if region.region_kind is RegionKind.OUTER else r_minus


def _require_3d(n: int, name: str) -> None:
    if n != 3:
        raise DomainError(f"{name} is stated for n = 3")


def area_bound_3d(region: RegionInput, m: float | None = None, sharp_tol: float = SHARP_TOL) -> BoundsEntry:
    """``|S| <= 4 pi r_+^2(m)``, ``4 pi r_-^2(m)`` or ``4 pi / 3`` for the largest-``kappa`` horizon."""
    _require_3d(region.n, "area_bound_3d")
    name = "area_bound"
    lhs = region.horizons[0][1] if region.horizons else 0.0
    try:
        m = _region_mass(region, m)
    except BelowDeSitterError:
        return _positive_mass_entry(name, lhs)
    if region.region_kind is RegionKind.CYLINDRICAL:
        return _entry(name, lhs, 4.0 * math.pi / 3.0, sharp_tol)
    r = _model_radius(region, m)
    return _entry(name, lhs, 4.0 * math.pi * r * r, sharp_tol)


def scalar_curvature_bound(region: RegionInput, m: float | None = None, *, scalar_integral: float | None = None,
                           fiber_einstein_constant: float | None = None,
                           fiber_area_normalization: float | None = None,
                           sharp_tol: float = SHARP_TOL) -> BoundsEntry:
    """Area of the largest-``kappa`` horizon against its total scalar curvature.

    Checks ``|S| <= (int R^S / ((n-1)(n-2))) r_±^2(m)``, or
    ``|S| <= int R^S / (n(n-1))`` for cylindrical regions.

    ``int R^S`` is taken from ``scalar_integral`` or derived from an Einstein
    fiber: with ``|S| = A_E b^(n-1)`` the horizon metric is ``b^2 g_E`` and
    ``R^S = (n-1) k / b^2``.

    Raises
    ------
    InputError
        If neither ``scalar_integral`` nor ``fiber_einstein_constant`` is given.
    """
    n = region.n
    name = "scalar_curvature_bound"
    area = region.horizons[0][1]
    if scalar_integral is None:
        if fiber_einstein_constant is None:
            raise InputError("scalar curvature bound needs the horizon's scalar curvature integral or fiber data")
        norm = sphere_area(n) if fiber_area_normalization is None else float(fiber_area_normalization)
        b = (area / norm) ** (1.0 / (n - 1))
        scalar_integral = (n - 1) * fiber_einstein_constant / (b * b) * area
    try:
        m = _region_mass(region, m)
    except BelowDeSitterError:
        return _positive_mass_entry(name, area)
    if region.region_kind is RegionKind.CYLINDRICAL:
        return _entry(name, area, scalar_integral / (n * (n - 1)), sharp_tol)
    r = _model_radius(region, m)
    return _entry(name, area, scalar_integral / ((n - 1) * (n - 2)) * r * r, sharp_tol)


def lower_bound(region: RegionInput, m: float | None = None, sharp_tol: float = SHARP_TOL) -> BoundsEntry:
    """``(r_±(m) / r_0(m))^(n-1) |Σ| <= |∂N|`` (ratio 1 for cylindrical regions).

    Raises
    ------
    InputError
        If the region carries no ``sigma_area``.
    """
    name = "lower_bound"
    if region.sigma_area is None:
        raise InputError("lower bound needs the area of the maximum set")
    boundary = region.total_area
    try:
        m = _region_mass(region, m)
    except BelowDeSitterError:
        return _positive_mass_entry(name, math.nan)
    if region.region_kind is RegionKind.CYLINDRICAL:
        factor = 1.0
    else:
        params = ModelParams(region.n, m)
        factor = (_model_radius(region, m) / photon_radius(params)) ** (region.n - 1)
    lhs = factor * region.sigma_area
    if region.sigma_area == 0.0:
        return _entry(name, lhs, boundary, sharp_tol, Verdict.DEGENERATE)
    return _entry(name, lhs, boundary, sharp_tol)


def sigma_bound_3d(sigma_area: float, m: float, sharp_tol: float = SHARP_TOL) -> BoundsEntry:
    """``|Σ| <= 4 pi r_0^2(m)``."""
    params = ModelParams(3, m)
    r0 = photon_radius(params)
    return _entry("sigma_bound", float(sigma_area), 4.0 * math.pi * r0 * r0, sharp_tol)


def weighted_balance_3d(region: RegionInput, m: float | None = None, sharp_tol: float = SHARP_TOL) -> BoundsEntry:
    """Weighted area balance over all horizons of a three-dimensional region.

    With ``A_i = kappa_i / kappa_0``::

        sum [A_i^2 - c (1 - A_i^2)] kappa_i |S_i| / sum kappa_i  <=  R

    where ``(c, R)`` is ``(3/2 r_+^2, 4 pi r_+^2)`` for outer regions,
    ``(3/2 alpha r_-^2, 4 pi r_-^2)`` for inner ones and ``(1/2, 4 pi/3)`` for
    cylindrical ones.
    """
    _require_3d(region.n, "weighted_balance_3d")
    if not region.horizons:
        raise InputError("weighted balance needs at least one horizon")
    name = "weighted_balance"
    kappa = np.array([h[0] for h in region.horizons])
    area = np.array([h[1] for h in region.horizons])
    A2 = region.weights**2
    try:
        m = _region_mass(region, m)
    except BelowDeSitterError:
        return _positive_mass_entry(name, math.nan)
    kind = region.region_kind
    if kind is RegionKind.CYLINDRICAL:
        c, rhs = 0.5, 4.0 * math.pi / 3.0
    else:
        r = _model_radius(region, m)
        c = 1.5 * r * r
        if kind is RegionKind.INNER:
            c *= solve_alpha(ModelParams(3, m))
        rhs = 4.0 * math.pi * r * r
    lhs = float(np.sum((A2 - c * (1.0 - A2)) * kappa * area) / np.sum(kappa))
    return _entry(name, lhs, rhs, sharp_tol)


def ambrozio_bound(horizons: Iterable[Sequence[float]], tie_tol: float = KAPPA_TIE_TOL,
                   sharp_tol: float = SHARP_TOL) -> BoundsEntry:
    """``sum kappa_i |S_i| / sum kappa_i <= 4 pi / 3`` over all horizons.

    The inequality excludes de Sitter; a single horizon with ``kappa = 1`` is
    reported as out of hypothesis.
    """
    pairs = [(float(k), float(a)) for k, a in horizons]
    if not pairs:
        raise InputError("Ambrozio's bound needs at least one horizon")
    kappa = np.array([p[0] for p in pairs])
    area = np.array([p[1] for p in pairs])
    lhs = float(np.sum(kappa * area) / np.sum(kappa))
    rhs = 4.0 * math.pi / 3.0
    if len(pairs) == 1 and abs(kappa[0] - 1.0) <= tie_tol:
        return _entry("ambrozio_bound", lhs, rhs, sharp_tol, Verdict.OUT_OF_HYPOTHESIS)
    return _entry("ambrozio_bound", lhs, rhs, sharp_tol)


# ------------------------------------------------------------ comparison


def classify_difference(diff: float) -> str:
    """Class token of one comparison cell."""
    if diff > MUCH_STRONGER_GAP:
        return "ours_much_stronger"
    if diff > 0.0:
        return "ours_stronger"
    return "ambrozio_stronger"


def _outer_terms(m: float, n: int) -> tuple[float, float]:
    """``(k_+(m), r_+(m))`` extended continuously to the Nariai limit."""
    params = ModelParams(n, m)
    if params.is_degenerate:
        return math.sqrt(n), photon_radius(params)
    return surface_gravity_outer(params), horizon_radii(params)[1]


def _inner_terms(m: float, n: int) -> tuple[float, float]:
    """``(k_-(m), r_-(m))`` extended continuously to the Nariai limit."""
    params = ModelParams(n, m)
    if params.is_degenerate:
        return math.sqrt(n), photon_radius(params)
    return surface_gravity_inner(params), horizon_radii(params)[0]


def _combine(kp: float, r_plus: float, km: float, r_minus: float) -> tuple[float, float, float, str]:
    ambro = 4.0 * math.pi / 3.0 * (kp + km)
    ours = 4.0 * math.pi * (kp * r_plus**2 + km * r_minus**2)
    diff = ambro - ours
    return ambro, ours, diff, classify_difference(diff)


def compare_cell(m_plus: float, m_minus: float, n: int = 3) -> tuple[float, float, float, str]:
    """Right-hand sides of the two-region bounds for connected horizons.

    Returns ``(rhs_ambrozio, rhs_ours, diff, class)`` where
    ``rhs_ambrozio = (4 pi/3)(k_+(m_+) + k_-(m_-))`` and
    ``rhs_ours = 4 pi (k_+(m_+) r_+^2(m_+) + k_-(m_-) r_-^2(m_-))``.
    """
    return _combine(*_outer_terms(m_plus, n), *_inner_terms(m_minus, n))


def compare_grid(resolution: int = 200, m_plus_range: tuple[float, float] | None = None,
                 m_minus_range: tuple[float, float] | None = None, n: int = 3) -> list[tuple]:
    """Rows ``(m_plus, m_minus, rhs_ambrozio, rhs_ours, diff, class)`` on a square grid.

    Ranges default to ``(0, m_max)`` inset by ``m_max / 1000`` at both ends.
    Rows iterate ``m_minus`` fastest.
    """
    if resolution < 2:
        raise DomainError("resolution must be at least 2")
    top = m_max(n)
    default = (top / 1000.0, top - top / 1000.0)
    rp = default if m_plus_range is None else m_plus_range
    rm = default if m_minus_range is None else m_minus_range
    for lo, hi in (rp, rm):
        if not 0.0 < lo <= hi <= top:
            raise DomainError(f"mass range ({lo}, {hi}) must lie in (0, m_max]")
    plus = [(float(m), *_outer_terms(float(m), n)) for m in np.linspace(rp[0], rp[1], resolution)]
    minus = [(float(m), *_inner_terms(float(m), n)) for m in np.linspace(rm[0], rm[1], resolution)]
    return [(mp, mm, *_combine(kp, rpl, km, rmi)) for mp, kp, rpl in plus for mm, km, rmi in minus]


# ------------------------------------------------------------ uniqueness


class UniquenessVerdict(str, Enum):
    SCHWARZSCHILD_DE_SITTER = "SchwarzschildDeSitter"
    NARIAI = "Nariai"
    INCONSISTENT = "Inconsistent"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class UniquenessResult:
    verdict: UniquenessVerdict
    m_plus: float
    m_minus: float


def uniqueness_check(region_plus: RegionInput, region_minus: RegionInput,
                     mass_tol: float = MASS_TOL) -> UniquenessResult:
    """Necessary numerical conditions for the two-sided uniqueness statement.

    Verdicts: matching masses below ``m_max`` with a connected outer boundary
    give ``SchwarzschildDeSitter``; both at ``m_max`` give ``Nariai``;
    ``m_- > m_+`` contradicts the ordering of the virtual masses and gives
    ``Inconsistent``. Everything else is ``Inconclusive``. ``mass_tol`` is
    relative to ``m_max``.
    """
    if region_plus.n != 3 or region_minus.n != 3:
        raise InputError("uniqueness check is stated for n = 3")
    if region_plus.region_kind is RegionKind.INNER:
        raise InputError("the first region must be outer or cylindrical")
    if region_minus.region_kind is RegionKind.OUTER:
        raise InputError("the second region must be inner or cylindrical")
    try:
        m_plus = region_plus.virtual_mass()
    except BelowDeSitterError as exc:
        raise InputError(str(exc)) from None
    m_minus = region_minus.virtual_mass()
    top = m_max(3)
    tol = mass_tol * top
    if m_minus > m_plus + tol:
        verdict = UniquenessVerdict.INCONSISTENT
    elif abs(m_plus - m_minus) <= tol and len(region_plus.horizons) == 1:
        if abs(m_plus - top) <= tol:
            verdict = UniquenessVerdict.NARIAI
        else:
            verdict = UniquenessVerdict.SCHWARZSCHILD_DE_SITTER
    else:
        verdict = UniquenessVerdict.INCONCLUSIVE
    return UniquenessResult(verdict, m_plus, m_minus)


# ------------------------------------------------------------ aggregation


def evaluate_region(region: RegionInput, sharp_tol: float = SHARP_TOL) -> BoundsReport:
    """Every applicable region bound, assuming round Einstein fibers.

    Ambrozio's inequality is global (it needs every horizon of the solution)
    and is evaluated separately by :func:`ambrozio_bound`.
    """
    report = BoundsReport()
    n = region.n
    if n == 3:
        report.append(area_bound_3d(region, sharp_tol=sharp_tol))
        report.append(weighted_balance_3d(region, sharp_tol=sharp_tol))
    report.append(scalar_curvature_bound(region, fiber_einstein_constant=float(n - 2), sharp_tol=sharp_tol))
    if region.sigma_area is not None:
        report.append(lower_bound(region, sharp_tol=sharp_tol))
        if n == 3:
            try:
                m = region.virtual_mass()
            except BelowDeSitterError:
                report.append(_positive_mass_entry("sigma_bound", region.sigma_area))
            else:
                report.append(sigma_bound_3d(region.sigma_area, m, sharp_tol))
    return report


def horizons_from_csv(source) -> list[tuple[float, float]]:
    """Read a ``kappa,area`` table."""
    from .csvio import read_table

    rows = read_table(source, HORIZONS_HEADER)
    if not rows:
        raise InputError("horizon table has no rows", 2)
    return [(r[0], r[1]) for r in rows]
