"""Closed-form model triples, their horizons, Σ-geometry and sampled exports.

Models
------
de Sitter
    ``g_0 = dr^2/(1 - r^2) + r^2 g_S``, ``u = sqrt(1 - r^2)`` on ``r in [0, 1]``.
Schwarzschild-de Sitter
    ``g_0 = dr^2/f + r^2 g_E``, ``u = sqrt(f)``, ``f = 1 - r^2 - 2m r^(2-n)`` on
    ``[r_-, r_+]``.
Nariai
    ``g_0 = (dr^2 + (n-2) g_E)/n``, ``u = sin r`` on ``r in [0, pi]``.

The generalized kinds replace the round sphere by an Einstein fiber with
``Ric = (n-2) g_E`` and a user-supplied fiber area.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, QuadratureError
from .profiles import Chart, WarpedProfile, MIN_SAMPLES, sphere_area
from .scalar_solvers import (
    DEFAULT_TOL,
    KAPPA_TIE_TOL,
    ModelParams,
    ToleranceConfig,
    df_m,
    f_m,
    f_m_near_root,
    horizon_radii,
    photon_radius,
    singular_integral,
    substitution_integral,
    surface_gravity_inner,
    surface_gravity_outer,
    u_max,
)

__all__ = [
    "ModelKind",
    "HorizonLabel",
    "ModelTriple",
    "HorizonRecord",
    "build_model",
    "classify_kappa",
    "horizons",
    "sigma_geometry",
    "proper_distance_to_horizons",
    "export_profile",
]


class ModelKind(str, Enum):
    DE_SITTER = "desitter"
    SCHWARZSCHILD_DE_SITTER = "sds"
    NARIAI = "nariai"
    GENERALIZED_SDS = "gen-sds"
    GENERALIZED_NARIAI = "gen-nariai"

    @classmethod
    def parse(cls, value) -> "ModelKind":
        if isinstance(value, ModelKind):
            return value
        key = str(value).strip().lower()
        for kind in cls:
            if key in (kind.value, kind.name.lower()):
                return kind
        raise DomainError(f"unknown model kind {value!r}")

    @property
    def is_cylindrical(self) -> bool:
        return self in (ModelKind.NARIAI, ModelKind.GENERALIZED_NARIAI)

    @property
    def is_generalized(self) -> bool:
        return self in (ModelKind.GENERALIZED_SDS, ModelKind.GENERALIZED_NARIAI)


class HorizonLabel(str, Enum):
    COSMOLOGICAL = "Cosmological"
    BLACK_HOLE = "BlackHole"
    CYLINDRICAL = "Cylindrical"


def classify_kappa(kappa: float, n: int, tie_tol: float = KAPPA_TIE_TOL) -> HorizonLabel:
    """Horizon type from its normalized surface gravity, with a tie band at ``sqrt(n)``."""
    root_n = math.sqrt(n)
    if abs(kappa - root_n) <= tie_tol:
        return HorizonLabel.CYLINDRICAL
    return HorizonLabel.COSMOLOGICAL if kappa < root_n else HorizonLabel.BLACK_HOLE


@dataclass(frozen=True)
class HorizonRecord:
    """One boundary component of a model.

    ``area`` is absolute for ``n = 3`` and the ratio to the fiber area
    normalization otherwise.
    """

    label: HorizonLabel
    radius: float
    kappa: float
    area: float


@dataclass(frozen=True)
class ModelTriple:
    """A model static triple with closed-form evaluators.

    The coordinate ``r`` is the area radius for the de Sitter and
    Schwarzschild-de Sitter kinds and the angle in ``[0, pi]`` for Nariai kinds.
    """

    kind: ModelKind
    params: ModelParams
    fiber_einstein_constant: float
    fiber_area_normalization: float

    @property
    def n(self) -> int:
        return self.params.n

    def domain(self, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[float, float]:
        if self.kind.is_cylindrical:
            return 0.0, math.pi
        if self.kind is ModelKind.DE_SITTER:
            return 0.0, 1.0
        return horizon_radii(self.params, tol)

    def f(self, r):
        """Squared potential as a function of the model coordinate."""
        if self.kind.is_cylindrical:
            return np.sin(r) ** 2
        return f_m(self.params, np.asarray(r, dtype=float))

    def u(self, r):
        if self.kind.is_cylindrical:
            return np.sin(r)
        return np.sqrt(np.maximum(self.f(r), 0.0))

    def du_norm(self, r):
        """``|Du|``: ``|f'|/2`` for round models, ``sqrt(n) |cos r|`` for Nariai."""
        if self.kind.is_cylindrical:
            return math.sqrt(self.n) * np.abs(np.cos(r))
        return 0.5 * np.abs(df_m(self.params, np.asarray(r, dtype=float)))

    def warp(self, r):
        """Fiber radius ``b``."""
        if self.kind.is_cylindrical:
            return np.full_like(np.asarray(r, dtype=float), math.sqrt((self.n - 2) / self.n))
        return np.asarray(r, dtype=float)

    def area_of_radius(self, radius: float) -> float:
        scale = radius ** (self.n - 1)
        return self.fiber_area_normalization * scale if self.n == 3 else scale


def build_model(kind, params: ModelParams, fiber_area_normalization: float | None = None,
                fiber_einstein_constant: float | None = None) -> ModelTriple:
    """Construct a model triple after checking kind/mass consistency.

    Raises
    ------
    DomainError
        de Sitter needs ``m = 0``, Nariai kinds need ``m = m_max``,
        Schwarzschild-de Sitter kinds need ``0 < m < m_max``. Only the
        generalized kinds accept a non-default fiber area, and every kind
        needs fiber Einstein constant ``n - 2``.
    """
    kind = ModelKind.parse(kind)
    n = params.n
    if kind is ModelKind.DE_SITTER and params.m != 0.0:
        raise DomainError(f"de Sitter requires m = 0, got {params.m!r}")
    if kind.is_cylindrical and not params.is_degenerate:
        raise DomainError(f"{kind.value} requires m = m_max = {params.m_max!r}, got {params.m!r}")
    if kind in (ModelKind.SCHWARZSCHILD_DE_SITTER, ModelKind.GENERALIZED_SDS) and (
        params.m == 0.0 or params.is_degenerate
    ):
        raise DomainError(f"{kind.value} requires 0 < m < m_max, got {params.m!r}")
    einstein = float(n - 2) if fiber_einstein_constant is None else float(fiber_einstein_constant)
    if einstein != n - 2:
        raise DomainError(f"model fibers must satisfy Ric = (n-2) g; got constant {einstein!r}")
    default_area = sphere_area(n)
    area = default_area if fiber_area_normalization is None else float(fiber_area_normalization)
    if not area > 0:
        raise DomainError("fiber area normalization must be positive")
    if not kind.is_generalized and area != default_area:
        raise DomainError(f"{kind.value} uses round fibers; use a generalized kind for other fibers")
    return ModelTriple(kind, params, einstein, area)


def horizons(triple: ModelTriple, tol: ToleranceConfig = DEFAULT_TOL) -> list[HorizonRecord]:
    """Boundary components with radius, normalized surface gravity and area."""
    n = triple.n
    params = triple.params
    if triple.kind.is_cylindrical:
        radius = math.sqrt((n - 2) / n)
        kappa = math.sqrt(n)
        rec = HorizonRecord(HorizonLabel.CYLINDRICAL, radius, kappa, triple.area_of_radius(radius))
        return [rec, rec]
    if triple.kind is ModelKind.DE_SITTER:
        return [HorizonRecord(HorizonLabel.COSMOLOGICAL, 1.0, 1.0, triple.area_of_radius(1.0))]
    r_minus, r_plus = horizon_radii(params, tol)
    k_plus = surface_gravity_outer(params, tol)
    k_minus = surface_gravity_inner(params, tol)
    return [
        HorizonRecord(classify_kappa(k_plus, n), r_plus, k_plus, triple.area_of_radius(r_plus)),
        HorizonRecord(classify_kappa(k_minus, n), r_minus, k_minus, triple.area_of_radius(r_minus)),
    ]


def sigma_geometry(params: ModelParams) -> dict:
    """Geometry of the maximum set Σ of the three-dimensional model.

    Returns mean curvature ``H``, traceless second fundamental form norm,
    scalar curvature ``R_sigma``, ``ric_nn = Ric(nu, nu)`` and the area.
    """
    if params.n != 3:
        raise DomainError("Σ-geometry closed forms are implemented for n = 3")
    if params.m == 0.0:
        raise DomainError("de Sitter has no separating hypersurface Σ (MAX(u) is a point)")
    if params.is_degenerate:
        return {"H": 0.0, "h_traceless_norm": 0.0, "R_sigma": 6.0, "ric_nn": 0.0,
                "area": 4.0 * math.pi / 3.0}
    m23 = params.m ** (-2.0 / 3.0)
    r0 = photon_radius(params)
    return {
        "H": 2.0 * math.sqrt(m23 - 3.0),
        "h_traceless_norm": 0.0,
        "R_sigma": 2.0 * m23,
        "ric_nn": 0.0,
        "area": 4.0 * math.pi * r0 * r0,
    }


# ------------------------------------------------------------------ exports


def _split_grid(a: float, mid: float, b: float, count: int) -> np.ndarray:
    """``count`` points on ``[a, b]``, uniform on each side of an interior node ``mid``."""
    segments = count - 1
    left = int(round(segments * (mid - a) / (b - a)))
    left = min(max(left, 2), segments - 2)
    grid = np.concatenate([np.linspace(a, mid, left + 1), np.linspace(mid, b, segments - left + 1)[1:]])
    grid[left] = mid
    return grid


def proper_distance_to_horizons(params: ModelParams, tol: float = 1e-12) -> tuple[float, float]:
    """Signed proper distances from Σ to the inner and outer horizons.

    Both integrals ``int dr / sqrt(f)`` have an inverse-square-root endpoint
    and are computed twice, by tanh-sinh and by the square-root substitution.

    Raises
    ------
    QuadratureError
        If the two schemes disagree by more than ``1e-8``.
    """
    r_minus, r_plus = horizon_radii(params)
    r0 = photon_radius(params)

    def outer(t, da, db):
        return 1.0 / np.sqrt(f_m_near_root(params, r_plus, -db))

    def inner(t, da, db):
        return 1.0 / np.sqrt(f_m_near_root(params, r_minus, da))

    results = []
    for fn, lo, hi, end in ((inner, r_minus, r0, "a"), (outer, r0, r_plus, "b")):
        a = singular_integral(fn, lo, hi, tol, offsets=True)
        b = substitution_integral(fn, lo, hi, end, tol, offsets=True)
        if abs(a - b) > 1e-8:
            raise QuadratureError("proper-distance schemes disagree", 0, (a, b))
        results.append(a)
    return -results[0], results[1]


RK4_STEP = 5e-5


def _rk4_march(params: ModelParams, rho0: float, v0: float, grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Integrate ``rho'' = f'(rho)/2`` through ``grid`` with fixed RK4 substeps.

    Every grid node is hit exactly, so the samples carry no dense-output
    interpolation noise and finite differences of them stay smooth.
    """
    rho = np.empty_like(grid)
    vel = np.empty_like(grid)
    rho[0], vel[0] = rho0, v0
    y, v = rho0, v0
    for i in range(1, grid.size):
        span = grid[i] - grid[i - 1]
        steps = max(1, math.ceil(abs(span) / RK4_STEP))
        h = span / steps
        for _ in range(steps):
            k1y, k1v = v, 0.5 * df_m(params, y)
            k2y, k2v = v + 0.5 * h * k1v, 0.5 * df_m(params, y + 0.5 * h * k1y)
            k3y, k3v = v + 0.5 * h * k2v, 0.5 * df_m(params, y + 0.5 * h * k2y)
            k4y, k4v = v + h * k3v, 0.5 * df_m(params, y + h * k3y)
            y += h * (k1y + 2 * k2y + 2 * k3y + k4y) / 6.0
            v += h * (k1v + 2 * k2v + 2 * k3v + k4v) / 6.0
        rho[i], vel[i] = y, v
    return rho, vel


def _sds_proper_profile(triple: ModelTriple, count: int) -> WarpedProfile:
    params = triple.params
    r0 = photon_radius(params)
    umax = u_max(params)
    s_minus, s_plus = proper_distance_to_horizons(params)
    grid = _split_grid(s_minus, 0.0, s_plus, count)

    left = _rk4_march(params, r0, umax, grid[grid <= 0][::-1])
    right = _rk4_march(params, r0, umax, grid[grid >= 0])
    radius = np.concatenate([left[0][::-1], right[0][1:]])
    u = np.abs(np.concatenate([left[1][::-1], right[1][1:]]))
    idx = int(np.argmin(np.abs(grid)))
    radius[idx], u[idx] = r0, umax
    radius[0], radius[-1] = horizon_radii(params)
    u[0] = u[-1] = 0.0
    u = np.maximum(u, 0.0)
    return WarpedProfile(triple.n, Chart.PROPER_DISTANCE, grid - grid[0], u, radius,
                         triple.fiber_einstein_constant, triple.fiber_area_normalization,
                         label=triple.kind.value)


def export_profile(triple: ModelTriple, sample_count: int, chart=None) -> WarpedProfile:
    """Sample a model on a strictly increasing grid.

    The default chart is the area radius, except for Nariai kinds which only
    support proper distance. Whenever Σ lies inside the domain it is a grid
    node. Proper-distance coordinates start at 0 on the first horizon.
    """
    if sample_count < MIN_SAMPLES:
        raise DomainError(f"sample_count must be >= {MIN_SAMPLES}")
    n = triple.n
    kind = triple.kind
    if chart is None:
        chart = Chart.PROPER_DISTANCE if kind.is_cylindrical else Chart.AREA_RADIUS
    chart = Chart.parse(chart)
    extra = dict(fiber_einstein_constant=triple.fiber_einstein_constant,
                 fiber_area_normalization=triple.fiber_area_normalization, label=kind.value)
    if kind.is_cylindrical:
        if chart is not Chart.PROPER_DISTANCE:
            raise DomainError("Nariai profiles exist only in the proper-distance chart (constant warping)")
        root_n = math.sqrt(n)
        length = math.pi / root_n
        s = _split_grid(0.0, 0.5 * length, length, sample_count)
        u = np.sin(root_n * s)
        u[0] = u[-1] = 0.0
        u[int(np.argmin(np.abs(s - 0.5 * length)))] = 1.0
        warp = np.full_like(s, math.sqrt((n - 2) / n))
        return WarpedProfile(n, chart, s, u, warp, **extra)
    if kind is ModelKind.DE_SITTER:
        if chart is Chart.AREA_RADIUS:
            r = np.linspace(0.0, 1.0, sample_count)
            u = np.sqrt((1.0 - r) * (1.0 + r))
            u[-1] = 0.0
            return WarpedProfile(n, chart, r, u, r.copy(), **extra)
        s = np.linspace(0.0, 0.5 * math.pi, sample_count)
        u, b = np.cos(s), np.sin(s)
        u[-1], b[-1] = 0.0, 1.0
        return WarpedProfile(n, chart, s, u, b, **extra)
    if chart is Chart.PROPER_DISTANCE:
        return _sds_proper_profile(triple, sample_count)
    params = triple.params
    r_minus, r_plus = horizon_radii(params)
    r0 = photon_radius(params)
    r = _split_grid(r_minus, r0, r_plus, sample_count)
    u = np.empty_like(r)
    # expand about the nearer horizon so u stays accurate close to it
    near_inner = r < r0
    u[near_inner] = np.sqrt(np.maximum(f_m_near_root(params, r_minus, r[near_inner] - r_minus), 0.0))
    u[~near_inner] = np.sqrt(np.maximum(f_m_near_root(params, r_plus, r[~near_inner] - r_plus), 0.0))
    u[0] = u[-1] = 0.0
    u[int(np.argmin(np.abs(r - r0)))] = u_max(params)
    return WarpedProfile(n, chart, r, u, r.copy(), **extra)
