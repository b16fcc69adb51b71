"""Sampled warped-product static triples.

A profile describes ``g_0 = g_cc dc^2 + b(c)^2 g_E`` with potential ``u(c)``
over a one-dimensional coordinate ``c``. Two charts are supported:

``area``
    ``c`` is the area radius and the warping function is stored in ``warp``
    (``b = c`` on the round models). The radial metric coefficient is
    ``1/u^2`` (static gauge), so proper distance satisfies ``ds = dc / u``.
``proper``
    ``c`` is the signed proper distance, ``g_cc = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .csvio import read_table, render_table
from .errors import DomainError, InputError, ResolutionError

__all__ = [
    "Chart",
    "WarpedProfile",
    "MIN_SAMPLES",
    "PROFILE_HEADER",
    "sphere_area",
    "profile_to_csv",
    "profile_from_csv",
]

MIN_SAMPLES = 16
PROFILE_HEADER = ("coord", "u", "warp")


class Chart(str, Enum):
    AREA_RADIUS = "area"
    PROPER_DISTANCE = "proper"

    @classmethod
    def parse(cls, value) -> "Chart":
        if isinstance(value, Chart):
            return value
        key = str(value).strip().lower().replace("_", "").replace("-", "")
        aliases = {"area": cls.AREA_RADIUS, "arearadius": cls.AREA_RADIUS,
                   "proper": cls.PROPER_DISTANCE, "properdistance": cls.PROPER_DISTANCE}
        if key not in aliases:
            raise DomainError(f"unknown chart {value!r}; use 'area' or 'proper'")
        return aliases[key]


def sphere_area(n: int) -> float:
    """Area of the unit round ``(n-1)``-sphere, ``2 pi^(n/2) / Gamma(n/2)``."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


@dataclass(frozen=True, eq=False)
class WarpedProfile:
    """Samples of a warped-product triple on a strictly increasing grid.

    ``fiber_einstein_constant`` defaults to ``n - 2`` (unit round fibers) and
    ``fiber_area_normalization`` to the unit-sphere area.
    """

    n: int
    chart: Chart
    coord: np.ndarray
    u: np.ndarray
    warp: np.ndarray
    fiber_einstein_constant: float | None = None
    fiber_area_normalization: float | None = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        n = int(self.n)
        if n != self.n or n < 3:
            raise DomainError(f"dimension must be an integer >= 3, got {self.n!r}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "chart", Chart.parse(self.chart))
        arrays = {}
        for name in ("coord", "u", "warp"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            if arr.ndim != 1:
                raise InputError(f"{name} must be one-dimensional")
            if not np.all(np.isfinite(arr)):
                raise InputError(f"{name} contains non-finite values")
            arrays[name] = arr
        size = arrays["coord"].size
        if any(a.size != size for a in arrays.values()):
            raise InputError("coord, u and warp must have equal length")
        if size < MIN_SAMPLES:
            raise ResolutionError(f"profile has {size} samples; at least {MIN_SAMPLES} are required")
        if np.any(np.diff(arrays["coord"]) <= 0):
            raise InputError("coordinate grid must be strictly increasing")
        u = arrays["u"]
        if np.any(u < 0):
            raise InputError("potential must be nonnegative")
        if np.any(u[1:-1] == 0):
            raise InputError("potential vanishes at an interior sample")
        if np.any(arrays["warp"][1:-1] <= 0):
            raise InputError("warping function must be positive in the interior")
        for name, arr in arrays.items():
            object.__setattr__(self, name, arr)
        if self.fiber_einstein_constant is None:
            object.__setattr__(self, "fiber_einstein_constant", float(n - 2))
        if self.fiber_area_normalization is None:
            object.__setattr__(self, "fiber_area_normalization", sphere_area(n))
        if not self.fiber_area_normalization > 0:
            raise InputError("fiber area normalization must be positive")

    def __len__(self) -> int:
        return int(self.coord.size)

    @property
    def horizon_ends(self) -> tuple[bool, bool]:
        """Which endpoints are horizons (``u = 0``)."""
        return bool(self.u[0] == 0.0), bool(self.u[-1] == 0.0)

    def with_u(self, u: np.ndarray) -> "WarpedProfile":
        """Copy with a replaced potential column."""
        return WarpedProfile(self.n, self.chart, self.coord, u, self.warp,
                             self.fiber_einstein_constant, self.fiber_area_normalization, self.label)


def profile_to_csv(profile: WarpedProfile) -> str:
    """Render the ``coord,u,warp`` table."""
    return render_table(PROFILE_HEADER, zip(profile.coord, profile.u, profile.warp))


def profile_from_csv(source, n: int, chart, *, fiber_einstein_constant=None,
                     fiber_area_normalization=None) -> WarpedProfile:
    """Load a ``coord,u,warp`` table. Chart and dimension are not stored in the file."""
    rows = read_table(source, PROFILE_HEADER)
    if len(rows) < MIN_SAMPLES:
        raise ResolutionError(
            f"profile has {len(rows)} samples; at least {MIN_SAMPLES} are required",
            line=len(rows) + 1,
        )
    data = np.asarray(rows, dtype=float)
    return WarpedProfile(n, chart, data[:, 0], data[:, 1], data[:, 2],
                         fiber_einstein_constant, fiber_area_normalization)
