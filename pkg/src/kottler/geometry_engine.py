"""Finite-difference verification of the static and conformal identities.

A profile ``g_0 = ds^2 + b(s)^2 g_E`` with fiber ``Ric_E = k g_E`` reduces every
curvature quantity to ``b`` and its derivatives:

    Ric(ds, ds)       = -(n-1) b''/b
    Ric(e, e)         = -b''/b + (k - (n-2) b'^2)/b^2     (unit fiber vector e)
    R                 = -2(n-1) b''/b + (n-1)(k - (n-2) b'^2)/b^2
    D^2u(ds, ds)      = u'',  D^2u(e, e) = (b'/b) u'
    Δu                = u'' + (n-1)(b'/b) u'

Area-radius profiles are converted with ``d/ds = u d/dr`` (static gauge
``g_rr = 1/u^2``). Since ``V = u^2`` is smooth up to the horizons there, the
conversion is written in terms of ``V``:

    u' = V_r/2,  u'' = u V_rr/2,  u''' = V_r V_rr/4 + V V_rrr/2,
    b' = u b_r,  b'' = V_r b_r/2 + V b_rr.

The conformal metric ``g = g_0/Ψ^2`` is again a warped product in
``dσ = ds/Ψ`` with warping ``B = b/Ψ``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DomainError, ResolutionError
from .model_solutions import sigma_geometry
from .profiles import Chart, WarpedProfile
from .pseudo_radial import (
    Branch,
    PseudoRadialBranch,
    grad_phi_norm,
    phi_of_u,
    psi_derivatives,
    psi_of_u,
)
from .scalar_solvers import (
    ModelParams,
    f_m_near_root,
    horizon_radii,
    photon_radius,
    singular_integral,
    u_max,
    virtual_mass,
)

__all__ = [
    "IdentityReport",
    "MeanCurvaturePair",
    "fd_weights",
    "derivatives",
    "static_residuals",
    "conformal_identity_residuals",
    "conformal_scalar_curvature",
    "expansion_check",
    "lojasiewicz_limit",
    "flux_values",
    "phi_flux",
    "mean_curvature_pair",
    "sigma_geometry_fd",
    "horizon_gradient_expansion",
    "infer_branch",
    "DEFAULT_IDENTITY_TOL",
    "ENDPOINT_MARGIN",
]

DEFAULT_IDENTITY_TOL = 1e-6
#: Fraction of the domain excluded at each end when checking identities.
ENDPOINT_MARGIN = 0.025
STENCIL_WIDTH = 7
STENCIL_WIDTHS = {1: 7, 2: 7, 3: 9}
#: Minimum stencil spacing per derivative order, as a fraction of the domain.
STRIDE_FRACTIONS = {1: 2e-3, 2: 2e-3, 3: 4e-3}


@dataclass(frozen=True)
class IdentityReport:
    """Outcome of one identity check on interior samples."""

    identity: str
    max_residual: float
    location: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        out = asdict(self)
        if not out["details"]:
            out.pop("details")
        return out


def _report(name: str, residual: np.ndarray, coord: np.ndarray, tol: float, **details) -> IdentityReport:
    residual = np.abs(np.asarray(residual, dtype=float))
    if residual.size == 0:
        raise ResolutionError(f"no interior samples left for {name}")
    if not np.all(np.isfinite(residual)):
        i = int(np.argmax(~np.isfinite(residual)))
        return IdentityReport(name, math.inf, float(coord[i]), tol, False, details)
    i = int(np.argmax(residual))
    worst = float(residual[i])
    return IdentityReport(name, worst, float(coord[i]), tol, worst <= tol, details)


# ------------------------------------------------------- finite differences


def fd_weights(z, x, m: int) -> np.ndarray:
    """Fornberg weights for derivatives ``0..m`` at ``z`` from nodes ``x``.

    ``z`` may be an array of shape ``(N,)`` with ``x`` of shape ``(N, w)``;
    the result then has shape ``(N, m + 1, w)``. For scalar ``z`` and nodes of
    shape ``(w,)`` it has shape ``(m + 1, w)``.
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=float))
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = np.broadcast_to(x, (z.size, x.size))
    npts = x.shape[1]
    c = np.zeros((z.size, npts, m + 1))
    c1 = np.ones(z.size)
    c4 = x[:, 0] - z
    c[:, 0, 0] = 1.0
    for i in range(1, npts):
        mn = min(i, m)
        c2 = np.ones(z.size)
        c5, c4 = c4, x[:, i] - z
        for j in range(i):
            c3 = x[:, i] - x[:, j]
            c2 = c2 * c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[:, i, k] = c1 * (k * c[:, i - 1, k - 1] - c5 * c[:, i - 1, k]) / c2
                c[:, i, 0] = -c1 * c5 * c[:, i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[:, j, k] = (c4 * c[:, j, k] - k * c[:, j, k - 1]) / c3
            c[:, j, 0] = c4 * c[:, j, 0] / c3
        c1 = c2
    out = np.swapaxes(c, 1, 2)
    return out[0] if scalar else out


def _stencil_matrix(x: np.ndarray, order: int, width: int, stride: int) -> tuple[np.ndarray, np.ndarray]:
    """Index windows and weights for the ``order``-th derivative at every node."""
    size = x.size
    span = (width - 1) * stride
    if size <= span:
        raise ResolutionError(
            f"profile with {size} samples cannot hold a {width}-point stencil at stride {stride}"
        )
    start = np.clip(np.arange(size) - span // 2, 0, size - 1 - span)
    idx = start[:, None] + stride * np.arange(width)[None, :]
    wts = fd_weights(x, x[idx], order)[:, order, :]
    return idx, wts


def derivatives(values: np.ndarray, x: np.ndarray, max_order: int = 3, width: int | dict | None = None,
                stride: int | dict | None = None) -> list[np.ndarray]:
    """Derivatives ``1..max_order`` of sampled values by Fornberg stencils.

    Interior nodes use centered windows; windows are shifted near the ends.
    ``stride`` spaces the stencil nodes. It may be a dict keyed by derivative
    order; by default third derivatives use a wider stride on fine grids to
    keep rounding error (which grows like ``eps / h^3``) below truncation.
    """
    values = np.asarray(values, dtype=float)
    x = np.asarray(x, dtype=float)
    if values.size < 5:
        raise ResolutionError("fewer than 5 samples in a stencil window")
    out = []
    for order in range(1, max_order + 1):
        if isinstance(stride, dict):
            st = stride.get(order, 1)
        elif stride is None:
            st = _default_stride(x, order)
        else:
            st = int(stride)
        if width is None:
            wd = STENCIL_WIDTHS[order] if order in STENCIL_WIDTHS else STENCIL_WIDTH
        elif isinstance(width, dict):
            wd = width.get(order, STENCIL_WIDTH)
        else:
            wd = int(width)
        idx, wts = _stencil_matrix(x, order, wd, st)
        out.append(np.sum(wts * values[idx], axis=1))
    return out


def _default_stride(x: np.ndarray, order: int) -> int:
    """Stencil spacing that keeps rounding (``~ eps / h^order``) below truncation.

    On coarse grids this is 1; on fine grids the stencil nodes are spread to a
    fixed fraction of the domain.
    """
    length = x[-1] - x[0]
    h = length / (x.size - 1)
    return max(1, int(round(STRIDE_FRACTIONS.get(order, 0.0) * length / h)))


@dataclass
class _ProperView:
    """Proper-distance derivatives of ``u`` and ``b`` at every sample."""

    coord: np.ndarray
    u: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    u3: np.ndarray
    b: np.ndarray
    b1: np.ndarray
    b2: np.ndarray


def _proper_view(profile: WarpedProfile, stride=None) -> _ProperView:
    x = profile.coord
    u = profile.u
    b = profile.warp
    if profile.chart is Chart.PROPER_DISTANCE:
        u1, u2, u3 = derivatives(u, x, 3, stride=stride)
        b1, b2 = derivatives(b, x, 2, stride=stride)
        return _ProperView(x, u, u1, u2, u3, b, b1, b2)
    V = u * u
    V1, V2, V3 = derivatives(V, x, 3, stride=stride)
    br1, br2 = derivatives(b, x, 2, stride=stride)
    return _ProperView(
        coord=x,
        u=u,
        u1=0.5 * V1,
        u2=0.5 * u * V2,
        u3=0.25 * V1 * V2 + 0.5 * V * V3,
        b=b,
        b1=u * br1,
        b2=0.5 * V1 * br1 + V * br2,
    )


def _interior_mask(coord: np.ndarray, lo: int = 0, hi: int | None = None,
                   margin: float = ENDPOINT_MARGIN) -> np.ndarray:
    hi = coord.size - 1 if hi is None else hi
    a, b = coord[lo], coord[hi]
    pad = margin * (b - a)
    mask = np.zeros(coord.size, dtype=bool)
    mask[lo : hi + 1] = True
    return mask & (coord >= a + pad) & (coord <= b - pad)


def _max_index(profile: WarpedProfile) -> int:
    return int(np.argmax(profile.u))


# ----------------------------------------------------------- static system


def static_residuals(profile: WarpedProfile, tol: float = DEFAULT_IDENTITY_TOL,
                     margin: float = ENDPOINT_MARGIN, stride=None) -> list[IdentityReport]:
    """Residuals of ``u Ric = D^2u + n u g_0`` and ``Δu = -n u``.

    Returns four reports: the radial and tangential components of the first
    equation, the Laplacian equation, and ``|R - n(n-1)|``.
    """
    n = profile.n
    k = profile.fiber_einstein_constant
    pv = _proper_view(profile, stride)
    mask = _interior_mask(pv.coord, margin=margin)
    u, u1, u2 = pv.u[mask], pv.u1[mask], pv.u2[mask]
    b, b1, b2 = pv.b[mask], pv.b1[mask], pv.b2[mask]
    x = pv.coord[mask]
    ric_ss = -(n - 1) * b2 / b
    ric_tt = -b2 / b + (k - (n - 2) * b1 * b1) / (b * b)
    scalar = -2.0 * (n - 1) * b2 / b + (n - 1) * (k - (n - 2) * b1 * b1) / (b * b)
    return [
        _report("static_radial", u * ric_ss - u2 - n * u, x, tol),
        _report("static_tangential", u * ric_tt - (b1 / b) * u1 - n * u, x, tol),
        _report("laplacian", u2 + (n - 1) * (b1 / b) * u1 + n * u, x, tol),
        _report("scalar_curvature", scalar - n * (n - 1), x, tol),
    ]


# ------------------------------------------------------ conformal system


def _region_bounds(profile: WarpedProfile, branch: PseudoRadialBranch) -> tuple[int, int]:
    """Sample range of the region the branch describes.

    Profiles run from the inner side to the outer side, so the outer region is
    the part after the maximum of ``u``.
    """
    imax = _max_index(profile)
    last = len(profile) - 1
    outer = branch.branch is Branch.OUTER or (branch.branch is Branch.CYLINDRICAL and branch.side == "outer")
    lo, hi = (imax, last) if outer else (0, imax)
    if hi - lo < 8:
        raise DomainError(f"profile has no {branch.branch.value} region with enough samples")
    return lo, hi


def _phi_u_derivatives(branch: PseudoRadialBranch, u: np.ndarray):
    """``dφ/du`` up to third order together with ψ, ψ', ψ''."""
    n = branch.n
    if branch.branch is Branch.CYLINDRICAL:
        sign = 1.0 if branch.side == "outer" else -1.0
        c = sign / math.sqrt(n - 2)
        one = (1.0 - u) * (1.0 + u)
        d1 = c / np.sqrt(one)
        d2 = c * u / one**1.5
        d3 = c * (1.0 + 2.0 * u * u) / one**2.5
        psi = np.full_like(u, branch.r0)
        zero = np.zeros_like(u)
        return d1, d2, d3, psi, zero, zero
    psi = psi_of_u(branch, u)
    p1, p2 = psi_derivatives(branch, u)
    r0n = (n - 2) * branch.params.m
    Q = psi * psi - r0n * psi ** (2 - n)
    Q1 = 2.0 * psi + (n - 2) * r0n * psi ** (1 - n)
    Q2 = 2.0 - (n - 1) * (n - 2) * r0n * psi ** (-n)
    d1 = 1.0 / Q
    d2 = -Q1 * p1 / Q**2
    d3 = -(Q2 * p1 * p1 + Q1 * p2) / Q**2 + 2.0 * Q1 * Q1 * p1 * p1 / Q**3
    return d1, d2, d3, psi, p1, p2


def _conformal_fields(profile: WarpedProfile, branch: PseudoRadialBranch, margin: float, stride=None):
    n = profile.n
    k = profile.fiber_einstein_constant
    lo, hi = _region_bounds(profile, branch)
    pv = _proper_view(profile, stride)
    mask = _interior_mask(pv.coord, lo, hi, margin)
    u, u1, u2, u3 = pv.u[mask], pv.u1[mask], pv.u2[mask], pv.u3[mask]
    b, b1, b2 = pv.b[mask], pv.b1[mask], pv.b2[mask]
    d1, d2, d3, psi, p1, p2 = _phi_u_derivatives(branch, u)

    f1 = d1 * u1
    f2 = d2 * u1 * u1 + d1 * u2
    f3 = d3 * u1**3 + 3.0 * d2 * u1 * u2 + d1 * u3
    P, P1, P2 = psi, p1 * u1, p2 * u1 * u1 + p1 * u2

    g1 = P * f1
    g2 = P * P * f2 + P * P1 * f1
    g3 = P * (3.0 * P * P1 * f2 + P * P * f3 + (P1 * P1 + P * P2) * f1)
    lb = b1 / b - P1 / P
    lbb = b2 / b - 2.0 * (b1 / b) * (P1 / P) - P2 / P + 2.0 * (P1 / P) ** 2
    Bs_B = P * lb
    Bss_B = P * P * lbb + P * P1 * lb

    q = g1 * g1
    q1 = 2.0 * g1 * g2
    q2 = 2.0 * g2 * g2 + 2.0 * g1 * g3
    lap_phi = g2 + (n - 1) * Bs_B * g1
    lap_q = q2 + (n - 1) * Bs_B * q1
    hess2 = g2 * g2 + (n - 1) * (Bs_B * g1) ** 2
    R_g = -2.0 * (n - 1) * Bss_B + (n - 1) * (k * P * P / (b * b) - (n - 2) * Bs_B**2)
    return dict(x=pv.coord[mask], u=u, psi=psi, psidot=p1, q=q, q1=q1, g1=g1,
                lap_phi=lap_phi, lap_q=lap_q, hess2=hess2, R_g=R_g)


def conformal_identity_residuals(profile: WarpedProfile, branch: PseudoRadialBranch,
                                 tol: float = DEFAULT_IDENTITY_TOL, margin: float = ENDPOINT_MARGIN,
                                 stride=None) -> list[IdentityReport]:
    """Residuals of the conformal system for ``g = g_0/Ψ^2`` and φ.

    Three reports on the branch's region: the equation for ``Δ_g φ``, the
    trace identity linking ``R_g`` to ``1 - |∇φ|_g^2``, and the Bochner
    identity for ``Δ_g |∇φ|_g^2``.
    """
    n = profile.n
    F = _conformal_fields(profile, branch, margin, stride)
    x, u, psi, pd, q = F["x"], F["u"], F["psi"], F["psidot"], F["q"]
    lap_phi, lap_q, hess2, R_g = F["lap_phi"], F["lap_q"], F["hess2"], F["R_g"]
    flux_term = F["q1"] * F["g1"]
    if branch.branch is Branch.CYLINDRICAL:
        t = math.sqrt(n - 2) * np.atleast_1d(phi_of_u(branch, u))
        tan = np.tan(t)
        r_lap = lap_phi + math.sqrt(n - 2) * tan * (1.0 - q)
        r_trace = R_g - (n - 1) * (n - 2)
        r_boch = (lap_q - math.sqrt(n - 2) * ((1.0 + 2.0 * tan**2) / tan) * flux_term
                  - (2.0 * hess2 - 2.0 * (n - 2) * tan**2 * q * (1.0 - q)))
    else:
        r_lap = lap_phi - n * psi * pd * (1.0 - q)
        r_trace = R_g / ((n - 1) * (n - 2)) - (
            1.0 - (1.0 + (2.0 * n * u * psi * pd - n * psi * psi) / (n - 2)) * (1.0 - q)
        )
        r_boch = lap_q - (
            2.0 * hess2
            - ((n - 2) * u + psi / pd + 2.0 * n * psi * pd) * flux_term
            - 2.0 * ((n + 1) * u + n * psi * pd) * q * lap_phi
        )
    return [
        _report("conformal_laplacian", r_lap, x, tol),
        _report("trace_identity", r_trace, x, tol),
        _report("bochner_identity", r_boch, x, tol),
    ]


def conformal_scalar_curvature(profile: WarpedProfile, branch: PseudoRadialBranch,
                               tol: float = DEFAULT_IDENTITY_TOL, margin: float = ENDPOINT_MARGIN,
                               stride=None) -> IdentityReport:
    """``|R_g - (n-1)(n-2)|`` on the branch's region (constant on models)."""
    n = profile.n
    F = _conformal_fields(profile, branch, margin, stride)
    return _report("conformal_scalar_curvature", F["R_g"] - (n - 1) * (n - 2), F["x"], tol,
                   min=float(np.min(F["R_g"])), max=float(np.max(F["R_g"])))


# ---------------------------------------------------- near-maximum analysis


def _gradient_norm(profile: WarpedProfile) -> np.ndarray:
    """``|Du|`` at every sample (4th-order or better stencils)."""
    if profile.chart is Chart.PROPER_DISTANCE:
        (u1,) = derivatives(profile.u, profile.coord, 1)
        return np.abs(u1)
    (V1,) = derivatives(profile.u**2, profile.coord, 1)
    return 0.5 * np.abs(V1)


def lojasiewicz_limit(profile: WarpedProfile, neighbours: int = 12, degree: int = 3) -> float:
    """Limit of ``|Du|^2 / (u_max - u)`` approaching the maximum of ``u``.

    Samples on both sides of the maximum (one side at a regular centre) are
    fitted by a polynomial in the signed distance-like variable
    ``±sqrt(u_max - u)`` and extrapolated to zero.

    Raises
    ------
    DomainError
        If the maximum sits on a boundary sample that is not a regular centre
        (``warp = 0``).
    """
    imax = _max_index(profile)
    last = len(profile) - 1
    at_end = imax in (0, last)
    if at_end and profile.warp[imax] != 0.0:
        raise DomainError("u attains its maximum on the boundary")
    umax = float(profile.u[imax])
    du = _gradient_norm(profile)
    ys, qs = [], []
    for sign, rng in ((-1.0, range(imax - 1, max(imax - 1 - neighbours, -1), -1)),
                      (1.0, range(imax + 1, min(imax + 1 + neighbours, last + 1)))):
        for j in rng:
            gap = (umax * umax - profile.u[j] ** 2) / (umax + profile.u[j])
            if gap <= 0:
                continue
            ys.append(sign * math.sqrt(gap))
            qs.append(du[j] ** 2 / gap)
    if len(ys) < degree + 2:
        raise ResolutionError("not enough samples near the maximum")
    ys, qs = np.asarray(ys), np.asarray(qs)
    one_sided = np.all(ys > 0) or np.all(ys < 0)
    coeffs = np.polynomial.polynomial.polyfit(ys, qs, degree if not one_sided else max(2, degree - 1))
    return float(coeffs[0])


def _sds_radial_distance(params: ModelParams, rho: float) -> float:
    """Signed proper distance from Σ to the sphere of area radius ``rho``."""
    r_minus, r_plus = horizon_radii(params)
    r0 = photon_radius(params)
    if rho >= r0:
        return singular_integral(lambda t, da, db: 1.0 / np.sqrt(f_m_near_root(params, r_plus, t - r_plus)),
                                 r0, rho, 1e-14, offsets=True)
    return -singular_integral(lambda t, da, db: 1.0 / np.sqrt(f_m_near_root(params, r_minus, t - r_minus)),
                              rho, r0, 1e-14, offsets=True)


def _sds_gap_at(params: ModelParams, x: float) -> float:
    """``u_max - u`` at area radius ``r_0 (1 + x)``, free of cancellation."""
    from .pseudo_radial import _G  # shared closed form

    umax = u_max(params)
    r0 = photon_radius(params)
    target = r0 * r0 * float(_G(np.array([x]), params.n)[0])
    u = math.sqrt(max(umax * umax - target, 0.0))
    return target / (umax + u)


def expansion_check(params: ModelParams, r_window: tuple[float, float] = (1e-3, 1e-1),
                    samples: int = 24, min_slope: float = 4.8, terms: int = 4) -> IdentityReport:
    """Check the near-Σ expansion of ``u`` on the Schwarzschild-de Sitter model.

    Along the radial geodesic through Σ with signed distance ``r``::

        u = u_max [1 - (n/2) r^2 + (n/6) H r^3
                   - (1/24)(2n|h|^2 + n(n+1)/(n-1) H^2 - n^2) r^4 + O(r^5)]

    Exact values come from ``r(rho) = int_{r_0}^{rho} dt/sqrt(f)``. The report's
    residual is ``max |u - series| / r^5`` and it passes when the log-log slope
    of the deviation is at least ``min_slope``. ``terms`` truncates the series
    (2 keeps only the ``r^2`` term) for negative controls.
    """
    n = params.n
    if n != 3:
        raise DomainError("the expansion check is implemented for n = 3")
    if params.m == 0.0 or params.is_degenerate:
        raise DomainError("the expansion check needs 0 < m < m_max")
    sigma = sigma_geometry(params)
    H, h0 = sigma["H"], sigma["h_traceless_norm"]
    umax = u_max(params)
    r0 = photon_radius(params)
    c2 = n / 2.0
    c3 = -(n / 6.0) * H
    c4 = (2 * n * h0 * h0 + n * (n + 1) / (n - 1) * H * H - n * n) / 24.0
    lo, hi = r_window
    rs, devs = [], []
    for side in (1.0, -1.0):
        for target in np.geomspace(lo, hi, samples):
            x = side * target * umax / r0
            r = _sds_radial_distance(params, r0 * (1.0 + x))
            gap = _sds_gap_at(params, x)
            series = c2 * r * r
            if terms >= 3:
                series += c3 * r**3
            if terms >= 4:
                series += c4 * r**4
            rs.append(abs(r))
            devs.append(abs(gap - umax * series))
    rs, devs = np.asarray(rs), np.asarray(devs)
    keep = (rs >= lo * (1 - 1e-12)) & (rs <= hi * (1 + 1e-12)) & (devs > 0)
    slope = float(np.polyfit(np.log(rs[keep]), np.log(devs[keep]), 1)[0])
    scaled = devs[keep] / rs[keep] ** 5
    i = int(np.argmax(scaled))
    coeff, second = _r2_coefficient(params)
    return IdentityReport(
        "expansion_u",
        float(scaled[i]),
        float(rs[keep][i]),
        min_slope,
        slope >= min_slope,
        {"slope": slope, "r2_coefficient": coeff, "second_derivative": second, "terms": terms},
    )


def _r2_coefficient(params: ModelParams, h: float = 2e-3) -> tuple[float, float]:
    """Coefficient of ``r^2`` in ``u(r)`` from a symmetric second difference at Σ.

    Returns ``(coefficient, second derivative)``; Richardson-combined over
    steps ``h`` and ``2h``.
    """
    from .scalar_solvers import bisect

    umax = u_max(params)
    r0 = photon_radius(params)

    def gap_at_distance(r: float) -> float:
        x = bisect(lambda x: _sds_radial_distance(params, r0 * (1.0 + x)) - r,
                   -4.0 * abs(r) / umax / r0 - 1e-300 if r < 0 else 0.0,
                   4.0 * abs(r) / umax / r0 if r > 0 else 0.0)
        return _sds_gap_at(params, x)

    def second_difference(step: float) -> float:
        return -(gap_at_distance(step) + gap_at_distance(-step)) / step**2

    d_h, d_2h = second_difference(h), second_difference(2 * h)
    second = (4.0 * d_h - d_2h) / 3.0
    return 0.5 * second, second


# --------------------------------------------------------------- flux


def flux_values(branch: PseudoRadialBranch, u, du_norm, warp, fiber_area: float) -> np.ndarray:
    """``Φ = |∇φ|_g |{φ = s}|_g`` for a warped profile: ``|∇φ|_g A_E (b/ψ)^(n-1)``."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    grad = np.atleast_1d(grad_phi_norm(branch, u, du_norm))
    psi = np.atleast_1d(psi_of_u(branch, u))
    with np.errstate(divide="ignore", invalid="ignore"):
        return grad * fiber_area * (np.asarray(warp, dtype=float) / psi) ** (branch.n - 1)


def phi_flux(profile: WarpedProfile, branch: PseudoRadialBranch, s_grid, du_norm=None) -> np.ndarray:
    """Φ at the level sets ``{φ = s}`` of the branch's region.

    ``du_norm`` overrides the finite-difference ``|Du|`` samples.

    Raises
    ------
    DomainError
        If a requested level lies outside the range of φ over the region.
    """
    lo, hi = _region_bounds(profile, branch)
    sl = slice(lo, hi + 1)
    du = _gradient_norm(profile) if du_norm is None else np.asarray(du_norm, dtype=float)
    u = profile.u[sl]
    ph = np.atleast_1d(phi_of_u(branch, np.minimum(u, branch.umax)))
    flux = flux_values(branch, np.minimum(u, branch.umax), du[sl], profile.warp[sl],
                       profile.fiber_area_normalization)
    ok = np.isfinite(ph) & np.isfinite(flux)
    ph, flux = ph[ok], flux[ok]
    order = np.argsort(ph)
    ph, flux = ph[order], flux[order]
    s = np.atleast_1d(np.asarray(s_grid, dtype=float))
    slack = 1e-12 * max(1.0, float(np.max(np.abs(ph))))
    if np.any(s < ph[0] - slack) or np.any(s > ph[-1] + slack):
        raise DomainError(f"level outside the φ range [{ph[0]!r}, {ph[-1]!r}] of the region")
    return np.interp(s, ph, flux)


# ------------------------------------------------------ mean curvature


class MeanCurvaturePair(NamedTuple):
    """Mean curvatures of the level fiber in ``g_0`` and in ``g = g_0/Ψ^2``.

    ``H_g`` comes from ``ψ H - (n-1)|ψ'||Du|``; ``H_g_direct`` from finite
    differences of the conformal warping ``b/Ψ``. ``critical`` flags a
    vanishing gradient away from the maximum.
    """

    H: float
    H_g: float
    H_g_direct: float
    critical: bool


def _two_sided_psi(profile: WarpedProfile, params: ModelParams) -> np.ndarray:
    imax = _max_index(profile)
    u = profile.u
    if params.is_degenerate:
        return np.full_like(u, math.sqrt((params.n - 2) / params.n))
    umax = u_max(params)
    outer = PseudoRadialBranch(params, Branch.OUTER)
    psi = np.empty_like(u)
    psi[imax:] = psi_of_u(outer, np.minimum(u[imax:], umax))
    if imax > 0:
        inner = PseudoRadialBranch(params, Branch.INNER)
        psi[:imax] = psi_of_u(inner, np.minimum(u[:imax], umax))
    return psi


def mean_curvature_pair(profile: WarpedProfile, s: float, params: ModelParams | None = None) -> MeanCurvaturePair:
    """Mean curvature of the fiber through the sample nearest to ``s``.

    Orientation: the normal points towards increasing coordinate. ``params``
    defaults to the virtual mass of the outer region.
    """
    n = profile.n
    if params is None:
        params = infer_branch(profile, "outer")[0].params
    pv = _proper_view(profile)
    i = int(np.argmin(np.abs(profile.coord - s)))
    H = (n - 1) * pv.b1[i] / pv.b[i]
    du = _gradient_norm(profile)
    imax = _max_index(profile)
    u = float(profile.u[i])
    if params.is_degenerate:
        Psi = math.sqrt((n - 2) / n)
        return MeanCurvaturePair(H, Psi * H, Psi * H, bool(du[i] == 0 and i != imax and u > 0))
    side = Branch.OUTER if i >= imax else Branch.INNER
    branch = PseudoRadialBranch(params, side)
    uu = min(u, branch.umax)
    psi = float(psi_of_u(branch, uu))
    grad = float(grad_phi_norm(branch, uu, 0.0 if i == imax else du[i]))
    H_g = psi * H - (n - 1) * uu * grad
    psis = _two_sided_psi(profile, params)
    B = profile.warp / psis
    if profile.chart is Chart.PROPER_DISTANCE:
        (B1,) = derivatives(B, profile.coord, 1)
    else:
        (Br,) = derivatives(B, profile.coord, 1)
        B1 = profile.u * Br
    H_direct = (n - 1) * psis[i] * B1[i] / B[i]
    critical = bool(du[i] < 1e-12 and i != imax and u > 0)
    return MeanCurvaturePair(float(H), float(H_g), float(H_direct), critical)


def sigma_geometry_fd(profile: WarpedProfile) -> dict:
    """H, traceless-norm, ``R^Σ`` and ``Ric(ν, ν)`` of the fiber at the maximum of ``u``."""
    n = profile.n
    k = profile.fiber_einstein_constant
    pv = _proper_view(profile)
    i = _max_index(profile)
    b, b1, b2 = pv.b[i], pv.b1[i], pv.b2[i]
    if b <= 0.0:
        raise DomainError("the maximum of u is attained at a point, not on a hypersurface")
    return {
        "H": float((n - 1) * b1 / b),
        "h_traceless_norm": 0.0,
        "R_sigma": float((n - 1) * k / (b * b)),
        "ric_nn": float(-(n - 1) * b2 / b),
        "location": float(profile.coord[i]),
    }


def horizon_gradient_expansion(profile: WarpedProfile, end: str = "last", window: float = 0.05) -> dict:
    """Fit ``|Du|^2 = W0 (1 + c s^2 + O(s^3))`` near a horizon of a proper-distance profile.

    Returns the measured ``c`` and the prediction ``n(n-3)/2 - R^S/2`` from the
    horizon fiber (``R^S = (n-1) k / b^2``).
    """
    if profile.chart is not Chart.PROPER_DISTANCE:
        raise DomainError("horizon expansion needs a proper-distance profile")
    n = profile.n
    idx = -1 if end == "last" else 0
    if profile.u[idx] != 0.0:
        raise DomainError("the chosen end is not a horizon")
    s = np.abs(profile.coord - profile.coord[idx])
    du = _gradient_norm(profile)
    mask = (s <= window * (profile.coord[-1] - profile.coord[0]))
    coeffs = np.polynomial.polynomial.polyfit(s[mask], du[mask] ** 2, 6)
    W0 = coeffs[0]
    R_S = (n - 1) * profile.fiber_einstein_constant / profile.warp[idx] ** 2
    return {"W0": float(W0), "measured": float(coeffs[2] / W0), "predicted": n * (n - 3) / 2.0 - R_S / 2.0,
            "linear": float(coeffs[1] / W0)}


# ------------------------------------------------------ branch inference


def infer_branch(profile: WarpedProfile, region: str = "outer") -> tuple[PseudoRadialBranch, float]:
    """Virtual mass and pseudo-radial branch of one side of a profile.

    The normalized surface gravity of the region's horizon end is
    ``|Du| / max u``; its virtual mass fixes the branch. Values within 1e-6 of
    the de Sitter value 1 and of ``sqrt(n)`` snap to those models. Returns the branch and
    the factor ``u_max(m) / max u`` that normalizes the potential.
    """
    region = region.lower()
    if region not in ("outer", "inner"):
        raise DomainError("region must be 'outer' or 'inner'")
    n = profile.n
    idx = -1 if region == "outer" else 0
    if profile.u[idx] != 0.0:
        raise DomainError(f"the {region} end of the profile is not a horizon")
    top = float(np.max(profile.u))
    kappa = float(_gradient_norm(profile)[idx]) / top
    root_n = math.sqrt(n)
    if abs(kappa - root_n) <= 1e-6:
        params = ModelParams(n, ModelParams(n, 0.0).m_max)
        return PseudoRadialBranch(params, Branch.CYLINDRICAL, side=region), 1.0 / top
    if region == "outer" and abs(kappa - 1.0) <= 1e-6:
        # finite-difference noise around the de Sitter value
        m = 0.0
    else:
        m = virtual_mass(n, kappa, region)
    params = ModelParams(n, m)
    if params.is_degenerate:
        return PseudoRadialBranch(params, Branch.CYLINDRICAL, side=region), 1.0 / top
    branch = PseudoRadialBranch(params, Branch.OUTER if region == "outer" else Branch.INNER)
    return branch, branch.umax / top

