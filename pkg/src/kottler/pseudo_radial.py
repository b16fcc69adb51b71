"""Pseudo-radial branches ψ(u), the pseudo-affine function φ and gap functions.

On a model with mass ``m`` the relation ``u^2 = 1 - ψ^2 - 2m ψ^(2-n)`` has two
solutions for each ``u < u_max``: the outer branch ``ψ_+ in [r_0, r_+]`` and the
inner branch ``ψ_- in [r_-, r_0]``. Writing ``ψ = r_0 (1 + x)`` turns it into

    (u_max - u)(u_max + u) = r_0^2 G(x),
    G(x) = 2x + x^2 + (2/(n-2)) ((1+x)^(-(n-2)) - 1) = n x^2 - n(n-1)/3 x^3 + ...

which stays well conditioned as ``u -> u_max`` where ``dψ/du`` blows up.

The pseudo-affine function is ``φ(ψ) = int_ψ^{r_+} dt / (t sqrt(f(t)))``. The
metric ``g = g_0 / ψ(u)^2`` makes ``|∇φ|_g = 1`` on every model. At
``m = m_max`` the cylindrical branch has ``ψ = sqrt((n-2)/n)`` and
``φ = arcsin(u)/sqrt(n-2)``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np
from numpy.polynomial import Chebyshev

from .errors import DomainError, PoleError, QuadratureError
from .scalar_solvers import (
    DEFAULT_TOL,
    ModelParams,
    ToleranceConfig,
    f_m_near_root,
    horizon_radii,
    photon_radius,
    singular_integral,
    solve_alpha,
    substitution_integral,
    u_max,
)

__all__ = [
    "Branch",
    "PseudoRadialBranch",
    "ConformalState",
    "psi_of_u",
    "psi_derivatives",
    "phi",
    "phi_substitution",
    "phi_of_u",
    "phi_by_chain_rule",
    "grad_phi_norm",
    "gap_functions",
    "PHI_CACHE_TOL",
]

#: Accuracy target of the interpolated φ(u).
PHI_CACHE_TOL = 1e-9
_SERIES_CUTOFF = 0.1


class Branch(str, Enum):
    OUTER = "outer"
    INNER = "inner"
    CYLINDRICAL = "cylindrical"

    @classmethod
    def parse(cls, value) -> "Branch":
        if isinstance(value, Branch):
            return value
        key = str(value).strip().lower()
        for b in cls:
            if key in (b.value, b.name.lower()):
                return b
        raise DomainError(f"unknown branch {value!r}")


@dataclass(frozen=True)
class PseudoRadialBranch:
    """One branch of the pseudo-radial function for fixed ``(n, m)``.

    ``side`` only matters for the cylindrical branch: ``"outer"`` gives
    ``φ = arcsin(u)/sqrt(n-2)`` and ``"inner"`` its reflection
    ``(pi - arcsin u)/sqrt(n-2)``.
    """

    params: ModelParams
    branch: Branch
    side: str = "outer"
    tol: ToleranceConfig = DEFAULT_TOL

    def __post_init__(self):
        object.__setattr__(self, "branch", Branch.parse(self.branch))
        if self.side not in ("outer", "inner"):
            raise DomainError(f"side must be 'outer' or 'inner', got {self.side!r}")
        degenerate = self.params.is_degenerate
        if self.branch is Branch.CYLINDRICAL and not degenerate:
            raise DomainError("the cylindrical branch requires m = m_max")
        if self.branch is not Branch.CYLINDRICAL and degenerate:
            raise DomainError("at m = m_max use the cylindrical branch")
        if self.branch is Branch.INNER and self.params.m == 0.0:
            raise DomainError("the inner branch requires m > 0")

    @property
    def n(self) -> int:
        return self.params.n

    @cached_property
    def r0(self) -> float:
        return photon_radius(self.params)

    @cached_property
    def umax(self) -> float:
        return 1.0 if self.branch is Branch.CYLINDRICAL else u_max(self.params)

    @cached_property
    def radii(self) -> tuple[float, float]:
        return horizon_radii(self.params, self.tol)

    @cached_property
    def psi_range(self) -> tuple[float, float]:
        r_minus, r_plus = self.radii
        if self.branch is Branch.OUTER:
            return self.r0, r_plus
        if self.branch is Branch.INNER:
            return r_minus, self.r0
        return self.r0, self.r0

    @cached_property
    def phi0(self) -> float:
        """φ at Σ (``ψ = r_0``); infinite for de Sitter."""
        if self.branch is Branch.CYLINDRICAL:
            return math.pi / (2.0 * math.sqrt(self.n - 2))
        if self.params.m == 0.0:
            return math.inf
        return _phi_outer_piece(self.params, self.r0, self.radii[1])

    @cached_property
    def phi_max(self) -> float:
        """φ at the inner horizon."""
        if self.branch is Branch.CYLINDRICAL:
            return math.pi / math.sqrt(self.n - 2)
        if self.params.m == 0.0:
            return math.inf
        return self.phi0 + _phi_inner_piece(self.params, self.radii[0], self.r0, self.radii[0])

    @cached_property
    def alpha(self) -> float:
        return solve_alpha(self.params, self.tol)

    def D(self, psi):
        """``1 - (r_0/ψ)^n``."""
        if self.params.m == 0.0:
            return np.ones_like(np.asarray(psi, dtype=float))
        return 1.0 - (self.n - 2) * self.params.m * np.asarray(psi, dtype=float) ** (-self.n)


@dataclass(frozen=True)
class ConformalState:
    """Pointwise values of the conformal machinery.

    ``psidot_gamma`` is the finite product ``dψ/du * γ``, which stays bounded
    at ``u = 0`` where ``γ`` itself has a ``1/u`` pole.
    """

    phi: np.ndarray | float
    grad_phi_norm: np.ndarray | float
    w: np.ndarray | float
    beta: np.ndarray | float
    gamma: np.ndarray | float
    psidot_gamma: np.ndarray | float


# ------------------------------------------------------------------- ψ(u)


def _G(x: np.ndarray, n: int) -> np.ndarray:
    """``u_max^2 - u^2`` over ``r_0^2`` as a function of ``x = ψ/r_0 - 1``."""
    x = np.asarray(x, dtype=float)
    k = n - 2
    out = np.empty_like(x)
    small = np.abs(x) <= _SERIES_CUTOFF
    if np.any(small):
        xs = x[small]
        # (2/k) sum_{j>=3} binom(-k, j) x^j, plus the x^2 term (k+1) x^2 + x^2
        total = np.zeros_like(xs)
        coeff = 2.0 / k
        for j in range(1, 3):
            coeff *= -(k + j - 1) / j
        for j in range(3, 40):
            coeff *= -(k + j - 1) / j
            total += coeff * xs**j
        out[small] = (k + 2) * xs**2 + total
    big = ~small
    if np.any(big):
        xb = x[big]
        out[big] = 2.0 * xb + xb * xb + (2.0 / k) * np.expm1(-k * np.log1p(xb))
    return out


def _x_of_target(branch: PseudoRadialBranch, target: np.ndarray) -> np.ndarray:
    """Solve ``G(x) = target`` on the branch bracket by vectorized bisection."""
    r_minus, r_plus = branch.radii
    r0 = branch.r0
    target = np.asarray(target, dtype=float)
    if branch.branch is Branch.OUTER:
        lo = np.zeros_like(target)
        hi = np.full_like(target, r_plus / r0 - 1.0)
        increasing = True
    else:
        lo = np.full_like(target, r_minus / r0 - 1.0)
        hi = np.zeros_like(target)
        increasing = False
    n = branch.n
    for _ in range(branch.tol.max_iter):
        mid = 0.5 * (lo + hi)
        active = (mid > lo) & (mid < hi)
        if not np.any(active):
            break
        above = _G(mid, n) > target
        go_low = above if increasing else ~above
        hi = np.where(active & go_low, mid, hi)
        lo = np.where(active & ~go_low, mid, lo)
    return 0.5 * (lo + hi)


def _as_output(values: np.ndarray, scalar: bool):
    return float(values.reshape(-1)[0]) if scalar else values


def _check_u(branch: PseudoRadialBranch, u: np.ndarray) -> np.ndarray:
    if np.any(~np.isfinite(u)) or np.any(u < 0) or np.any(u > branch.umax + branch.tol.abs_tol):
        raise DomainError(f"u outside [0, {branch.umax!r}] on the {branch.branch.value} branch")
    return np.minimum(u, branch.umax)


def psi_of_u(branch: PseudoRadialBranch, u, tol: ToleranceConfig | None = None):
    """Pseudo-radial value ``ψ(u)`` on the branch.

    Accepts scalars or arrays. Values of ``u`` within ``abs_tol`` of ``u_max``
    are treated as ``u_max``.

    Raises
    ------
    DomainError
        If ``u`` lies outside ``[0, u_max]``.
    """
    if tol is not None and tol != branch.tol:
        branch = PseudoRadialBranch(branch.params, branch.branch, branch.side, tol)
    scalar = np.ndim(u) == 0
    uu = _check_u(branch, np.atleast_1d(np.asarray(u, dtype=float)))
    if branch.branch is Branch.CYLINDRICAL:
        return _as_output(np.full_like(uu, branch.r0), scalar)
    if branch.params.m == 0.0:
        return _as_output(np.sqrt((1.0 - uu) * (1.0 + uu)), scalar)
    umax = branch.umax
    gap = umax - uu
    gap[gap <= branch.tol.abs_tol] = 0.0
    target = gap * (umax + uu) / branch.r0**2
    psi = branch.r0 * (1.0 + _x_of_target(branch, target))
    r_minus, r_plus = branch.radii
    psi[uu == 0.0] = r_plus if branch.branch is Branch.OUTER else r_minus
    psi[gap == 0.0] = branch.r0
    return _as_output(psi, scalar)


def _psi_from_gap(branch: PseudoRadialBranch, gap: np.ndarray) -> np.ndarray:
    """ψ at ``u = u_max - gap`` without forming ``u`` first."""
    target = gap * (2.0 * branch.umax - gap) / branch.r0**2
    return branch.r0 * (1.0 + _x_of_target(branch, target))


def psi_derivatives(branch: PseudoRadialBranch, u):
    """First and second derivatives of ψ with respect to ``u``.

    ``ψ' = -u / (ψ D)`` and ``ψ'' = (ψ'/u) (1 + (n - (n-1) D) ψ'^2)`` with
    ``D = 1 - (r_0/ψ)^n``. The factor ``ψ'/u = -1/(ψ D)`` keeps ``ψ''`` finite
    at ``u = 0``.

    Raises
    ------
    PoleError
        At ``u = u_max`` where ``ψ'`` is infinite.
    """
    scalar = np.ndim(u) == 0
    uu = _check_u(branch, np.atleast_1d(np.asarray(u, dtype=float)))
    if branch.branch is Branch.CYLINDRICAL:
        zero = np.zeros_like(uu)
        return _as_output(zero, scalar), _as_output(zero.copy(), scalar)
    if np.any(branch.umax - uu <= branch.tol.abs_tol):
        raise PoleError("dψ/du has a pole at u = u_max")
    psi = psi_of_u(branch, uu)
    D = branch.D(psi)
    ratio = -1.0 / (psi * D)
    d1 = ratio * uu
    d2 = ratio * (1.0 + (branch.n - (branch.n - 1) * D) * d1 * d1)
    return _as_output(d1, scalar), _as_output(d2, scalar)


# --------------------------------------------------------------------- φ


def _phi_outer_piece(params: ModelParams, psi: float, r_plus: float, scheme: str = "tanh-sinh") -> float:
    """``int_ψ^{r_+} dt / (t sqrt(f))`` with the blowup at ``r_+`` resolved by offsets."""

    def integrand(t, da, db):
        return 1.0 / (t * np.sqrt(f_m_near_root(params, r_plus, -db)))

    if psi >= r_plus:
        return 0.0
    if scheme == "tanh-sinh":
        return singular_integral(integrand, psi, r_plus, 1e-13, offsets=True)
    return substitution_integral(integrand, psi, r_plus, "b", 1e-13, offsets=True)


def _phi_inner_piece(params: ModelParams, psi: float, r0: float, r_minus: float,
                     scheme: str = "tanh-sinh") -> float:
    """``int_ψ^{r_0} dt / (t sqrt(f))`` with distances measured from ``r_-``."""
    base = psi - r_minus

    def integrand(t, da, db):
        return 1.0 / (t * np.sqrt(f_m_near_root(params, r_minus, base + da)))

    if psi >= r0:
        return 0.0
    if scheme == "tanh-sinh":
        return singular_integral(integrand, psi, r0, 1e-13, offsets=True)
    return substitution_integral(integrand, psi, r0, "a" if base == 0.0 else "none", 1e-13, offsets=True)


def _phi_de_sitter(psi: float, scheme: str) -> float:
    if psi == 0.0:
        return math.inf

    def integrand(t, da, db):
        return 1.0 / (t * np.sqrt(db * (1.0 + t)))

    if scheme == "tanh-sinh":
        return singular_integral(integrand, psi, 1.0, 1e-13, offsets=True)
    return substitution_integral(integrand, psi, 1.0, "b", 1e-13, offsets=True)


def _phi_psi(branch: PseudoRadialBranch, psi: float, scheme: str) -> float:
    lo, hi = branch.psi_range
    slack = 1e-14 * max(1.0, hi)
    if not (lo - slack <= psi <= hi + slack):
        raise DomainError(f"ψ = {psi!r} outside the {branch.branch.value} range [{lo!r}, {hi!r}]")
    psi = min(max(psi, lo), hi)
    params = branch.params
    if params.m == 0.0:
        return _phi_de_sitter(psi, scheme)
    r_minus, r_plus = branch.radii
    if branch.branch is Branch.OUTER:
        return _phi_outer_piece(params, psi, r_plus, scheme)
    phi0 = branch.phi0 if scheme == "tanh-sinh" else _phi_outer_piece(params, branch.r0, r_plus, scheme)
    return phi0 + _phi_inner_piece(params, psi, branch.r0, r_minus, scheme)


def _phi_cylindrical(branch: PseudoRadialBranch, u):
    u = np.asarray(u, dtype=float)
    if np.any(u < 0) or np.any(u > 1.0 + branch.tol.abs_tol):
        raise DomainError("u outside [0, 1] on the cylindrical branch")
    base = np.arcsin(np.minimum(u, 1.0))
    if branch.side == "inner":
        base = math.pi - base
    return base / math.sqrt(branch.n - 2)


def phi(branch: PseudoRadialBranch, value, tol: ToleranceConfig | None = None):
    """Pseudo-affine function.

    ``value`` is ψ on the outer and inner branches and ``u`` on the cylindrical
    branch (where ψ is constant). The inner branch continues the outer one
    through Σ, so ``φ(r_0) = φ_0`` and ``φ(r_-) = φ_max``.
    """
    del tol
    if branch.branch is Branch.CYLINDRICAL:
        out = _phi_cylindrical(branch, value)
        return float(out) if np.ndim(value) == 0 else out
    if np.ndim(value) == 0:
        return _phi_psi(branch, float(value), "tanh-sinh")
    return np.array([_phi_psi(branch, float(v), "tanh-sinh") for v in np.ravel(value)]).reshape(np.shape(value))


def phi_substitution(branch: PseudoRadialBranch, psi: float) -> float:
    """φ(ψ) by the square-root substitution and Gauss-Legendre; an independent check on ``phi``."""
    if branch.branch is Branch.CYLINDRICAL:
        raise DomainError("the cylindrical branch has a closed form")
    return _phi_psi(branch, float(psi), "substitution")


def phi_by_chain_rule(branch: PseudoRadialBranch, u_lo: float, u_hi: float) -> float:
    """``φ(u_hi) - φ(u_lo)`` from ``dφ/du = 1/(ψ^2 D)``.

    The integrand has an inverse-square-root blowup at ``u_max``; distances to
    ``u_max`` are passed down so ψ is solved without cancellation there.
    """
    if branch.branch is Branch.CYLINDRICAL:
        raise DomainError("the cylindrical branch has a closed form")
    umax = branch.umax
    if not (0.0 <= u_lo <= u_hi <= umax):
        raise DomainError("need 0 <= u_lo <= u_hi <= u_max")

    def integrand(s, da, db):
        gap = (umax - u_hi) + db
        if branch.params.m == 0.0:
            psi = np.sqrt(1.0 - s * s)
            return 1.0 / (psi * psi)
        psi = _psi_from_gap(branch, gap)
        return 1.0 / (psi * psi * branch.D(psi))

    return singular_integral(integrand, u_lo, u_hi, 1e-12, offsets=True)


_PHI_CACHE: dict = {}
_PHI_LOCK = threading.Lock()


def _phi_theta_function(branch: PseudoRadialBranch):
    """φ as a function of ``θ`` with ``u = u_max sin θ``; smooth on ``[0, pi/2]``."""
    umax = branch.umax

    def fn(theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        # gap = u_max (1 - sin θ) = 2 u_max sin^2((pi/2 - θ)/2), cancellation free
        gap = 2.0 * umax * np.sin(0.5 * (0.5 * math.pi - theta)) ** 2
        out = np.empty_like(theta)
        for i, g in enumerate(gap):
            if g <= 0.0:
                out[i] = branch.phi0
            else:
                out[i] = _phi_psi(branch, float(_psi_from_gap(branch, np.array([g]))[0]), "tanh-sinh")
        return out

    return fn


def _phi_interpolant(branch: PseudoRadialBranch) -> Chebyshev:
    key = (branch.n, branch.params.m, branch.branch)
    cached = _PHI_CACHE.get(key)
    if cached is not None:
        return cached
    with _PHI_LOCK:
        cached = _PHI_CACHE.get(key)
        if cached is not None:
            return cached
        fn = _phi_theta_function(branch)
        domain = [0.0, 0.5 * math.pi]
        probe = np.linspace(0.0, 0.5 * math.pi, 41)[1:-1] + 0.013
        exact = fn(probe)
        deg = 16
        while True:
            interp = Chebyshev.interpolate(fn, deg, domain=domain)
            err = float(np.max(np.abs(interp(probe) - exact)))
            if err <= 0.1 * PHI_CACHE_TOL:
                break
            if deg >= 512:
                raise QuadratureError("φ interpolant did not reach its tolerance", deg, (err, err))
            deg *= 2
        _PHI_CACHE[key] = interp
        return interp


def phi_of_u(branch: PseudoRadialBranch, u):
    """φ along the branch as a function of ``u`` (cached interpolant, error below 1e-9)."""
    if branch.branch is Branch.CYLINDRICAL:
        out = _phi_cylindrical(branch, u)
        return float(out) if np.ndim(u) == 0 else out
    scalar = np.ndim(u) == 0
    uu = _check_u(branch, np.atleast_1d(np.asarray(u, dtype=float)))
    if branch.params.m == 0.0:
        with np.errstate(divide="ignore"):
            out = np.arctanh(uu)
        return _as_output(out, scalar)
    theta = np.arcsin(np.minimum(uu / branch.umax, 1.0))
    lo, hi = (0.0, branch.phi0) if branch.branch is Branch.OUTER else (branch.phi0, branch.phi_max)
    return _as_output(np.clip(_phi_interpolant(branch)(theta), lo, hi), scalar)


# ------------------------------------------------------- gradient and gaps


TOP_GRADIENT_TOL = 1e-8


def grad_phi_norm(branch: PseudoRadialBranch, u, du_norm):
    """``|∇φ|_g = |Du| / (ψ |D(ψ)|)``.

    At ``u = u_max`` with ``|Du| <= TOP_GRADIENT_TOL`` the model limit 1 is
    returned. The cylindrical branch uses ``|Du| / sqrt(n (1 - u^2))``.
    """
    scalar = np.ndim(u) == 0 and np.ndim(du_norm) == 0
    uu = _check_u(branch, np.atleast_1d(np.asarray(u, dtype=float)))
    du = np.broadcast_to(np.atleast_1d(np.asarray(du_norm, dtype=float)), uu.shape).astype(float)
    at_top = branch.umax - uu <= branch.tol.abs_tol
    with np.errstate(divide="ignore", invalid="ignore"):
        if branch.branch is Branch.CYLINDRICAL:
            denom = np.sqrt(branch.n * (1.0 - uu) * (1.0 + uu))
        else:
            psi = psi_of_u(branch, uu)
            denom = psi * np.abs(branch.D(psi))
        out = du / denom
    # at the maximum Du vanishes; a rounding-level remainder still takes the model limit
    flat = du <= TOP_GRADIENT_TOL
    out = np.where(at_top, np.where(flat, 1.0, np.inf), out)
    out = np.where((du == 0.0) & ~at_top, 0.0, out)
    return _as_output(out, scalar)


def gap_functions(branch: PseudoRadialBranch, u, du_norm) -> ConformalState:
    """φ, ``|∇φ|_g``, ``w = β (1 - |∇φ|_g^2)``, ``β`` and ``γ`` at the given points.

    Outer: ``β = ψ^2 D``, ``γ = ψ^(2n+2) D^3 / u``.
    Inner: ``β = ψ^2 |D|``, ``γ = ψ^(nα+n+2) |D|^(α+2) / u``.
    Cylindrical: ``β = sqrt(1 - u^2)``, ``γ = cos^3(t)/sin(t)`` with
    ``t = sqrt(n-2) φ``.
    """
    scalar = np.ndim(u) == 0 and np.ndim(du_norm) == 0
    uu = _check_u(branch, np.atleast_1d(np.asarray(u, dtype=float)))
    grad = np.atleast_1d(grad_phi_norm(branch, uu, np.broadcast_to(du_norm, uu.shape)))
    ph = np.atleast_1d(phi_of_u(branch, uu))
    n = branch.n
    with np.errstate(divide="ignore", invalid="ignore"):
        if branch.branch is Branch.CYLINDRICAL:
            beta = np.sqrt((1.0 - uu) * (1.0 + uu))
            t = math.sqrt(n - 2) * ph
            gamma = np.cos(t) ** 3 / np.sin(t)
            psidot_gamma = np.zeros_like(uu)
        else:
            psi = psi_of_u(branch, uu)
            D = branch.D(psi)
            aD = np.abs(D)
            beta = psi * psi * aD
            if branch.branch is Branch.OUTER:
                gamma = psi ** (2 * n + 2) * D**3 / uu
                psidot_gamma = -(psi ** (2 * n + 1)) * D * D
            else:
                a = branch.alpha
                gamma = psi ** (n * a + n + 2) * aD ** (a + 2) / uu
                psidot_gamma = psi ** ((a + 1) * n + 1) * aD ** (a + 1)
    w = beta * (1.0 - grad * grad)
    w = np.where(np.isfinite(w), w, np.where(beta == 0.0, 0.0, w))
    return ConformalState(
        phi=_as_output(ph, scalar),
        grad_phi_norm=_as_output(grad, scalar),
        w=_as_output(w, scalar),
        beta=_as_output(beta, scalar),
        gamma=_as_output(gamma, scalar),
        psidot_gamma=_as_output(psidot_gamma, scalar),
    )
