"""Rationality tests and period measurement for magnetic trajectories.

Deciding whether a float is rational is impossible, so every verdict here
is relative to a resolution ``(max_denominator, tol)``.  Exact inputs
(``Fraction`` / ``int``) are handled in exact arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from . import su2
from .errors import DegenerateError, DomainError
from .flow import (
    DEFAULT_DS,
    _LieStepper,
    closed_form_derivatives,
    initial_tangent,
    integrate,
    step_from,
    tangent_closed_form,
)
from .hopf import circle_data, lattice
from .sasaki import SasakiParams, frame_to_algebra, q_tilde

PERIODIC = "periodic"
APERIODIC = "aperiodic-at-resolution"
DEFAULT_MAX_DEN = 64
DEFAULT_TOL = 1e-9

Number = Union[int, float, Fraction]


@dataclass(frozen=True)
class RationalApprox:
    numerator: int
    denominator: int
    value: float
    error: float
    verdict: str
    exact: bool = False

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    @property
    def periodic(self) -> bool:
        return self.verdict == PERIODIC


@dataclass(frozen=True)
class SlopeData:
    sigma: float
    R: float
    alpha: float
    residual: float
    approx: RationalApprox

    @property
    def verdict(self) -> str:
        return self.approx.verdict


@dataclass(frozen=True)
class PeriodResult:
    period: Optional[float]
    min_distance: float
    s_at_min: float
    horizon: float


def _is_exact(*xs) -> bool:
    return all(isinstance(x, (int, Fraction)) and not isinstance(x, bool) for x in xs)


def exact_sqrt(x: Fraction) -> Optional[Fraction]:
    """Square root of a non-negative rational if it is rational, else ``None``."""
    x = Fraction(x)
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def rational_approx(x: Number, max_denominator: int = DEFAULT_MAX_DEN, tol: float = DEFAULT_TOL) -> RationalApprox:
    """Best rational approximation with denominator ``<= max_denominator``."""
    if max_denominator < 1:
        raise DomainError(f"max_denominator must be >= 1, got {max_denominator!r}")
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    if _is_exact(x):
        f = Fraction(x)
        return RationalApprox(f.numerator, f.denominator, float(f), 0.0, PERIODIC, exact=True)
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"cannot approximate non-finite value {x!r}")
    f = Fraction(x).limit_denominator(max_denominator)
    err = abs(x - f.numerator / f.denominator)
    return RationalApprox(f.numerator, f.denominator, x, err, PERIODIC if err < tol else APERIODIC)


# -- closed-form criteria ---------------------------------------------------

def s3_criterion(q: Number, cos_theta: Number):
    """``q / sqrt(q^2 - 4 q cos(theta) + 4)``; exact ``Fraction`` when possible."""
    if _is_exact(q, cos_theta):
        rad = Fraction(q) ** 2 - 4 * Fraction(q) * Fraction(cos_theta) + 4
        if rad <= 0:
            raise DegenerateError(f"radicand q^2 - 4 q cos(theta) + 4 = {rad} is not positive")
        root = exact_sqrt(rad)
        if root is not None:
            return Fraction(q) / root
        return float(q) / math.sqrt(rad)
    q, c = float(q), float(cos_theta)
    rad = q * q - 4.0 * q * c + 4.0
    if not rad > 0:
        raise DegenerateError(f"radicand q^2 - 4 q cos(theta) + 4 = {rad!r} is not positive")
    return q / math.sqrt(rad)


def s3_verdict(q: Number, cos_theta: Number, max_denominator=DEFAULT_MAX_DEN, tol=DEFAULT_TOL) -> RationalApprox:
    value = s3_criterion(q, cos_theta)
    if _is_exact(q, cos_theta) and not isinstance(value, Fraction):
        # exact inputs with an irrational square root
        f = Fraction(value).limit_denominator(max_denominator)
        return RationalApprox(f.numerator, f.denominator, value, abs(value - float(f)), APERIODIC, exact=True)
    return rational_approx(value, max_denominator, tol)


def ikawa_omega(cos_theta: Number):
    """``sqrt(5/4 - cos(theta))``; exact ``Fraction`` when possible."""
    if _is_exact(cos_theta):
        rad = Fraction(5, 4) - Fraction(cos_theta)
        if rad < 0:
            raise DomainError(f"cos_theta must be <= 5/4, got {cos_theta}")
        root = exact_sqrt(rad)
        return root if root is not None else math.sqrt(rad)
    rad = 1.25 - float(cos_theta)
    if rad < 0:
        raise DomainError(f"cos_theta must be <= 5/4, got {cos_theta!r}")
    return math.sqrt(rad)


def periodicity_ratio(params: SasakiParams, cos_theta: float) -> float:
    """``q~ / (2 Omega)`` for a trajectory with contact angle ``theta``.

    ``Omega`` is the norm of the initial velocity minus ``q~ k / 2`` (see
    :func:`bergerflow.flow.closed_form_position`).  The trajectory closes
    iff this ratio is rational; on the round sphere it equals
    :func:`s3_criterion`.
    """
    cos_theta = float(cos_theta)
    sin2 = max(0.0, 1.0 - cos_theta * cos_theta)
    qt = q_tilde(params, cos_theta)
    big_omega = math.sqrt(sin2 / params.alpha + (cos_theta / params.alpha - 0.5 * qt) ** 2)
    if big_omega == 0.0:
        raise DegenerateError("Reeb orbit with Omega = 0")
    return 0.5 * qt / big_omega


def predicted_period(params: SasakiParams, cos_theta: float, max_denominator=DEFAULT_MAX_DEN, tol=DEFAULT_TOL) -> Optional[float]:
    """Minimal period from the rational ratio, or ``None`` if not rational at resolution.

    The closed form ``exp(s Omega n) exp(s q~ k / 2)`` returns to the
    identity when ``s Omega = a pi`` and ``s q~ / 2 = b pi`` with ``a, b`` of
    equal parity.
    """
    cos_theta = float(cos_theta)
    if 1.0 - abs(cos_theta) < 1e-15:
        return 2.0 * math.pi * params.alpha
    ratio = periodicity_ratio(params, cos_theta)
    approx = rational_approx(ratio, max_denominator, tol)
    if not approx.periodic:
        return None
    a, b = approx.denominator, abs(approx.numerator)
    qt = q_tilde(params, cos_theta)
    big_omega = 0.5 * abs(qt) / abs(ratio) if ratio != 0 else math.sqrt(
        (1.0 - cos_theta**2) / params.alpha + (cos_theta / params.alpha) ** 2
    )
    mult = 1 if (a % 2 == 1 and b % 2 == 1) else 2
    return mult * a * math.pi / big_omega


# -- slope quantization -------------------------------------------------------

def _root(R, params):
    r = params.r
    if not 0.0 < R <= r * (1.0 + 1e-12):
        raise DomainError(f"circle radius must lie in (0, r], got R={R!r}, r={r!r}")
    return math.sqrt(max(0.0, 1.0 - (R / r) ** 2))


def slope_from_mn(m: int, n: int, R: float, params: SasakiParams) -> float:
    """Slope ``cot(theta)`` of the trajectory closing after ``m`` fibers and ``n`` laps.

    ``sigma = alpha [2 m + n (1 - sqrt(1 - R^2/r^2))] / (2 n R)``: the ratio
    of the fiber and horizontal components of ``m (2 pi alpha, 0) + n
    (alpha delta, L)`` in flat coordinates of the Hopf torus.
    """
    if n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    root = _root(R, params)
    return params.alpha * (2.0 * m + n * (1.0 - root)) / (2.0 * n * R)


def slope_quantization(
    R: float,
    sigma: float,
    params: SasakiParams,
    max_denominator: int = DEFAULT_MAX_DEN,
    tol: float = DEFAULT_TOL,
    hemisphere: int = 1,
) -> SlopeData:
    """Residual ``R sigma + (alpha/2) h sqrt(1 - 4R^2/alpha) - alpha/2`` and its rationality over ``alpha``.

    ``h = hemisphere`` picks the sign of the square root (which side of the
    circle the fiber drift encloses); ``h = +1`` for the circles produced by
    :func:`slope_from_mn`.
    """
    if hemisphere not in (1, -1):
        raise DomainError("hemisphere must be +1 or -1")
    root = _root(R, params)
    al = params.alpha
    residual = R * sigma + 0.5 * al * hemisphere * root - 0.5 * al
    return SlopeData(sigma=sigma, R=R, alpha=al, residual=residual, approx=rational_approx(residual / al, max_denominator, tol))


def slope_of_trajectory(params: SasakiParams, cos_theta: float):
    """``(R, sigma, hemisphere)`` of the projected circle of a trajectory."""
    cos_theta = float(cos_theta)
    sin_theta = math.sqrt(max(0.0, 1.0 - cos_theta * cos_theta))
    if sin_theta == 0.0:
        raise DegenerateError("Reeb orbit: no projected circle")
    qt = q_tilde(params, cos_theta)
    big_omega = math.sqrt(sin_theta**2 / params.alpha + (cos_theta / params.alpha - 0.5 * qt) ** 2)
    R = sin_theta / (2.0 * big_omega)
    hemisphere = 1 if params.q - 2.0 * cos_theta >= 0 else -1
    return R, cos_theta / sin_theta, hemisphere


def strength_for_slope(R: float, sigma: float, params: SasakiParams, hemisphere: int = 1) -> float:
    """Strength ``q`` whose trajectory with slope ``sigma`` projects to a circle of radius ``R``."""
    root = _root(R, params)
    sin_theta = 1.0 / math.hypot(1.0, sigma)
    cos_theta = sigma * sin_theta
    return 2.0 * cos_theta + hemisphere * (sin_theta / R) * root


def tube_period(m: int, n: int, R: float, params: SasakiParams) -> float:
    """Length of the lattice vector ``m (2 pi alpha, 0) + n (alpha delta, L)``."""
    lat = lattice(circle_data(min(R, params.r), params), params)
    v = m * np.array(lat.gen_fiber) + n * np.array(lat.gen_horizontal)
    return float(np.hypot(*v))


# -- numerical period measurement ----------------------------------------------

class _ClosedFormSource:
    def __init__(self, start, t0, params):
        self.start, self.t0, self.params = start, t0, params
        self.qt = q_tilde(params, float(t0[2]))

    def state(self, s):
        g, dg = closed_form_derivatives(self.start, self.t0, self.params, s, order=1)
        T = tangent_closed_form(self.t0, self.qt, np.atleast_1d(s))
        dT = np.stack([self.qt * T[:, 1], -self.qt * T[:, 0], 0 * T[:, 2]], axis=-1)
        if np.ndim(s) == 0:
            T, dT = T[0], dT[0]
        return g, dg, T, dT


class _IntegratorSource:
    def __init__(self, start, t0, params, horizon, ds):
        n = int(math.ceil(horizon / ds)) + 2
        self.traj = integrate(start, t0, params, ds, n)
        self.params, self.ds = params, ds
        self.stepper = _LieStepper(params)

    def _derivs(self, g, T):
        w = np.stack([self.stepper.omega(t) for t in np.atleast_2d(T)])
        dg = su2.qmul(g, np.concatenate([np.zeros((len(w), 1)), w], axis=1))
        dT = np.array([self.stepper.rhs(t) for t in np.atleast_2d(T)])
        return dg, dT

    def grid(self):
        tr = self.traj
        dg, dT = self._derivs(tr.position, tr.tangent)
        return tr.s, tr.position, dg, tr.tangent, dT

    def state(self, s):
        i = min(int(s // self.ds), len(self.traj.s) - 1)
        g, T = step_from(self.traj.position[i], self.traj.tangent[i], self.params, s - self.traj.s[i])
        dg, dT = self._derivs(g[None], T[None])
        return g, dg[0], T, dT[0]


def measure_period(
    params: SasakiParams,
    cos_theta: float,
    horizon: float,
    tol: float = 1e-5,
    source: str = "closed-form",
    ds: float = DEFAULT_DS,
    t0=None,
    start=su2.IDENTITY,
    scan_step: Optional[float] = None,
) -> PeriodResult:
    """Smallest ``s in (0, horizon]`` where position and tangent return within ``tol``.

    The distance ``D(s) = |gamma(s) - gamma(0)|^2 + |T(s) - T(0)|^2`` is
    scanned on a grid; each local minimum that could dip below ``tol`` is
    refined by bisection on ``D'``.  ``period`` is ``None`` if nothing
    closes; ``min_distance`` is the smallest ``sqrt(D)`` encountered.
    """
    if not horizon > 0:
        raise DomainError(f"horizon must be positive, got {horizon!r}")
    if t0 is None:
        t0 = initial_tangent(float(cos_theta))
    g0 = np.asarray(start, dtype=float)
    T0 = np.asarray(t0, dtype=float)

    if source == "closed-form":
        src = _ClosedFormSource(start, t0, params)
        qt = abs(src.qt)
        n0 = frame_to_algebra(t0, params.alpha)
        freq = max(qt, float(np.linalg.norm(n0)) + qt, 1e-3)
        h = scan_step or min(1e-2, 0.05 / freq)
        s_grid = np.arange(1, int(horizon / h) + 3) * h
        g, dg, T, dT = src.state(s_grid)
    elif source == "integrator":
        src = _IntegratorSource(start, t0, params, horizon, ds)
        s_all, g, dg, T, dT = src.grid()
        keep = (s_all > 0) & (s_all <= horizon + 2.5 * ds)
        s_grid, g, dg, T, dT = s_all[keep], g[keep], dg[keep], T[keep], dT[keep]
        h = ds
    else:
        raise DomainError(f"unknown trajectory source {source!r}")

    dist2 = np.sum((g - g0) ** 2, axis=1) + np.sum((T - T0) ** 2, axis=1)
    speed = float(np.max(np.sqrt(np.sum(dg**2, axis=1) + np.sum(dT**2, axis=1))))
    k_min = int(np.argmin(np.where(s_grid <= horizon, dist2, np.inf)))
    best = (math.sqrt(dist2[k_min]), float(s_grid[k_min]))

    def D(s):
        gs, dgs, Ts, dTs = src.state(s)
        d = np.asarray(gs) - g0
        e = np.asarray(Ts) - T0
        return float(d @ d + e @ e), float(2.0 * (d @ dgs) + 2.0 * (e @ dTs))

    # grid runs two steps past the horizon so a closure at the horizon is interior
    interior = (dist2[1:-1] <= dist2[:-2]) & (dist2[1:-1] <= dist2[2:])
    for k in np.flatnonzero(interior) + 1:
        if math.sqrt(dist2[k]) - speed * h > tol:
            continue
        lo, hi = s_grid[k - 1], s_grid[k + 1]
        if D(lo)[1] > 0 or D(hi)[1] < 0:
            s_star = float(s_grid[k])
        else:
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if D(mid)[1] < 0:
                    lo = mid
                else:
                    hi = mid
                if hi - lo < 1e-13 * max(1.0, hi):
                    break
            s_star = 0.5 * (lo + hi)
        d_star = math.sqrt(max(0.0, D(s_star)[0]))
        if d_star < best[0]:
            best = (d_star, s_star)
        if d_star < tol and s_star <= horizon * (1.0 + 1e-12):
            return PeriodResult(period=s_star, min_distance=d_star, s_at_min=s_star, horizon=horizon)
    return PeriodResult(period=None, min_distance=best[0], s_at_min=best[1], horizon=horizon)
