"""Circle-bundle geometry: projection to S^2(r), horizontal lifts, Hopf tubes.

The projection is ``pi(a) = Ad(a)(r k)`` with ``r = sqrt(alpha)/2`` and the
fiber through ``a`` is ``a a_t``, ``a_t = exp(t k)``.  Fiber phases are
measured in this angle parameter, so a full fiber is ``t -> t + 2 pi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline

from . import su2
from .errors import ContractError, DegenerateError, DomainError
from .flow import Trajectory
from .sasaki import SasakiParams, christoffel, frame_to_algebra, q_tilde

LIFT_START_TOL = 1e-8


class SpherePoint(NamedTuple):
    y1: float
    y2: float
    y3: float


@dataclass(frozen=True)
class CircleData:
    R: float
    L: float
    A: float
    kappa_beta: float


@dataclass(frozen=True)
class LatticeSpec:
    gen_fiber: tuple
    gen_horizontal: tuple
    delta: float

    def matrix(self) -> np.ndarray:
        return np.array([self.gen_fiber, self.gen_horizontal], dtype=float)


def project(a, params: SasakiParams) -> SpherePoint:
    y = su2.ad_action(a, (0.0, 0.0, params.r))
    return SpherePoint(*y)


def project_array(a, params: SasakiParams) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    k = np.broadcast_to([0.0, 0.0, params.r], a.shape[:-1] + (3,))
    return su2.ad_array(a, k)


def fiber_element(t: float) -> su2.Su2Element:
    """``a_t = diag(e^{it}, e^{-it})``."""
    return su2.Su2Element(math.cos(t), 0.0, 0.0, math.sin(t))


def fiber_phase(a, b) -> float:
    """Angle ``t`` in ``(-pi, pi]`` with ``b = a a_t`` (``b`` on the fiber of ``a``)."""
    d = su2._qmul(su2.conj(a), b)
    return math.atan2(d[3], d[0])


def wrap_angle(x):
    """Reduce to ``(-pi, pi]``."""
    y = math.remainder(x, 2.0 * math.pi)
    return math.pi if y == -math.pi else y


def point_over(y, params: SasakiParams) -> su2.Su2Element:
    """A group element projecting to ``y`` (the one reached by a horizontal rotation)."""
    y = np.asarray(y, dtype=float)
    n = np.linalg.norm(y)
    u = y / n
    axis = np.cross([0.0, 0.0, 1.0], u)
    s = np.linalg.norm(axis)
    ang = math.atan2(s, u[2])
    if s < 1e-15:
        if u[2] > 0:
            return su2.IDENTITY
        return su2.Su2Element(0.0, 1.0, 0.0, 0.0)
    return su2.exp_su2(0.5 * ang * axis / s)


# -- base circles -------------------------------------------------------------

def circle_on_sphere(R: float, params: SasakiParams, u, axis=(0.0, 0.0, 1.0)) -> np.ndarray:
    """Arclength-parametrized circle of radius ``R`` on ``S^2(r)``.

    The circle runs counterclockwise seen from the tip of ``axis``, so the
    cap around ``r axis`` lies on its left.
    """
    r = params.r
    if not 0.0 < R <= r * (1.0 + 1e-15):
        raise DomainError(f"circle radius must lie in (0, r], got R={R!r}, r={r!r}")
    R = min(R, r)
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    helper = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(helper, n)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    phi = np.asarray(u, dtype=float) / R
    h = math.sqrt(max(0.0, r * r - R * R))
    return h * n + R * (np.cos(phi)[..., None] * e1 + np.sin(phi)[..., None] * e2)


def circle_data(R: float, params: SasakiParams) -> CircleData:
    r = params.r
    if not 0.0 < R <= r:
        raise DomainError(f"circle radius must lie in (0, r], got R={R!r}, r={r!r}")
    h = math.sqrt(r * r - R * R)
    return CircleData(R=R, L=2.0 * math.pi * R, A=2.0 * math.pi * r * (r - h), kappa_beta=h / (r * R))


def cap_area(points, params: SasakiParams) -> float:
    """Area of the spherical cap cut off by the plane through a sampled circle.

    Returns the cap on the side of the points' mean direction, i.e. the
    area enclosed by a counterclockwise circle seen from its center.
    """
    pts = np.asarray(points, dtype=float)
    center = pts.mean(axis=0)
    normal = np.linalg.svd(pts - center)[2][-1]
    height = float(np.dot(center, normal))
    if height < 0:
        normal, height = -normal, -height
    return 2.0 * math.pi * params.r * (params.r - height)


def holonomy(A: float, params: SasakiParams) -> float:
    r2 = params.r**2
    if abs(A) > 4.0 * math.pi * r2 * (1.0 + 1e-12):
        raise DomainError(f"enclosed area {A!r} exceeds the sphere area {4 * math.pi * r2!r}")
    return A / (2.0 * r2)


def lattice(circle: CircleData, params: SasakiParams) -> LatticeSpec:
    """Deck lattice of the Hopf torus in isometric flat coordinates.

    The first coordinate is fiber arclength, so the holonomy angle enters
    the horizontal generator multiplied by the fiber length scale ``alpha``.
    """
    delta = holonomy(circle.A, params)
    return LatticeSpec(
        gen_fiber=(2.0 * math.pi * params.alpha, 0.0),
        gen_horizontal=(params.alpha * delta, circle.L),
        delta=delta,
    )


def projected_curvature_from_q(q: float, cos_theta: float) -> float:
    """Signed geodesic curvature ``(q - 2 cos(theta)) / (eps sin(theta))`` of the projection."""
    if q == 0.0:
        raise DegenerateError("q = 0: the sign eps is undefined")
    sin_theta = math.sqrt(max(0.0, 1.0 - cos_theta * cos_theta))
    if sin_theta == 0.0:
        raise DegenerateError("sin(theta) = 0: the projection is a point, not a circle")
    eps = 1.0 if q > 0 else -1.0
    return (q - 2.0 * cos_theta) / (eps * sin_theta)


def projected_curvature_from_frenet(kappa: float, tau: float) -> float:
    """``(kappa^2 + tau^2 - 1) / kappa``."""
    if kappa == 0.0:
        raise DegenerateError("kappa = 0: no projected circle")
    return (kappa * kappa + tau * tau - 1.0) / kappa


def tube_mean_curvature(kappa_beta: float) -> float:
    return 0.5 * kappa_beta


# -- projected circle of a magnetic trajectory --------------------------------

@dataclass(frozen=True)
class ProjectedCircle:
    """Circle traced on ``S^2(r)`` by a magnetic trajectory.

    ``axis`` is the rotation axis, ``rate`` the angular speed about it per
    unit arclength ``s`` of the trajectory, ``R`` the Euclidean radius.
    """

    axis: np.ndarray
    rate: float
    R: float
    speed: float  # |beta'| per unit s, equals sin(theta)
    start: np.ndarray

    def at_s(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        rot = su2.exp_array(0.5 * self.rate * s[..., None] * self.axis)
        return su2.ad_array(rot, np.broadcast_to(self.start, s.shape + (3,)))

    def at_u(self, u) -> np.ndarray:
        return self.at_s(np.asarray(u, dtype=float) / self.speed)

    @property
    def length(self) -> float:
        return 2.0 * math.pi * self.R


def projected_circle(t0, params: SasakiParams, start=su2.IDENTITY) -> ProjectedCircle:
    """Projection of the trajectory through ``start`` with frame tangent ``t0``."""
    sin_theta = math.hypot(t0[0], t0[1])
    if sin_theta < 1e-14:
        raise DegenerateError("Reeb orbit: the projection is a point")
    qt = q_tilde(params, float(t0[2]))
    n = frame_to_algebra(t0, params.alpha) - np.array([0.0, 0.0, 0.5 * qt])
    big_omega = float(np.linalg.norm(n))
    # beta(s) = Ad(start exp(s n))(r k): rotation by 2 s |n| about Ad(start) n
    axis = np.array(su2.ad_action(start, n)) / big_omega
    y0 = np.array(project(start, params))
    R = float(np.linalg.norm(np.cross(axis, y0)))
    return ProjectedCircle(axis=axis, rate=2.0 * big_omega, R=R, speed=sin_theta, start=y0)


# -- horizontal lift ------------------------------------------------------------

@dataclass
class HorizontalLift:
    """Horizontal lift of a sampled base curve, with exact re-stepping between nodes."""

    u: np.ndarray
    points: np.ndarray  # (N, 4)
    spline: CubicSpline
    params: SasakiParams

    def _velocity(self, u, g):
        # horizontal X with pi_*(g X) = beta'(u):  2 r (X x k) = Ad(g^-1) beta'
        w = su2.ad_action(su2.conj(g), self.spline(u, 1))
        f = 1.0 / (2.0 * self.params.r)
        return (-w[1] * f, w[0] * f, 0.0)

    def _step(self, g, u, h):
        return _rkmk4_state_dependent(g, u, h, self._velocity)

    def at(self, u: float) -> su2.Su2Element:
        if not self.u[0] - 1e-12 <= u <= self.u[-1] + 1e-12:
            raise DomainError(f"u={u!r} outside the sampled range [{self.u[0]}, {self.u[-1]}]")
        i = int(np.clip(np.searchsorted(self.u, u, side="right") - 1, 0, len(self.u) - 1))
        g = tuple(self.points[i])
        h = u - self.u[i]
        if h == 0.0:
            return su2.Su2Element(*g)
        return su2.normalize(self._step(g, self.u[i], h))

    @property
    def end_phase(self) -> float:
        """Fiber angle ``delta`` with ``lift(end) = lift(start) a_delta``."""
        return fiber_phase(self.points[0], self.points[-1])


def _rkmk4_state_dependent(g, u, h, field):
    """RKMK4 step for ``g' = g X(u, g)`` on SU(2)."""
    dexpinv = su2.dexpinv
    k1 = field(u, g)
    th = [0.5 * h * x for x in k1]
    k2 = dexpinv(th, field(u + 0.5 * h, su2._qmul(g, su2.exp_su2(th))))
    th = [0.5 * h * x for x in k2]
    k3 = dexpinv(th, field(u + 0.5 * h, su2._qmul(g, su2.exp_su2(th))))
    th = [h * x for x in k3]
    k4 = dexpinv(th, field(u + h, su2._qmul(g, su2.exp_su2(th))))
    theta = [h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in range(3)]
    return su2._qmul(g, su2.exp_su2(theta))


def horizontal_lift(beta, u, start, params: SasakiParams) -> HorizontalLift:
    """Lift a sampled base curve ``beta`` (``(N, 3)`` on ``S^2(r)``) through ``start``.

    ``u`` are the (arclength) parameters of the samples.  The base velocity
    comes from a cubic spline through the samples.
    """
    beta = np.asarray(beta, dtype=float)
    u = np.asarray(u, dtype=float)
    if beta.ndim != 2 or beta.shape[1] != 3 or len(beta) != len(u) or len(u) < 2:
        raise DomainError("beta must be an (N, 3) array matching the parameter grid")
    y0 = np.array(project(start, params))
    if np.linalg.norm(y0 - beta[0]) > LIFT_START_TOL:
        raise ContractError(f"start projects to {y0}, not to beta(0) = {beta[0]}")
    spline = CubicSpline(u, beta, axis=0)
    lift = HorizontalLift(u=u, points=np.empty((len(u), 4)), spline=spline, params=params)
    g = tuple(map(float, start))
    lift.points[0] = g
    for i in range(1, len(u)):
        g = su2.normalize(lift._step(g, u[i - 1], u[i] - u[i - 1]))
        lift.points[i] = g
    return lift


def horizontality_residual(lift: HorizontalLift) -> float:
    """Max of ``|<g^-1 g', k>_1|`` over the nodes (velocity from the spline field)."""
    worst = 0.0
    for ui, g in zip(lift.u, lift.points):
        # vertical component of the left-trivialized velocity by finite difference
        h = 1e-6 * max(1.0, lift.u[-1] - lift.u[0])
        lo, hi = max(lift.u[0], ui - h), min(lift.u[-1], ui + h)
        a, b = lift.at(lo), lift.at(hi)
        d = su2._qmul(su2.conj(g), np.subtract(b, a) / (hi - lo))
        worst = max(worst, abs(d[3]))
    return worst


def measured_holonomy(R: float, params: SasakiParams, n: int = 2000, axis=(0.0, 0.0, 1.0)) -> float:
    """Fiber angle gained by lifting the circle of radius ``R`` once around."""
    L = 2.0 * math.pi * R
    u = np.linspace(0.0, L, n + 1)
    beta = circle_on_sphere(R, params, u, axis=axis)
    start = point_over(beta[0], params)
    return horizontal_lift(beta, u, start, params).end_phase


# -- Hopf tubes -----------------------------------------------------------------

def hopf_tube(beta_lift: HorizontalLift, t: float, u: float, params: SasakiParams, reeb_time: bool = False):
    """``F(t, u) = lift(u) a_t``.

    With ``reeb_time`` the fiber is parametrized by the Reeb flow
    ``exp(t k / alpha)`` (period ``2 pi alpha``, induced metric
    ``dt^2 + du^2``) instead of the angle ``t`` (metric
    ``alpha^2 dt^2 + du^2``).
    """
    angle = t / params.alpha if reeb_time else t
    return su2.quat_mul(beta_lift.at(u), fiber_element(angle))


def tube_metric(beta_lift: HorizontalLift, t: float, u: float, params: SasakiParams, h: float = 1e-5, reeb_time=False):
    """Induced metric ``[[g_tt, g_tu], [g_tu, g_uu]]`` by central differences."""
    from .sasaki import metric_ambient

    lo, hi = beta_lift.u[0], beta_lift.u[-1]
    u0, u1 = max(lo, u - h), min(hi, u + h)
    F = np.array(hopf_tube(beta_lift, t, u, params, reeb_time))
    Ft = (np.array(hopf_tube(beta_lift, t + h, u, params, reeb_time)) - np.array(hopf_tube(beta_lift, t - h, u, params, reeb_time))) / (2 * h)
    Fu = (np.array(hopf_tube(beta_lift, t, u1, params, reeb_time)) - np.array(hopf_tube(beta_lift, t, u0, params, reeb_time))) / (u1 - u0)
    gtt = metric_ambient(F, Ft, Ft, params)
    gtu = metric_ambient(F, Ft, Fu, params)
    guu = metric_ambient(F, Fu, Fu, params)
    return np.array([[gtt, gtu], [gtu, guu]])


def tube_mesh(q: float, cos_theta: float, params: SasakiParams, nt: int, nu: int, lift_samples: int = 2048):
    """Vertices ``(nt * nu, 4)`` and quad faces of the Hopf torus of a trajectory.

    The trajectory is the one through the identity with the default initial
    tangent.  Rows are shifted along the fiber by ``-delta u / L`` so that
    the mesh closes without a twist at the ``u`` seam.
    """
    from .flow import initial_tangent

    if nt < 3 or nu < 3:
        raise DomainError("tube mesh needs nt >= 3 and nu >= 3")
    p = SasakiParams(params.alpha, q)
    circle = projected_circle(initial_tangent(cos_theta), p)
    L = circle.length
    u = np.linspace(0.0, L, lift_samples + 1)
    lift = horizontal_lift(circle.at_u(u), u, su2.IDENTITY, p)
    delta = lift.end_phase
    verts = np.empty((nt * nu, 4))
    for j in range(nu):
        uj = L * j / nu
        base = np.array(lift.at(uj))
        t = 2.0 * math.pi * np.arange(nt) / nt - delta * uj / L
        fib = np.stack([np.cos(t), 0 * t, 0 * t, np.sin(t)], axis=-1)
        verts[j * nt:(j + 1) * nt] = su2.qmul(base, fib)
    faces = []
    for j in range(nu):
        jn = (j + 1) % nu
        for i in range(nt):
            inn = (i + 1) % nt
            faces.append((j * nt + i, j * nt + inn, jn * nt + inn, jn * nt + i))
    return verts, np.array(faces, dtype=int)


def geodesic_on_tube_check(trajectory: Trajectory, params: SasakiParams) -> float:
    """Largest tube-tangential component of the measured acceleration.

    The acceleration ``nabla_T T`` is rebuilt from fourth-order finite
    differences of the sampled frame components; the tube tangent plane is
    spanned by ``T`` and ``xi``.
    """
    T = np.asarray(trajectory.tangent, dtype=float)
    s = np.asarray(trajectory.s, dtype=float)
    if len(s) < 5:
        raise DomainError("need at least 5 samples")
    dT = fd_derivative(T, s[1] - s[0])
    acc = dT + np.einsum("ni,nj,ijk->nk", T, T, christoffel(params))
    xi = np.array([0.0, 0.0, 1.0])
    horiz = T - T[:, 2:3] * xi
    hn = np.linalg.norm(horiz, axis=1)
    a_xi = acc[:, 2]
    with np.errstate(invalid="ignore", divide="ignore"):
        a_h = np.where(hn > 1e-12, np.sum(acc * horiz, axis=1) / np.where(hn > 0, hn, 1.0), 0.0)
    return float(np.max(np.hypot(a_xi, a_h)))


def fd_derivative(values, h: float) -> np.ndarray:
    """Fourth-order central differences along axis 0 (one-sided at the ends)."""
    v = np.asarray(values, dtype=float)
    d = np.empty_like(v)
    d[2:-2] = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)
    # fourth-order one-sided stencils
    c = np.array([-25, 48, -36, 16, -3]) / (12 * h)
    d[0] = np.tensordot(c, v[:5], axes=1)
    d[1] = np.tensordot(np.array([-3, -10, 18, -6, 1]) / (12 * h), v[:5], axes=1)
    d[-1] = -np.tensordot(c, v[::-1][:5], axes=1)
    d[-2] = -np.tensordot(np.array([-3, -10, 18, -6, 1]) / (12 * h), v[::-1][:5], axes=1)
    return d


def fit_circle_residual(points) -> float:
    """Max distance of 3D points from their best-fit plane (circle test on a sphere)."""
    pts = np.asarray(points, dtype=float)
    center = pts.mean(axis=0)
    normal = np.linalg.svd(pts - center)[2][-1]
    return float(np.max(np.abs((pts - center) @ normal)))
