"""Normal magnetic curves ``nabla_T T = q phi T`` on the Berger spheres."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import su2
from .errors import ContractError, DegenerateError, DomainError
from .sasaki import FrameVector, SasakiParams, christoffel, frame_to_algebra, q_tilde

DEFAULT_DS = 1e-3
UNIT_SPEED_TOL = 1e-10


class TrajectorySample(NamedTuple):
    s: float
    position: su2.Su2Element
    tangent: FrameVector
    residual_norm: float
    residual_speed: float
    residual_angle: float


@dataclass(frozen=True)
class Trajectory(Sequence):
    """Sampled trajectory stored column-wise.

    Indexing yields :class:`TrajectorySample` records; the arrays are
    available directly for vectorized post-processing.
    """

    s: np.ndarray
    position: np.ndarray
    tangent: np.ndarray
    res_norm: np.ndarray
    res_speed: np.ndarray
    res_angle: np.ndarray

    def __len__(self):
        return len(self.s)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Trajectory(*(getattr(self, f)[i] for f in self._fields))
        return TrajectorySample(
            float(self.s[i]),
            su2.Su2Element(*map(float, self.position[i])),
            FrameVector(*map(float, self.tangent[i])),
            float(self.res_norm[i]),
            float(self.res_speed[i]),
            float(self.res_angle[i]),
        )

    _fields = ("s", "position", "tangent", "res_norm", "res_speed", "res_angle")

    @classmethod
    def from_samples(cls, samples):
        return cls(
            np.array([x.s for x in samples]),
            np.array([x.position for x in samples], dtype=float),
            np.array([x.tangent for x in samples], dtype=float),
            np.array([x.residual_norm for x in samples]),
            np.array([x.residual_speed for x in samples]),
            np.array([x.residual_angle for x in samples]),
        )


@dataclass(frozen=True)
class FrenetInvariants:
    kappa: float
    tau: Optional[float]
    theta: float
    epsilon: int


# -- vector field -----------------------------------------------------------

def _rhs_coefficients(params: SasakiParams):
    """Coefficients of ``T'_k = q (phi T)_k - sum_ij G_ijk T_i T_j`` as plain floats."""
    G = christoffel(params)
    return [
        [(i, j, -float(G[i, j, k])) for i in range(3) for j in range(3) if G[i, j, k] != 0.0]
        for k in range(3)
    ]


def lorentz_rhs(tangent, params: SasakiParams) -> FrameVector:
    """Derivative of the frame components of ``T`` along a magnetic curve.

    Assembled from the Levi-Civita table and the Lorentz force, so it reduces
    to ``(q~ T2, -q~ T1, 0)`` only through the geometry, not by construction.
    """
    t = tuple(map(float, tangent))
    coeff = _rhs_coefficients(params)
    q = params.q
    force = (q * t[1], -q * t[0], 0.0)
    return FrameVector(*(force[k] + sum(c * t[i] * t[j] for i, j, c in coeff[k]) for k in range(3)))


def tangent_closed_form(t0, q_tilde_value: float, s):
    """Exact solution of ``T1' = q~ T2, T2' = -q~ T1, T3' = 0`` with ``T(0) = t0``.

    ``s`` may be a scalar (returns :class:`FrameVector`) or an array
    (returns an ``(N, 3)`` array).
    """
    t1, t2, t3 = map(float, t0)
    phase = q_tilde_value * np.asarray(s, dtype=float)
    c, sn = np.cos(phase), np.sin(phase)
    out = (t1 * c + t2 * sn, -t1 * sn + t2 * c, t3 + 0.0 * phase)
    if np.ndim(s) == 0:
        return FrameVector(*map(float, out))
    return np.stack(out, axis=-1)


def closed_form_position(start, t0, params: SasakiParams, s) -> np.ndarray:
    """Exact position ``start exp(s N) exp(s q~ k / 2)``.

    ``N`` is the initial left-trivialized velocity minus ``q~ k / 2``.  The
    second factor undoes the rotation of the horizontal velocity, which is
    why the product solves the reconstruction equation.  Returns ``(N, 4)``
    (or ``(4,)`` for scalar ``s``).
    """
    s = np.asarray(s, dtype=float)
    qt = q_tilde(params, float(t0[2]))
    n = frame_to_algebra(t0, params.alpha) - np.array([0.0, 0.0, 0.5 * qt])
    inner = su2.exp_array(s[..., None] * n)
    half = 0.5 * qt * s
    outer = np.stack([np.cos(half), 0 * half, 0 * half, np.sin(half)], axis=-1)
    return su2.qmul(su2.qmul(np.asarray(start, dtype=float), inner), outer)


def closed_form_derivatives(start, t0, params: SasakiParams, s, order: int = 3) -> list:
    """Ambient derivatives ``[gamma, gamma', ..., gamma^(order)]`` of the closed form.

    With ``gamma = P(s) Q(s)``, ``P' = P N``, ``Q' = (q~ k / 2) Q`` every
    derivative has the form ``P M Q`` with ``M_{n+1} = N M_n + M_n q~ k / 2``.
    """
    s = np.asarray(s, dtype=float)
    qt = q_tilde(params, float(t0[2]))
    n = frame_to_algebra(t0, params.alpha) - np.array([0.0, 0.0, 0.5 * qt])
    P = su2.qmul(np.asarray(start, dtype=float), su2.exp_array(s[..., None] * n))
    half = 0.5 * qt * s
    Q = np.stack([np.cos(half), 0 * half, 0 * half, np.sin(half)], axis=-1)
    Nq = np.array([0.0, *n])
    Kq = np.array([0.0, 0.0, 0.0, 0.5 * qt])
    M = np.array([1.0, 0.0, 0.0, 0.0])
    out = []
    for _ in range(order + 1):
        out.append(su2.qmul(su2.qmul(P, M), Q))
        M = su2.qmul(Nq, M) + su2.qmul(M, Kq)
    return out


# -- integrator -------------------------------------------------------------

class _LieStepper:
    """Fourth-order Runge-Kutta-Munthe-Kaas step for ``(gamma, T)``.

    ``gamma' = gamma omega(T)`` on SU(2), ``T' = F(T)`` in frame components.
    The group update is ``gamma exp(Theta)`` with ``Theta`` from RK4 applied
    to ``Theta' = dexp^{-1}_{-Theta}(omega)``.
    """

    def __init__(self, params: SasakiParams):
        self.sa = 1.0 / math.sqrt(params.alpha)
        self.ia = 1.0 / params.alpha
        self.q = params.q
        self.coeff = _rhs_coefficients(params)

    def rhs(self, t):
        q = self.q
        f = [q * t[1], -q * t[0], 0.0]
        for k in range(3):
            for i, j, c in self.coeff[k]:
                f[k] += c * t[i] * t[j]
        return f

    def omega(self, t):
        return (t[0] * self.sa, t[1] * self.sa, t[2] * self.ia)

    dexpinv = staticmethod(su2.dexpinv)

    def step(self, g, t, h):
        """Advance one step; returns ``(raw group element, new tangent)``."""
        k1 = self.rhs(t)
        w1 = self.omega(t)
        h2 = 0.5 * h

        t2 = [t[i] + h2 * k1[i] for i in range(3)]
        k2 = self.rhs(t2)
        w2 = self.dexpinv([h2 * x for x in w1], self.omega(t2))

        t3 = [t[i] + h2 * k2[i] for i in range(3)]
        k3 = self.rhs(t3)
        w3 = self.dexpinv([h2 * x for x in w2], self.omega(t3))

        t4 = [t[i] + h * k3[i] for i in range(3)]
        k4 = self.rhs(t4)
        w4 = self.dexpinv([h * x for x in w3], self.omega(t4))

        h6 = h / 6.0
        theta = [h6 * (w1[i] + 2.0 * w2[i] + 2.0 * w3[i] + w4[i]) for i in range(3)]
        t_new = [t[i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in range(3)]
        return su2._qmul(g, su2.exp_su2(theta)), t_new


def check_unit_speed(t0, tol: float = UNIT_SPEED_TOL):
    speed2 = float(np.dot(t0, t0))
    if abs(speed2 - 1.0) > tol:
        raise ContractError(f"initial tangent must have unit speed, g(T,T) = {speed2!r}")


def integrate(start, t0, params: SasakiParams, ds: float = DEFAULT_DS, n_steps: int = 1000) -> Trajectory:
    """Integrate the Lorentz equation from ``start`` with initial frame tangent ``t0``.

    Returns ``n_steps + 1`` samples including the initial point.  Positions
    are renormalized after each step; ``res_norm`` records the drift of the
    unnormalized product.
    """
    if not ds > 0:
        raise DomainError(f"step size must be positive, got {ds!r}")
    if n_steps < 0:
        raise DomainError(f"n_steps must be non-negative, got {n_steps!r}")
    check_unit_speed(t0)

    stepper = _LieStepper(params)
    g = tuple(map(float, start))
    t = [float(x) for x in t0]
    n = n_steps + 1
    pos = np.empty((n, 4))
    tan = np.empty((n, 3))
    drift = np.zeros(n)
    pos[0] = g
    tan[0] = t
    drift[0] = math.sqrt(sum(x * x for x in g)) - 1.0
    for i in range(1, n):
        raw, t = stepper.step(g, t, ds)
        nrm = math.sqrt(raw[0] ** 2 + raw[1] ** 2 + raw[2] ** 2 + raw[3] ** 2)
        g = (raw[0] / nrm, raw[1] / nrm, raw[2] / nrm, raw[3] / nrm)
        pos[i] = g
        tan[i] = t
        drift[i] = nrm - 1.0
    s = ds * np.arange(n)
    return Trajectory(
        s=s,
        position=pos,
        tangent=tan,
        res_norm=drift,
        res_speed=np.sum(tan * tan, axis=1) - 1.0,
        res_angle=tan[:, 2] - tan[0, 2],
    )


def step_from(sample_pos, sample_tan, params: SasakiParams, h: float):
    """Single integrator step of arbitrary length ``h`` (used for refinement)."""
    stepper = _LieStepper(params)
    raw, t = stepper.step(tuple(map(float, sample_pos)), [float(x) for x in sample_tan], h)
    return np.array(su2.normalize(raw)), np.array(t)


def trajectory_from_positions(s, position, tangent, params: SasakiParams) -> Trajectory:
    """Wrap externally computed samples (closed forms) in a :class:`Trajectory`."""
    position = np.asarray(position, dtype=float)
    tangent = np.asarray(tangent, dtype=float)
    return Trajectory(
        s=np.asarray(s, dtype=float),
        position=position,
        tangent=tangent,
        res_norm=np.linalg.norm(position, axis=1) - 1.0,
        res_speed=np.sum(tangent * tangent, axis=1) - 1.0,
        res_angle=tangent[:, 2] - tangent[0, 2],
    )


def closed_form_trajectory(start, t0, params: SasakiParams, s) -> Trajectory:
    s = np.asarray(s, dtype=float)
    qt = q_tilde(params, float(t0[2]))
    return trajectory_from_positions(
        s, closed_form_position(start, t0, params, s), tangent_closed_form(t0, qt, s), params
    )


def initial_tangent(cos_theta: float, t1: Optional[float] = None, t2: Optional[float] = None) -> FrameVector:
    """Unit frame tangent with contact angle ``theta``.

    Defaults to ``(0, sin(theta), cos(theta))``, the choice under which the
    closed-form S^3 curve of :func:`ikawa_curve` is the trajectory through
    the identity.
    """
    if abs(cos_theta) > 1.0:
        raise DomainError(f"|cos_theta| must be <= 1, got {cos_theta!r}")
    if t1 is None and t2 is None:
        return FrameVector(0.0, math.sqrt(max(0.0, 1.0 - cos_theta**2)), float(cos_theta))
    if t1 is None or t2 is None:
        raise DomainError("give both t1 and t2 or neither")
    t0 = FrameVector(float(t1), float(t2), float(cos_theta))
    check_unit_speed(t0)
    return t0


# -- Frenet data ------------------------------------------------------------

def frenet(params: SasakiParams, cos_theta: float) -> FrenetInvariants:
    """Curvature ``|q| sin(theta)`` and torsion ``q cos(theta) - 1``.

    For ``q = 0`` the curve is a geodesic and the torsion is reported as
    ``None``.
    """
    if abs(cos_theta) > 1.0:
        raise DomainError(f"|cos_theta| must be <= 1, got {cos_theta!r}")
    sin_theta = math.sqrt(max(0.0, 1.0 - cos_theta * cos_theta))
    theta = math.acos(cos_theta)
    q = params.q
    if q == 0.0:
        return FrenetInvariants(kappa=0.0, tau=None, theta=theta, epsilon=1)
    return FrenetInvariants(
        kappa=abs(q) * sin_theta,
        tau=q * cos_theta - 1.0,
        theta=theta,
        epsilon=1 if q > 0 else -1,
    )


def s3_frenet(d0, d1, d2, d3):
    """Curvature and signed torsion of a unit-speed curve in the unit S^3.

    Inputs are ambient R^4 derivatives of order 0..3 (arrays ``(N, 4)``).
    ``B`` is chosen so that ``(gamma, T, N, B)`` is positively oriented.
    """
    acc = d2 + d0  # covariant acceleration on the unit sphere
    kappa = np.linalg.norm(acc, axis=-1)
    N = acc / kappa[..., None]
    jerk = d3 + d1 + (kappa**2)[..., None] * d1  # = kappa tau B for constant kappa
    B = _complete_frame(d0, d1, N)
    tau = np.sum(jerk * B, axis=-1) / kappa
    return kappa, tau


def _complete_frame(x, t, n):
    # generalized cross product in R^4: B_i = det(x, t, n, e_i)
    m = np.stack([x, t, n], axis=-2)
    cols = []
    for i in range(4):
        e = np.zeros(4)
        e[i] = 1.0
        full = np.concatenate([m, np.broadcast_to(e, m.shape[:-2] + (1, 4))], axis=-2)
        cols.append(np.linalg.det(full))
    return np.stack(cols, axis=-1)


# -- explicit curves on the unit S^3 ---------------------------------------

def _ikawa_check(cos_theta):
    if not abs(cos_theta) < 1.0:
        raise DegenerateError(
            f"closed-form S^3 curve needs |cos_theta| < 1, got {cos_theta!r}; "
            "the fiber case is covered by integrate()"
        )


def ikawa_coords(cos_theta: float, s) -> np.ndarray:
    """R^4 coordinates ``(x1, x2, x3, x4)`` of the strength-1 S^3 magnetic curve.

    ``x2`` carries a plus sign in front of its second term; with a minus
    sign the curve leaves the sphere.
    """
    _ikawa_check(cos_theta)
    s = np.asarray(s, dtype=float)
    w = math.sqrt(1.25 - cos_theta)
    sin_theta = math.sqrt(1.0 - cos_theta * cos_theta)
    C = (cos_theta - 0.5) / w
    ch, sh = np.cos(0.5 * s), np.sin(0.5 * s)
    cw, sw = np.cos(w * s), np.sin(w * s)
    return np.stack(
        [
            ch * cw - C * sh * sw,
            sh * cw + C * ch * sw,
            (sin_theta / w) * ch * sw,
            (sin_theta / w) * sh * sw,
        ],
        axis=-1,
    )


def ikawa_curve(cos_theta: float, s: float) -> su2.Su2Element:
    """The S^3 curve as a group element (first-column identification)."""
    return su2.Su2Element(*map(float, su2.from_r4(ikawa_coords(cos_theta, s))))


def ikawa_array(cos_theta: float, s) -> np.ndarray:
    """Quaternion components ``(N, 4)`` of the curve at the parameters ``s``."""
    return su2.from_r4(ikawa_coords(cos_theta, s))


def model_helix_coords(psi: float, a: float, b: float, s) -> np.ndarray:
    constraint = a * a * math.cos(psi) ** 2 + b * b * math.sin(psi) ** 2
    if abs(constraint - 1.0) > 1e-10:
        raise ContractError(
            f"helix parameters must satisfy a^2 cos^2(psi) + b^2 sin^2(psi) = 1, got {constraint!r}"
        )
    s = np.asarray(s, dtype=float)
    cp, sp = math.cos(psi), math.sin(psi)
    return np.stack(
        [cp * np.cos(a * s), cp * np.sin(a * s), sp * np.cos(b * s), sp * np.sin(b * s)], axis=-1
    )


def model_helix(psi: float, a: float, b: float, s: float) -> su2.Su2Element:
    return su2.Su2Element(*map(float, su2.from_r4(model_helix_coords(psi, a, b, s))))


def model_helix_derivatives(psi, a, b, s, order=3) -> list:
    """Ambient derivatives of the model helix in R^4 coordinates."""
    s = np.asarray(s, dtype=float)
    cp, sp = math.cos(psi), math.sin(psi)
    out = []
    for n in range(order + 1):
        pa, pb = a**n, b**n
        shift = n * math.pi / 2.0
        out.append(
            np.stack(
                [
                    cp * pa * np.cos(a * s + shift),
                    cp * pa * np.sin(a * s + shift),
                    sp * pb * np.cos(b * s + shift),
                    sp * pb * np.sin(b * s + shift),
                ],
                axis=-1,
            )
        )
    return out


def helix_periodic_params(p, psi: float):
    """``a = 1/sqrt(p^2 sin^2 psi + cos^2 psi)``, ``b = p a``."""
    p = float(p)
    a = 1.0 / math.sqrt(p * p * math.sin(psi) ** 2 + math.cos(psi) ** 2)
    return a, p * a


def helix_from_frenet(kappa: float, tau: float):
    """Model-helix parameters ``(psi, a, b)`` with the given curvature and torsion.

    Uses ``a^2 + b^2 = 1 + kappa^2 + tau^2`` and ``a b = tau`` with
    ``a >= 1 >= |b|``.
    """
    total = 1.0 + kappa * kappa + tau * tau
    disc = math.sqrt(max(0.0, total * total - 4.0 * tau * tau))
    a = math.sqrt(0.5 * (total + disc))
    b = tau / a
    if abs(a * a - b * b) < 1e-15:
        raise DegenerateError("curvature zero: the helix is a great circle")
    cos2 = (1.0 - b * b) / (a * a - b * b)
    psi = math.acos(math.sqrt(min(1.0, max(0.0, cos2))))
    return psi, a, b
