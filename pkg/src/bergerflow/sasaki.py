"""Left-invariant Sasakian structures on SU(2) (Berger spheres).

Tangent vectors are stored by their components in the orthonormal frame

    e1 = E1 / sqrt(alpha),  e2 = E2 / sqrt(alpha),  e3 = xi = E3 / alpha,

where E1, E2, E3 are the left translates of i, j, k.  The connection and
curvature are derived from the frame brackets with the Koszul formula; the
closed-form tables are only used as test oracles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import su2
from .errors import DomainError


class FrameVector(NamedTuple):
    a1: float
    a2: float
    a3: float


@dataclass(frozen=True)
class SasakiParams:
    alpha: float
    q: float = 0.0
    c: float = field(init=False)
    r: float = field(init=False)

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha!r}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "c", 4.0 / self.alpha - 3.0)
        object.__setattr__(self, "r", math.sqrt(self.alpha) / 2.0)


@dataclass(frozen=True)
class CurvatureReport:
    R1212: float
    R1313: float
    R2323: float
    K12: float
    K13: float
    K23: float
    Ric11: float
    Ric22: float
    Ric33: float
    scal: float


def params_from_alpha(alpha, q=0.0) -> SasakiParams:
    return SasakiParams(alpha, q)


def params_from_c(c, q=0.0) -> SasakiParams:
    if not c > -3:
        raise DomainError(f"elliptic space forms need c > -3, got {c!r}")
    return SasakiParams(4.0 / (c + 3.0), q)


def d_homothetic(c, a):
    """phi-sectional curvature after a D-homothetic deformation with factor ``a``.

    Exact when both arguments are :class:`fractions.Fraction` or int.
    """
    if not a > 0:
        raise DomainError(f"deformation factor must be positive, got {a!r}")
    if isinstance(c, (int, Fraction)) and isinstance(a, (int, Fraction)):
        return Fraction(c + 3) / a - 3
    return (c + 3.0) / a - 3.0


def q_tilde(params: SasakiParams, cos_theta: float) -> float:
    """Rotation rate ``q + (c - 1) cos(theta) / 2`` of the horizontal tangent."""
    if abs(cos_theta) > 1.0:
        raise DomainError(f"|cos_theta| must be <= 1, got {cos_theta!r}")
    return params.q + 0.5 * (params.c - 1.0) * cos_theta


# -- structure tensors in frame components --------------------------------

PHI = np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
XI = np.array([0.0, 0.0, 1.0])


def structure_phi(v) -> FrameVector:
    """phi e1 = -e2, phi e2 = e1, phi e3 = 0."""
    return FrameVector(v[1], -v[0], 0.0)


def eta(v) -> float:
    return v[2]


def metric_g(v, w) -> float:
    return v[0] * w[0] + v[1] * w[1] + v[2] * w[2]


def fundamental_form(v, w) -> float:
    """Omega(X, Y) = g(phi X, Y)."""
    return metric_g(structure_phi(v), w)


def _frame_scales(alpha):
    sa = 1.0 / math.sqrt(alpha)
    return np.array([sa, sa, 1.0 / alpha])


def frame_to_algebra(v, alpha) -> np.ndarray:
    """Left-trivialized velocity (coefficients over i, j, k) of a frame vector."""
    return np.asarray(v, dtype=float) * _frame_scales(alpha)


def algebra_to_frame(X, alpha) -> np.ndarray:
    return np.asarray(X, dtype=float) / _frame_scales(alpha)


def frame_to_ambient(a, v, params: SasakiParams) -> np.ndarray:
    """Quaternion tangent ``a (v1 i/sqrt(alpha) + v2 j/sqrt(alpha) + v3 k/alpha)``."""
    X = frame_to_algebra(v, params.alpha)
    return su2.qmul(a, np.concatenate([np.zeros(np.shape(X)[:-1] + (1,)), X], axis=-1))


def ambient_to_frame(a, dx, params: SasakiParams) -> np.ndarray:
    """Frame components of an ambient tangent vector ``dx`` at ``a``."""
    X = su2.qmul(su2.qconj(a), dx)[..., 1:]
    return algebra_to_frame(X, params.alpha)


def metric_ambient(a, dx, dy, params: SasakiParams) -> np.ndarray:
    """``g = alpha g1 + alpha (alpha - 1) eta1 (x) eta1`` on ambient tangents."""
    X = su2.qmul(su2.qconj(a), dx)[..., 1:]
    Y = su2.qmul(su2.qconj(a), dy)[..., 1:]
    al = params.alpha
    return al * np.sum(X * Y, axis=-1) + al * (al - 1.0) * X[..., 2] * Y[..., 2]


# -- connection and curvature ---------------------------------------------

@lru_cache(maxsize=64)
def _tables(alpha: float):
    s = _frame_scales(alpha)
    basis = (su2.I, su2.J, su2.K)
    # [e_i, e_j] = s_i s_j [E_i, E_j], rewritten over e_k = s_k E_k
    C = np.zeros((3, 3, 3))
    for i in range(3):
        for j in range(3):
            C[i, j] = s[i] * s[j] * np.array(su2.bracket(basis[i], basis[j])) / s
    # Koszul for an orthonormal left-invariant frame:
    # 2 g(nabla_i e_j, e_k) = C_ij^k - C_jk^i + C_ki^j
    G = np.zeros((3, 3, 3))
    for i in range(3):
        for j in range(3):
            for k in range(3):
                G[i, j, k] = 0.5 * (C[i, j, k] - C[j, k, i] + C[k, i, j])
    G.setflags(write=False)
    C.setflags(write=False)
    return C, G


def frame_brackets(params: SasakiParams) -> np.ndarray:
    """``C[i, j]`` = components of ``[e_{i+1}, e_{j+1}]``."""
    return _tables(params.alpha)[0]


def christoffel(params: SasakiParams) -> np.ndarray:
    """``G[i, j]`` = components of ``nabla_{e_{i+1}} e_{j+1}``."""
    return _tables(params.alpha)[1]


def levi_civita(i: int, j: int, params: SasakiParams) -> FrameVector:
    """``nabla_{e_i} e_j`` for 1-based frame indices."""
    for n in (i, j):
        if n not in (1, 2, 3):
            raise IndexError(f"frame index must be 1, 2 or 3, got {n!r}")
    return FrameVector(*map(float, christoffel(params)[i - 1, j - 1]))


def covariant_derivative(v, dv, params: SasakiParams) -> np.ndarray:
    """``nabla_T T`` from frame components ``T`` and their derivative ``T'``.

    Both arguments may be ``(N, 3)`` arrays.
    """
    v = np.asarray(v, dtype=float)
    return np.asarray(dv, dtype=float) + np.einsum("...i,...j,ijk->...k", v, v, christoffel(params))


def curvature_operator(params: SasakiParams) -> np.ndarray:
    """``Rm[i, j]`` is the matrix of ``R(e_i, e_j)`` acting on frame components.

    ``R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y]``.
    """
    C, G = _tables(params.alpha)
    # N[i] maps components of Y to components of nabla_{e_i} Y (constant Y)
    N = np.transpose(G, (0, 2, 1))
    Rm = np.zeros((3, 3, 3, 3))
    for i in range(3):
        for j in range(3):
            Rm[i, j] = N[i] @ N[j] - N[j] @ N[i] - np.einsum("k,kab->ab", C[i, j], N)
    return Rm


def ricci(params: SasakiParams) -> np.ndarray:
    Rm = curvature_operator(params)
    # Ric(Y, Z) = sum_i g(R(e_i, Y) Z, e_i)
    return np.einsum("iyiz->yz", Rm)


def curvature_tables(params: SasakiParams) -> CurvatureReport:
    Rm = curvature_operator(params)

    def sec(i, j):
        # g(R(e_i, e_j) e_j, e_i)
        return float(Rm[i, j][i, j])

    Ric = ricci(params)
    k12, k13, k23 = sec(0, 1), sec(0, 2), sec(1, 2)
    return CurvatureReport(
        R1212=k12, R1313=k13, R2323=k23,
        K12=k12, K13=k13, K23=k23,
        Ric11=float(Ric[0, 0]), Ric22=float(Ric[1, 1]), Ric33=float(Ric[2, 2]),
        scal=float(np.trace(Ric)),
    )


def lorentz_force(v, params: SasakiParams) -> FrameVector:
    """``q phi v``."""
    p = structure_phi(v)
    return FrameVector(params.q * p[0], params.q * p[1], params.q * p[2])
