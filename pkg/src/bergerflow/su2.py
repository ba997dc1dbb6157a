"""SU(2) as unit quaternions and its Lie algebra su(2).

A group element ``x0 + x1 i + x2 j + x3 k`` corresponds to the matrix

    [[x0 + i x3, -x2 + i x1],
     [x2 + i x1,  x0 - i x3]]

and a Lie algebra element ``v1 i + v2 j + v3 k`` to the traceless
skew-Hermitian matrix with the same coefficients.  With this basis the
Hamilton product is the matrix product, the matrix commutator is twice the
cross product, and ``-tr(XY)/2`` is the Euclidean dot product.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

NORM_TOL = 1e-12
_SERIES_CUTOFF = 1e-6


class Su2Element(NamedTuple):
    x0: float
    x1: float
    x2: float
    x3: float


class Su2Vector(NamedTuple):
    v1: float
    v2: float
    v3: float


IDENTITY = Su2Element(1.0, 0.0, 0.0, 0.0)
I = Su2Vector(1.0, 0.0, 0.0)
J = Su2Vector(0.0, 1.0, 0.0)
K = Su2Vector(0.0, 0.0, 1.0)


def _qmul(a, b):
    a0, a1, a2, a3 = a
    b0, b1, b2, b3 = b
    return (
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    )


def normalize(a) -> Su2Element:
    n = math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2] + a[3] * a[3])
    return Su2Element(a[0] / n, a[1] / n, a[2] / n, a[3] / n)


def quat_mul(a, b) -> Su2Element:
    """Group product ``a b``, renormalized onto the unit sphere."""
    return normalize(_qmul(a, b))


def conj(a) -> Su2Element:
    """Inverse of a unit quaternion."""
    return Su2Element(a[0], -a[1], -a[2], -a[3])


inverse = conj


def qmul(a, b) -> np.ndarray:
    """Vectorized Hamilton product on ``(..., 4)`` arrays (no renormalization)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a0, a1, a2, a3 = np.moveaxis(a, -1, 0)
    b0, b1, b2, b3 = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ],
        axis=-1,
    )


def qconj(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a[..., 1:] *= -1.0
    return a


def bracket(X, Y) -> Su2Vector:
    """Matrix commutator ``XY - YX``; ``[i, j] = 2k`` and cyclic."""
    x1, x2, x3 = X
    y1, y2, y3 = Y
    return Su2Vector(
        2.0 * (x2 * y3 - x3 * y2),
        2.0 * (x3 * y1 - x1 * y3),
        2.0 * (x1 * y2 - x2 * y1),
    )


def inner_bi(X, Y) -> float:
    """Bi-invariant inner product ``-tr(XY)/2``."""
    return X[0] * Y[0] + X[1] * Y[1] + X[2] * Y[2]


def ad_action(a, X) -> Su2Vector:
    """``Ad(a) X = a X a^{-1}``."""
    w = _qmul(_qmul(a, (0.0, X[0], X[1], X[2])), conj(a))
    return Su2Vector(w[1], w[2], w[3])


def ad_array(a, X) -> np.ndarray:
    """Vectorized ``Ad``: ``a`` is ``(..., 4)``, ``X`` is ``(..., 3)``."""
    X = np.asarray(X, dtype=float)
    pure = np.concatenate([np.zeros(X.shape[:-1] + (1,)), X], axis=-1)
    return qmul(qmul(a, pure), qconj(a))[..., 1:]


def exp_su2(X) -> Su2Element:
    """Group exponential ``cos|X| + sin|X| X/|X|``."""
    theta = math.sqrt(X[0] * X[0] + X[1] * X[1] + X[2] * X[2])
    if theta < _SERIES_CUTOFF:
        # sin(t)/t and cos(t) to O(t^4)
        sinc = 1.0 - theta * theta / 6.0
        cos = 1.0 - theta * theta / 2.0
    else:
        sinc = math.sin(theta) / theta
        cos = math.cos(theta)
    return normalize((cos, sinc * X[0], sinc * X[1], sinc * X[2]))


def exp_array(X) -> np.ndarray:
    """Vectorized exponential of ``(..., 3)`` algebra elements."""
    X = np.asarray(X, dtype=float)
    theta = np.linalg.norm(X, axis=-1)
    small = theta < _SERIES_CUTOFF
    safe = np.where(small, 1.0, theta)
    sinc = np.where(small, 1.0 - theta**2 / 6.0, np.sin(safe) / safe)
    return np.concatenate([np.cos(theta)[..., None], sinc[..., None] * X], axis=-1)


def dexpinv(th, v) -> Su2Vector:
    """Inverse left-trivialized differential of exp, truncated for 4th-order RKMK.

    ``v + [th, v]/2 + [th, [th, v]]/12``.
    """
    b1 = bracket(th, v)
    b2 = bracket(th, b1)
    return Su2Vector(
        v[0] + 0.5 * b1[0] + b2[0] / 12.0,
        v[1] + 0.5 * b1[1] + b2[1] / 12.0,
        v[2] + 0.5 * b1[2] + b2[2] / 12.0,
    )


def log_su2(a) -> Su2Vector:
    """Principal logarithm, inverse of :func:`exp_su2` for ``|X| < pi``."""
    v = np.array(a[1:], dtype=float)
    s = float(np.linalg.norm(v))
    if s < 1e-15:
        return Su2Vector(0.0, 0.0, 0.0)
    theta = math.atan2(s, a[0])
    v *= theta / s
    return Su2Vector(*v)


def as_matrix(a) -> np.ndarray:
    """2x2 complex matrix of a group element (read-only view for tests)."""
    x0, x1, x2, x3 = a
    return np.array(
        [[x0 + 1j * x3, -x2 + 1j * x1], [x2 + 1j * x1, x0 - 1j * x3]], dtype=complex
    )


def algebra_matrix(X) -> np.ndarray:
    """2x2 complex matrix of ``X1 i + X2 j + X3 k``."""
    x1, x2, x3 = X
    return np.array([[1j * x3, -x2 + 1j * x1], [x2 + 1j * x1, -1j * x3]], dtype=complex)


def from_matrix(m) -> Su2Element:
    m = np.asarray(m)
    return Su2Element(m[0, 0].real, m[1, 0].imag, m[1, 0].real, m[0, 0].imag)


def r4_coords(a) -> np.ndarray:
    """Coordinates ``(Re z1, Im z1, Re z2, Im z2)`` of the first matrix column.

    This is the usual identification of S^3 in C^2 under which the fibers
    ``a a_t`` are the Hopf circles ``(z1 e^{it}, z2 e^{it})``.
    """
    a = np.asarray(a, dtype=float)
    return a[..., [0, 3, 2, 1]]


def from_r4(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[..., [0, 3, 2, 1]]
