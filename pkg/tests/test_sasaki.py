import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bergerflow import DomainError, su2
from bergerflow.sasaki import (
    SasakiParams,
    algebra_to_frame,
    ambient_to_frame,
    covariant_derivative,
    curvature_tables,
    d_homothetic,
    eta,
    frame_to_algebra,
    frame_to_ambient,
    fundamental_form,
    levi_civita,
    lorentz_force,
    metric_ambient,
    metric_g,
    params_from_alpha,
    params_from_c,
    q_tilde,
    ricci,
    structure_phi,
)

alphas = st.floats(0.05, 20.0)


def hand_connection(alpha):
    """nabla_{e_i} e_j worked out by hand from [e1,e2] = 2 e3, [e2,e3] = (2/alpha) e1, [e3,e1] = (2/alpha) e2."""
    k = 2.0 / alpha - 1.0
    z = (0.0, 0.0, 0.0)
    return {
        (1, 1): z, (1, 2): (0.0, 0.0, 1.0), (1, 3): (0.0, -1.0, 0.0),
        (2, 1): (0.0, 0.0, -1.0), (2, 2): z, (2, 3): (1.0, 0.0, 0.0),
        (3, 1): (0.0, k, 0.0), (3, 2): (-k, 0.0, 0.0), (3, 3): z,
    }


@settings(max_examples=30)
@given(alphas)
def test_connection_matches_hand_table(alpha):
    table = hand_connection(alpha)
    p = SasakiParams(alpha)
    for (i, j), v in table.items():
        assert np.allclose(levi_civita(i, j, p), v, atol=1e-13)


def test_levi_civita_returns_floats_and_checks_indices():
    v = levi_civita(1, 2, SasakiParams(2.0))
    assert all(type(x) is float for x in v)
    with pytest.raises(IndexError):
        levi_civita(0, 1, SasakiParams(1.0))
    with pytest.raises(IndexError):
        levi_civita(1, 4, SasakiParams(1.0))


def test_round_sphere_connection_is_half_bracket():
    p = SasakiParams(1.0)
    for i, X in enumerate((su2.I, su2.J, su2.K), 1):
        for j, Y in enumerate((su2.I, su2.J, su2.K), 1):
            assert np.allclose(levi_civita(i, j, p), 0.5 * np.array(su2.bracket(X, Y)), atol=1e-15)


@settings(max_examples=20)
@given(alphas)
def test_curvature_tables_random_alpha(alpha):
    rep = curvature_tables(SasakiParams(alpha))
    c = 4.0 / alpha - 3.0
    assert rep.K12 == pytest.approx(c, abs=1e-10)
    assert rep.K13 == pytest.approx(1.0, abs=1e-10)
    assert rep.K23 == pytest.approx(1.0, abs=1e-10)
    assert rep.Ric11 == pytest.approx(c + 1, abs=1e-10)
    assert rep.Ric22 == pytest.approx(c + 1, abs=1e-10)
    assert rep.Ric33 == pytest.approx(2.0, abs=1e-10)
    assert rep.scal == pytest.approx(2 * (c + 2), abs=1e-10)


def test_ricci_is_diagonal_and_symmetric():
    Ric = ricci(SasakiParams(0.7))
    assert np.allclose(Ric, Ric.T, atol=1e-14)
    assert np.allclose(Ric - np.diag(np.diag(Ric)), 0, atol=1e-14)


def test_params_and_homothety():
    p = SasakiParams(4.0, q=2)
    assert p.c == -2.0 and p.r == 1.0 and p.q == 2.0
    assert params_from_c(1.0).alpha == 1.0
    assert params_from_alpha(2.0, 1.0) == SasakiParams(2.0, 1.0)
    for alpha in (0.25, 0.5, 2.0):
        assert params_from_c(SasakiParams(alpha).c).alpha == pytest.approx(alpha)
        assert d_homothetic(1.0, alpha) == pytest.approx(SasakiParams(alpha).c)
    assert d_homothetic(Fraction(1), Fraction(1, 2)) == 5
    assert d_homothetic(1, 4) == -2
    with pytest.raises(DomainError):
        SasakiParams(0.0)
    with pytest.raises(DomainError):
        params_from_c(-3.0)
    with pytest.raises(DomainError):
        d_homothetic(1.0, -1.0)


def test_q_tilde():
    p = SasakiParams(0.5, 1.0)  # c = 5
    assert q_tilde(p, 0.5) == pytest.approx(1.0 + 2.0 * 0.5)
    assert q_tilde(SasakiParams(1.0, 3.0), 0.9) == 3.0
    with pytest.raises(DomainError):
        q_tilde(p, 1.5)


@given(st.tuples(*[st.floats(-5, 5)] * 3), st.tuples(*[st.floats(-5, 5)] * 3))
def test_structure_tensors(v, w):
    pv = structure_phi(v)
    assert eta(pv) == 0.0
    ppv = structure_phi(pv)
    assert np.allclose(ppv, (-v[0], -v[1], 0.0))
    assert fundamental_form(v, w) == pytest.approx(-fundamental_form(w, v), abs=1e-12)
    assert metric_g(pv, structure_phi(w)) == pytest.approx(metric_g(v, w) - eta(v) * eta(w), abs=1e-9)
    assert np.allclose(lorentz_force(v, SasakiParams(1.0, 2.0)), 2 * np.array(pv))


@settings(max_examples=50)
@given(alphas, st.tuples(*[st.floats(-2, 2)] * 3), st.tuples(*[st.floats(-2, 2)] * 3))
def test_ambient_metric_matches_frame_metric(alpha, v, w):
    p = SasakiParams(alpha)
    rng = np.random.default_rng(0)
    a = np.array(su2.normalize(rng.normal(size=4)))
    dv, dw = frame_to_ambient(a, v, p), frame_to_ambient(a, w, p)
    assert metric_ambient(a, dv, dw, p) == pytest.approx(metric_g(v, w), abs=1e-9)
    assert np.allclose(ambient_to_frame(a, dv, p), v, atol=1e-12)
    assert np.allclose(algebra_to_frame(frame_to_algebra(v, alpha), alpha), v)


def test_frame_scaling_examples():
    assert np.allclose(frame_to_algebra((1, 1, 1), 4.0), (0.5, 0.5, 0.25))


def test_covariant_derivative_of_constant_frame_vector():
    p = SasakiParams(2.0)
    v = np.array([0.3, -0.4, 0.5])
    G = np.zeros(3)
    for i in range(3):
        for j in range(3):
            G += v[i] * v[j] * np.array(levi_civita(i + 1, j + 1, p))
    assert np.allclose(covariant_derivative(v, np.zeros(3), p), G)
    # left-invariant vectors X with nabla_X X = 0 for horizontal or vertical X
    assert np.allclose(covariant_derivative([1.0, 0.0, 0.0], [0, 0, 0], p), 0)
    assert np.allclose(covariant_derivative([0.0, 0.0, 1.0], [0, 0, 0], p), 0)
    # mixed ones drift: nabla_v v = (1 - k) v3 (v2, -v1, 0) with k = 2/alpha - 1
    k = 2.0 / p.alpha - 1.0
    assert np.allclose(covariant_derivative(v, [0, 0, 0], p), (1 - k) * v[2] * np.array([v[1], -v[0], 0.0]))
    assert math.isclose(np.linalg.norm(covariant_derivative(v, [0, 0, 0], SasakiParams(1.0))), 0.0, abs_tol=1e-15)
