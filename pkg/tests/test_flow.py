import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bergerflow import ContractError, DegenerateError, DomainError, su2
from bergerflow.flow import (
    Trajectory,
    check_unit_speed,
    closed_form_derivatives,
    closed_form_position,
    closed_form_trajectory,
    frenet,
    helix_from_frenet,
    helix_periodic_params,
    ikawa_array,
    ikawa_coords,
    ikawa_curve,
    initial_tangent,
    integrate,
    lorentz_rhs,
    model_helix,
    model_helix_coords,
    model_helix_derivatives,
    s3_frenet,
    step_from,
    tangent_closed_form,
)
from bergerflow.hopf import fd_derivative
from bergerflow.sasaki import SasakiParams, ambient_to_frame, covariant_derivative, q_tilde

alphas = st.floats(0.1, 10.0)
charges = st.floats(-4.0, 4.0)
angles = st.floats(-1.0, 1.0)


@given(alphas, charges, st.tuples(*[st.floats(-1, 1)] * 3))
def test_lorentz_rhs_reduces_to_rotation(alpha, q, t):
    p = SasakiParams(alpha, q)
    qt = q + 0.5 * (4.0 / alpha - 4.0) * t[2]
    assert np.allclose(lorentz_rhs(t, p), (qt * t[1], -qt * t[0], 0.0), atol=1e-12)


def test_tangent_closed_form_initial_value_and_ode():
    t0 = (0.6, 0.0, 0.8)
    assert np.allclose(tangent_closed_form(t0, 1.7, 0.0), t0)
    s = np.linspace(0, 3, 3001)
    T = tangent_closed_form(t0, 1.7, s)
    dT = fd_derivative(T, s[1] - s[0])
    assert np.allclose(dT[:, 0], 1.7 * T[:, 1], atol=1e-8)
    assert np.allclose(dT[:, 1], -1.7 * T[:, 0], atol=1e-8)
    # the alternative T2 = sin(q s) T1(0) - cos(q s) T2(0) starts at -T2(0)
    t0b = (0.0, 0.6, 0.8)
    alt = math.sin(0.0) * t0b[0] - math.cos(0.0) * t0b[1]
    assert alt == -t0b[1]
    assert tangent_closed_form(t0b, 1.7, 0.0)[1] == t0b[1]


@settings(max_examples=25, deadline=None)
@given(alphas, charges, st.floats(-0.95, 0.95))
def test_closed_form_position_solves_reconstruction(alpha, q, c):
    p = SasakiParams(alpha, q)
    t0 = initial_tangent(c)
    s = np.linspace(0.0, 2.0, 5)
    d = closed_form_derivatives(su2.IDENTITY, t0, p, s, order=2)
    assert np.allclose(d[0], closed_form_position(su2.IDENTITY, t0, p, s), atol=1e-14)
    # gamma' = gamma omega(T) with T from the tangent rotation
    T = tangent_closed_form(t0, q_tilde(p, c), s)
    assert np.allclose(ambient_to_frame(d[0], d[1], p), T, atol=1e-12)
    # and T' from the second derivative satisfies nabla_T T = q phi T
    h = 1e-4
    d_plus = closed_form_derivatives(su2.IDENTITY, t0, p, s + h, order=1)
    d_minus = closed_form_derivatives(su2.IDENTITY, t0, p, s - h, order=1)
    dT = (ambient_to_frame(d_plus[0], d_plus[1], p) - ambient_to_frame(d_minus[0], d_minus[1], p)) / (2 * h)
    acc = covariant_derivative(T, dT, p)
    assert np.allclose(acc, q * np.column_stack([T[:, 1], -T[:, 0], 0 * s]), atol=1e-6)


@pytest.mark.parametrize("alpha,q,c", [(1.0, 1.0, 29 / 36), (2.0, 0.7, -0.3), (0.3, -2.0, 0.5)])
def test_integrator_matches_closed_form(alpha, q, c):
    p = SasakiParams(alpha, q)
    t0 = initial_tangent(c)
    tr = integrate(su2.IDENTITY, t0, p, 1e-3, 20_000)
    ref = closed_form_trajectory(su2.IDENTITY, t0, p, tr.s)
    assert np.max(np.abs(tr.position - ref.position)) < 1e-9
    assert np.max(np.abs(tr.tangent - ref.tangent)) < 1e-9
    assert np.max(np.abs(tr.res_norm)) < 1e-12


def test_integrator_is_fourth_order():
    p = SasakiParams(2.0, 1.3)
    t0 = initial_tangent(0.4)
    errs = []
    for h in (0.1, 0.05):
        n = int(round(4.0 / h))
        tr = integrate(su2.IDENTITY, t0, p, h, n)
        ref = closed_form_position(su2.IDENTITY, t0, p, tr.s)
        errs.append(np.max(np.abs(tr.position - ref)))
    assert 12 < errs[0] / errs[1] < 20


def test_integrate_contracts():
    p = SasakiParams(1.0, 1.0)
    with pytest.raises(ContractError):
        integrate(su2.IDENTITY, (1.0, 1.0, 0.0), p, 1e-3, 10)
    with pytest.raises(DomainError):
        integrate(su2.IDENTITY, initial_tangent(0.2), p, 0.0, 10)
    with pytest.raises(DomainError):
        integrate(su2.IDENTITY, initial_tangent(0.2), p, 1e-3, -1)
    with pytest.raises(ContractError):
        check_unit_speed((0.0, 0.0, 0.9))
    with pytest.raises(DomainError):
        initial_tangent(0.2, t1=0.1)
    with pytest.raises(DomainError):
        initial_tangent(1.2)


def test_reeb_orbit_is_a_fiber():
    for alpha in (1.0, 2.0):
        p = SasakiParams(alpha, 1.5)
        tr = integrate(su2.IDENTITY, initial_tangent(1.0), p, 1e-3, 2000)
        oracle = np.column_stack([np.cos(tr.s / alpha), 0 * tr.s, 0 * tr.s, np.sin(tr.s / alpha)])
        assert np.max(np.abs(tr.position - oracle)) < 1e-12


def test_step_from_matches_integrate():
    p = SasakiParams(1.5, 0.4)
    t0 = initial_tangent(0.1)
    tr = integrate(su2.IDENTITY, t0, p, 1e-2, 10)
    g, T = step_from(tr.position[3], tr.tangent[3], p, 1e-2)
    assert np.allclose(g, tr.position[4], atol=1e-15)
    assert np.allclose(T, tr.tangent[4], atol=1e-15)


def test_trajectory_sequence_protocol():
    tr = integrate(su2.IDENTITY, initial_tangent(0.5), SasakiParams(1.0, 1.0), 1e-2, 5)
    assert len(tr) == 6
    s = tr[2]
    assert s.s == pytest.approx(0.02)
    assert isinstance(s.position, su2.Su2Element)
    again = Trajectory.from_samples(list(tr))
    assert np.array_equal(again.position, tr.position)
    assert len(tr[1:4]) == 3


def test_numeric_curvature_is_q_sin_theta():
    for alpha, q, c in [(1.0, 1.0, 0.3), (2.0, -2.5, 0.6), (0.5, 0.8, -0.2)]:
        p = SasakiParams(alpha, q)
        tr = integrate(su2.IDENTITY, initial_tangent(c), p, 1e-3, 5000)
        dT = fd_derivative(tr.tangent, 1e-3)
        kappa = np.linalg.norm(covariant_derivative(tr.tangent, dT, p), axis=1)
        assert np.max(np.abs(kappa - abs(q) * math.sqrt(1 - c * c))) < 1e-6


def test_frenet_examples():
    f = frenet(SasakiParams(1.0, 1.0), 0.0)
    assert f.kappa == pytest.approx(1.0) and f.tau == pytest.approx(-1.0)
    f = frenet(SasakiParams(1.0, 2.0), 0.5)
    assert f.kappa == pytest.approx(math.sqrt(3)) and f.tau == pytest.approx(0.0)
    assert frenet(SasakiParams(1.0, 2.0), 1.0).kappa == 0.0
    g = frenet(SasakiParams(1.0, 0.0), 0.3)
    assert g.tau is None and g.kappa == 0.0
    assert frenet(SasakiParams(1.0, -1.0), 0.3).epsilon == -1
    with pytest.raises(DomainError):
        frenet(SasakiParams(1.0, 1.0), 1.1)


@given(charges.filter(lambda q: q != 0), angles)
def test_frenet_type_invariant(q, c):
    f = frenet(SasakiParams(1.0, q), c)
    assert q * q == pytest.approx(f.kappa**2 + (f.tau + 1) ** 2, abs=1e-12)


# -- explicit S^3 curves ------------------------------------------------------

def printed_x2(c, s):
    w = math.sqrt(1.25 - c)
    return np.sin(s / 2) * np.cos(w * s) - (c - 0.5) / w * np.cos(s / 2) * np.sin(w * s)


def test_explicit_curve_on_sphere_grid():
    cs = np.linspace(-0.99, 0.99, 100)
    s = np.linspace(0, 40, 100)
    worst = max(np.max(np.abs(np.linalg.norm(ikawa_coords(c, s), axis=1) - 1)) for c in cs)
    assert worst < 1e-12
    # with the other sign in the second coordinate the curve leaves S^3
    x = ikawa_coords(0.3, s)
    x[:, 1] = printed_x2(0.3, s)
    assert np.max(np.abs(np.linalg.norm(x, axis=1) - 1)) > 1e-2


def test_explicit_curve_examples():
    assert ikawa_curve(0.2, 0.0) == pytest.approx((1.0, 0.0, 0.0, 0.0))
    x = ikawa_coords(29 / 36, np.array([0.0, 12 * math.pi, 6 * math.pi, 4 * math.pi]))
    assert np.allclose(x[1], x[0], atol=1e-12)
    assert not np.allclose(x[2], x[0], atol=1e-3)
    assert not np.allclose(x[3], x[0], atol=1e-3)
    for c in (1.0, -1.0, 1.5):
        with pytest.raises((DegenerateError, DomainError)):
            ikawa_coords(c, 0.0)


@pytest.mark.parametrize("c", [29 / 36, 0.3, -0.6])
def test_explicit_curve_is_the_trajectory_through_identity(c):
    s = np.linspace(0, 12 * math.pi, 2001)
    ref = closed_form_position(su2.IDENTITY, initial_tangent(c), SasakiParams(1.0, 1.0), s)
    assert np.max(np.abs(ikawa_array(c, s) - ref)) < 1e-12
    assert np.allclose(su2.r4_coords(ikawa_array(c, s)), ikawa_coords(c, s))


@pytest.mark.parametrize("c", [29 / 36, 0.3, -0.6])
def test_explicit_curve_is_congruent_to_model_helix(c):
    s = np.linspace(0, 10, 7)
    p = SasakiParams(1.0, 1.0)
    d = [su2.r4_coords(x) for x in closed_form_derivatives(su2.IDENTITY, initial_tangent(c), p, s)]
    kappa, tau = s3_frenet(*d)
    expected = frenet(p, c)
    assert np.allclose(kappa, expected.kappa, atol=1e-10)
    assert np.allclose(tau, expected.tau, atol=1e-10)
    psi, a, b = helix_from_frenet(expected.kappa, expected.tau)
    hk, ht = s3_frenet(*model_helix_derivatives(psi, a, b, s))
    assert np.allclose(hk, expected.kappa, atol=1e-10)
    assert np.allclose(ht, expected.tau, atol=1e-10)


def test_helix_for_figure_curve():
    f = frenet(SasakiParams(1.0, 1.0), 29 / 36)
    assert f.kappa == pytest.approx(math.sqrt(1 - (29 / 36) ** 2))
    assert f.tau == pytest.approx(29 / 36 - 1)
    psi, a, b = helix_from_frenet(f.kappa, f.tau)
    assert a == pytest.approx(2 / 3 + 0.5)
    assert a * b == pytest.approx(f.tau)


def test_model_helix_examples():
    s = np.linspace(0, 7, 50)
    assert np.allclose(model_helix_coords(0.0, 1.0, 3.0, s), np.column_stack([np.cos(s), np.sin(s), 0 * s, 0 * s]))
    a, b = helix_periodic_params(1, 0.4)
    assert (a, b) == pytest.approx((1.0, 1.0))
    x = model_helix_coords(0.4, a, b, np.array([0.0, 2 * math.pi]))
    assert np.allclose(x[0], x[1])
    a, b = helix_periodic_params(2, math.pi / 4)
    assert (a, b) == pytest.approx((math.sqrt(2 / 5), 2 * math.sqrt(2 / 5)))
    assert helix_periodic_params(3, 0.0) == pytest.approx((1.0, 3.0))
    x = model_helix_coords(0.3, *helix_periodic_params(0.7, 0.3), s)
    assert np.allclose(x[:, 0] ** 2 + x[:, 1] ** 2, math.cos(0.3) ** 2)
    assert model_helix(0.3, *helix_periodic_params(0.7, 0.3), 0.0) == pytest.approx((math.cos(0.3), 0.0, math.sin(0.3), 0.0))
    with pytest.raises(ContractError):
        model_helix_coords(0.3, 1.0, 2.0, s)


@given(st.floats(-5, 5), st.floats(0.01, 1.55))
def test_helix_params_satisfy_constraint_and_unit_speed(p, psi):
    a, b = helix_periodic_params(p, psi)
    assert a * a * math.cos(psi) ** 2 + b * b * math.sin(psi) ** 2 == pytest.approx(1.0, abs=1e-12)
    d1 = model_helix_derivatives(psi, a, b, np.linspace(0, 3, 4), order=1)[1]
    assert np.allclose(np.linalg.norm(d1, axis=1), 1.0)


def test_helix_from_frenet_degenerate():
    with pytest.raises(DegenerateError):
        helix_from_frenet(0.0, 1.0)
