import math

import numpy as np
import pytest

from app.core.errors import DomainError, UsageError
from app.geometry.groups import (
    BoundaryPoint,
    DiskPoint,
    GroupElement,
    act_boundary,
    act_disk,
    basepoint_o,
    cayley,
    cayley_coords,
    cayley_inv,
    cayley_inv_coords,
    cayley_jacobian_coords,
    cayley_jacobian_numeric,
    dist,
    is_in_G,
    is_in_K,
    iwasawa,
    iwasawa_t,
    iwasawa_t_of_v,
    make_a,
    make_a_diagonal,
    make_n,
    make_U,
    make_v,
    make_w0,
    origin,
    random_boundary_point,
    random_disk_point,
    random_group_element,
    random_k,
    random_m,
    random_p,
    rho,
    translation_to,
    v_coordinates,
)
from app.geometry.heisenberg import HeisElement, dilate
from app.geometry.scalars import qabs2

from tests.conftest import SO21, SP21, SU21


def test_generators_preserve_q(params, rng):
    gens = [make_a(params, 2.5), make_w0(params), random_k(rng, params), random_m(rng, params)]
    h = HeisElement.random(rng, params)
    gens += [make_v(params, h), make_n(params, h), random_p(rng, params)]
    for g in gens:
        assert is_in_G(g)
    assert is_in_K(random_k(rng, params))
    assert not is_in_K(make_a(params, 1.0))


def test_U_is_a_light_cone_basis_change_outside_G(params):
    u = make_U(params)
    ident = GroupElement.identity(params)
    assert not is_in_G(u)
    assert (u @ u).distance_to(ident) < 1e-14
    assert u.adjoint().distance_to(u) == 0.0
    for t in (-1.0, 0.5, 2.0):
        assert (u @ make_a_diagonal(params, t) @ u).distance_to(make_a(params, t)) < 1e-12


def test_inverse_and_identity(params, rng):
    g = random_group_element(rng, params, 3.0)
    ident = GroupElement.identity(params)
    assert (g @ g.inverse()).distance_to(ident) < 1e-10
    assert (g.inverse() @ g).distance_to(ident) < 1e-10


def test_a_is_a_one_parameter_group(params):
    ident = GroupElement.identity(params)
    assert (make_a(params, 1.3) @ make_a(params, -1.3)).distance_to(ident) < 1e-12
    assert (make_a(params, 0.4) @ make_a(params, 0.9)).distance_to(make_a(params, 1.3)) < 1e-12


def test_w0_conjugates_a_to_its_inverse(params):
    w0 = make_w0(params)
    assert (w0 @ make_a(params, 0.8) @ w0).distance_to(make_a(params, -0.8)) < 1e-14


def test_mismatched_groups_do_not_multiply():
    with pytest.raises(UsageError):
        make_a(SO21, 1.0) @ make_a(SU21, 1.0)


def test_a_moves_origin_along_last_axis(params):
    for t in (0.3, 1.0, 4.0):
        z = act_disk(make_a(params, t), origin(params))
        expected = np.zeros((params.n, 4))
        expected[-1, 0] = math.tanh(t)
        np.testing.assert_allclose(z, expected, atol=1e-15)
        assert dist(origin(params), z) == pytest.approx(t, abs=1e-10)


def test_actions_preserve_disk_and_sphere(params, rng):
    g = random_group_element(rng, params, 2.0)
    x = random_disk_point(rng, params, 100, radius_cap=3.0)
    z = random_boundary_point(rng, params, 100)
    assert np.all(qabs2(act_disk(g, x)).sum(-1) < 1.0)
    np.testing.assert_allclose(qabs2(act_boundary(g, z)).sum(-1), 1.0, atol=1e-12)


def test_action_is_a_left_action(params, rng):
    g, h = random_group_element(rng, params, 2.0), random_group_element(rng, params, 2.0)
    x = random_disk_point(rng, params, 50, radius_cap=2.0)
    np.testing.assert_allclose(act_disk(g, act_disk(h, x)), act_disk(g @ h, x), atol=1e-10)


def test_point_types_are_preserved(rng):
    x = DiskPoint(np.array([[0.1, 0.2, 0, 0], [0.0, 0.3, 0, 0]]), SU21)
    g = random_k(rng, SU21)
    assert isinstance(act_disk(g, x), DiskPoint)
    with pytest.raises(DomainError):
        DiskPoint(np.array([[1.0, 0, 0, 0], [0, 0, 0, 0]]), SU21)
    with pytest.raises(DomainError):
        BoundaryPoint(np.array([[0.5, 0, 0, 0], [0, 0, 0, 0]]), SU21)


def test_distance_is_invariant(params, rng):
    g = random_group_element(rng, params, 2.0)
    x = random_disk_point(rng, params, 50, radius_cap=2.0)
    y = random_disk_point(rng, params, 50, radius_cap=2.0)
    np.testing.assert_allclose(dist(act_disk(g, x), act_disk(g, y)), dist(x, y), atol=1e-7)


def test_translation_to_hits_target(params, rng):
    x = random_disk_point(rng, params, (), radius_cap=2.0)
    g = translation_to(params, x, rng)
    np.testing.assert_allclose(act_disk(g, origin(params)), x, atol=1e-12)


def test_v_law_matches_matrix_product(params, rng):
    a, b = HeisElement.random(rng, params), HeisElement.random(rng, params)
    assert (make_v(params, a) @ make_v(params, b)).distance_to(make_v(params, a @ b)) < 1e-12
    np.testing.assert_allclose(v_coordinates(make_v(params, a)).to_coords(), a.to_coords(), atol=1e-13)


def test_conjugation_by_a_dilates_v(params, rng):
    a = HeisElement.random(rng, params)
    conj = make_a(params, 0.7) @ make_v(params, a) @ make_a(params, -0.7)
    np.testing.assert_allclose(v_coordinates(conj).to_coords(), dilate(math.exp(-0.7), a).to_coords(), atol=1e-12)


def test_p_fixes_o(params, rng):
    o = basepoint_o(params)
    for _ in range(10):
        np.testing.assert_allclose(act_boundary(random_p(rng, params), o), o, atol=1e-10)


def test_cayley_is_v_applied_to_o(params, rng):
    a = HeisElement.random(rng, params)
    np.testing.assert_allclose(cayley(a).z, act_boundary(make_v(params, a), basepoint_o(params)), atol=1e-12)
    np.testing.assert_allclose(cayley_inv(cayley(a)).to_coords(), a.to_coords(), atol=1e-10)


def test_cayley_coords_round_trip(params, rng):
    coords = rng.standard_normal((200, params.v_dim))
    z = cayley_coords(params, coords)
    np.testing.assert_allclose(qabs2(z).sum(-1), 1.0, atol=1e-12)
    np.testing.assert_allclose(cayley_inv_coords(params, z), coords, atol=1e-10)


def test_cayley_pole_is_rejected(params):
    with pytest.raises(DomainError):
        cayley_inv_coords(params, -basepoint_o(params))


def test_cayley_jacobian_closed_form(params, rng):
    for coords in rng.standard_normal((5, params.v_dim)):
        closed = float(cayley_jacobian_coords(params, coords))
        assert cayley_jacobian_numeric(params, coords) == pytest.approx(closed, rel=1e-6)


def test_iwasawa_round_trip(params, rng):
    for _ in range(10):
        t = rng.uniform(-2.0, 2.0)
        k = random_k(rng, params)
        h = HeisElement.random(rng, params)
        g = k @ make_n(params, h) @ make_a(params, t)
        dec = iwasawa(g)
        assert dec.t == pytest.approx(t, abs=1e-8)
        np.testing.assert_allclose(dec.heis.to_coords(), h.to_coords(), atol=1e-7)
        assert dec.k.distance_to(k) < 1e-7


def test_iwasawa_exponent_of_v(params, rng):
    for _ in range(10):
        h = HeisElement.random(rng, params)
        assert iwasawa_t(make_v(params, h)) == pytest.approx(float(iwasawa_t_of_v(params, h.to_coords())), abs=1e-9)


def test_rho_is_exponential():
    assert rho(SP21, 0.0) == 1.0
    assert rho(SP21, 1.0) == pytest.approx(math.exp(SP21.r / 2.0))


def test_dimensions():
    assert (SO21.r, SO21.v_dim, SO21.sphere_dim) == (1, 1, 1)
    assert (SU21.r, SU21.o_dim, SU21.z_dim) == (4, 2, 1)
    assert (SP21.r, SP21.v_dim) == (10, 7)
