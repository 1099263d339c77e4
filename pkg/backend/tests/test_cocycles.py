import math

import numpy as np
import pytest

from app.core.errors import ConfigurationError
from app.geometry.cocycles import (
    BusemannValue,
    axis_point,
    b_cocycle,
    busemann,
    busemann_chart,
    busemann_limit_check,
    c_cocycle,
    d_chart_gradient,
    horizontal_gradient_norm,
    pi_action,
    pi_action_density,
    visual_density,
    visual_density_at,
    visual_density_closed,
)
from app.geometry.groups import (
    act_boundary,
    act_disk,
    basepoint_o,
    cayley_coords,
    make_a,
    origin,
    random_boundary_point,
    random_disk_point,
    random_group_element,
    random_k,
)
from app.geometry.heisenberg import Grid, GridField
from app.geometry.params import GroupParams
from app.geometry.scalars import FieldTag, qabs
from app.geometry.spectral import quadrature_for

from tests.conftest import SO21, SO31, SU21


# ── Busemann cocycle ─────────────────────────────────────────────────


def test_busemann_along_the_axis(params, rng):
    z = random_boundary_point(rng, params, 50)
    for t in (0.5, 2.0):
        gap = -math.tanh(t) * z[:, -1, :]
        gap[:, 0] += 1.0
        expected = np.log(qabs(gap)) + math.log(math.cosh(t))
        np.testing.assert_allclose(busemann(origin(params), axis_point(params, t), z), expected, atol=1e-12)
        assert busemann(origin(params), axis_point(params, t), basepoint_o(params)) == pytest.approx(-t, abs=1e-12)


def test_busemann_is_a_cocycle(params, rng):
    x, y, w = (random_disk_point(rng, params, (), radius_cap=2.0) for _ in range(3))
    z = random_boundary_point(rng, params, 40)
    np.testing.assert_allclose(busemann(x, y, z) + busemann(y, w, z), busemann(x, w, z), atol=1e-11)
    np.testing.assert_allclose(busemann(x, x, z), 0.0, atol=1e-14)


def test_busemann_is_equivariant(params, rng):
    g = random_group_element(rng, params, 1.5)
    x, y = (random_disk_point(rng, params, (), radius_cap=1.5) for _ in range(2))
    z = random_boundary_point(rng, params, 40)
    moved = busemann(act_disk(g, x), act_disk(g, y), act_boundary(g, z))
    np.testing.assert_allclose(moved, busemann(x, y, z), atol=1e-9)


def test_busemann_chart_matches_sphere(params, rng):
    coords = rng.standard_normal((40, params.v_dim))
    for t in (0.3, 1.5):
        on_sphere = busemann(origin(params), axis_point(params, t), cayley_coords(params, coords))
        np.testing.assert_allclose(busemann_chart(params, t, coords) + math.log(math.cosh(t)), on_sphere, atol=1e-10)


def test_busemann_limit_shrinks_with_t(rng):
    coords = rng.uniform(-2.0, 2.0, size=(200, SU21.v_dim))
    checks = [busemann_limit_check(SU21, t, coords) for t in (2.0, 5.0, 10.0)]
    assert all(c.identity_residual < 1e-12 for c in checks)
    deviations = [c.max_deviation for c in checks]
    assert deviations == sorted(deviations, reverse=True)
    assert deviations[-1] < 1e-3


def test_centred_busemann_has_mean_zero():
    quad = quadrature_for(SO21, 16)
    value = BusemannValue(origin(SO21), axis_point(SO21, 1.0))
    assert quad.integrate(value.centred(quad)) == pytest.approx(0.0, abs=1e-13)


# ── Visual densities ─────────────────────────────────────────────────


def test_density_of_origin_is_one(params, rng):
    z = random_boundary_point(rng, params, 20)
    np.testing.assert_allclose(visual_density_closed(params, origin(params), z), 1.0)
    np.testing.assert_allclose(visual_density_at(params, origin(params), z), 1.0, atol=1e-8)


@pytest.mark.parametrize("params", [SO21, SO31, SU21], ids=lambda p: p.label)
def test_numeric_density_matches_closed_form(params, rng):
    x = random_disk_point(rng, params, (), radius_cap=1.5)
    z = random_boundary_point(rng, params, 30)
    np.testing.assert_allclose(visual_density_at(params, x, z, rng), visual_density_closed(params, x, z), rtol=1e-6)


def test_density_does_not_depend_on_translation(rng):
    x = random_disk_point(rng, SU21, (), radius_cap=1.0)
    z = random_boundary_point(rng, SU21, 20)
    first = visual_density_at(SU21, x, z, np.random.default_rng(1))
    second = visual_density_at(SU21, x, z, np.random.default_rng(2))
    np.testing.assert_allclose(first, second, rtol=1e-7)


@pytest.mark.parametrize("params", [SO21, SO31], ids=lambda p: p.label)
def test_visual_density_is_a_probability(params):
    quad = quadrature_for(params, 40)
    density = visual_density(params, axis_point(params, 0.5), quad)
    assert density.mass == pytest.approx(1.0, abs=1e-6)
    assert quad.integrate(visual_density_closed(params, axis_point(params, 0.5), quad.points())) == pytest.approx(1.0, abs=1e-10)


def test_c_cocycle_has_zero_mass():
    quad = quadrature_for(SO21, 40)
    c = c_cocycle(SO21, origin(SO21), axis_point(SO21, 0.7), quad)
    assert c.mean == pytest.approx(0.0, abs=1e-6)
    assert c.max_abs() > 0.1


def test_b_is_a_cocycle_for_pi(rng):
    params = SO21
    quad = quadrature_for(params, 24)
    points = quad.points()
    g = random_group_element(rng, params, 0.8)
    h = random_group_element(rng, params, 0.8)
    h0 = act_disk(h, origin(params))

    def b_h(p):
        return visual_density_closed(params, origin(params), p) - visual_density_closed(params, h0, p)

    combined = pi_action_density(g, b_h, points) + b_cocycle(g, quad).samples
    np.testing.assert_allclose(combined, b_cocycle(g @ h, quad).samples, atol=1e-6)


# ── Boundary action ──────────────────────────────────────────────────


def test_pi_is_a_representation(params, rng):
    g, h = random_group_element(rng, params, 1.0), random_group_element(rng, params, 1.0)
    z = random_boundary_point(rng, params, 30)

    def phi(p):
        return p[..., 0, 0] + 2.0 * p[..., -1, 0] ** 2

    composed = pi_action(g, lambda p: pi_action(h, phi, p), z)
    np.testing.assert_allclose(composed, pi_action(g @ h, phi, z), atol=1e-10)
    np.testing.assert_allclose(pi_action(make_a(params, 0.0), phi, z), phi(z), atol=1e-14)


def test_pi_of_k_preserves_densities(params, rng):
    k = random_k(rng, params)
    z = random_boundary_point(rng, params, 20)
    ones = pi_action_density(k, lambda p: np.ones(p.shape[:-2]), z)
    np.testing.assert_allclose(ones, 1.0, atol=1e-8)


# ── Chart gradient ───────────────────────────────────────────────────


@pytest.mark.parametrize("params", [SO31, SU21], ids=lambda p: p.label)
def test_chart_gradient_of_first_coordinate(params):
    grid = Grid(params, 1.0, 7)
    phi = GridField.from_function(grid, lambda c: c[..., 0])
    norm = horizontal_gradient_norm(d_chart_gradient(phi))
    core = tuple(slice(1, 6) for _ in range(grid.dim))
    np.testing.assert_allclose(norm[core], 1.0, atol=1e-12)


def test_chart_gradient_of_constant_vanishes():
    grid = Grid(SU21, 1.0, 7)
    gradient = d_chart_gradient(GridField(np.ones(grid.shape), grid))
    core = tuple(slice(1, 6) for _ in range(grid.dim))
    assert max(np.max(np.abs(g.values[core])) for g in gradient) < 1e-12


def test_chart_gradient_needs_first_stratum():
    params = GroupParams(FieldTag.QUATERNION, 1)
    with pytest.raises(ConfigurationError):
        d_chart_gradient(GridField.zeros(Grid(params, 1.0, 3)))
