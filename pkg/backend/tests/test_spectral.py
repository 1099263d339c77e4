import numpy as np
import pytest

from app.core.errors import ConfigurationError, DomainError, UsageError
from app.geometry.heisenberg import Grid, GridField, sublaplacian_matrix
from app.geometry.params import GroupParams
from app.geometry.scalars import FieldTag
from app.geometry.spectral import (
    ambient_sphere_rule,
    circle_quadrature,
    dual_extremizer,
    dual_norm_W,
    evaluate_spectrum,
    frac_power_apply,
    integer_power_apply,
    operator_spectrum,
    pairing,
    quadrature_for,
    real_harmonics,
    sobolev_norm_V,
    sphere_inverse,
    sphere_quadrature,
    sphere_transform,
    w0_norm_sphere,
    zonal_quadrature,
)
from app.integrations.operator_cache import OperatorCache

from tests.conftest import SO21, SO31, SU21


def _bump(grid: Grid) -> GridField:
    return GridField.from_function(grid, lambda c: np.exp(-4.0 * np.sum(c * c, axis=-1)))


# ── Grid operators ───────────────────────────────────────────────────


def test_sine_spectrum_diagonalises_real_sublaplacian():
    grid = Grid(SO31, 1.0, 7)
    spec = operator_spectrum(grid)
    assert spec.kind == "sine"
    assert spec.reconstruction_residual(sublaplacian_matrix(grid)) < 1e-9
    assert spec.sorted_eigenvalues()[0] > 0


def test_dense_spectrum_is_orthonormal():
    grid = Grid(SU21, 1.0, 5)
    spec = operator_spectrum(grid)
    assert spec.kind == "dense"
    assert spec.orthonormality_residual() < 1e-10
    assert spec.reconstruction_residual(sublaplacian_matrix(grid)) < 1e-9


def test_dense_spectrum_round_trips_through_cache(tmp_path):
    grid = Grid(SU21, 1.0, 5)
    cache = OperatorCache(str(tmp_path))
    first = operator_spectrum(grid, cache)
    assert len(list(tmp_path.iterdir())) == 1
    second = operator_spectrum(grid, cache)
    np.testing.assert_array_equal(first.eigenvalues, second.eigenvalues)
    np.testing.assert_array_equal(first.eigenvectors, second.eigenvectors)


def test_dense_spectrum_respects_limit():
    grid = Grid(GroupParams(FieldTag.COMPLEX, 3), 1.0, 7)
    with pytest.raises(ConfigurationError) as info:
        operator_spectrum(grid)
    assert info.value.gate == "dense-eigen-limit"


@pytest.mark.parametrize("params", [SO31, SU21], ids=lambda p: p.label)
def test_fractional_powers_compose(params):
    grid = Grid(params, 1.0, 7 if params.v_dim <= 2 else 5)
    spec = operator_spectrum(grid)
    f = _bump(grid)
    half = frac_power_apply(spec, 0.5, frac_power_apply(spec, 0.5, f))
    whole = integer_power_apply(f, 1)
    np.testing.assert_allclose(half.values, whole.values, atol=1e-8)


def test_integer_and_spectral_norms_agree():
    grid = Grid(SU21, 1.0, 5)
    f = _bump(grid)
    spec = operator_spectrum(grid)
    assert sobolev_norm_V(f, 2.0) == pytest.approx(sobolev_norm_V(f, 2.0, spec=spec), rel=1e-9)
    assert sobolev_norm_V(f, 2.0, shifted=True) >= sobolev_norm_V(f, 2.0)
    assert sobolev_norm_V(f, 0.0) == pytest.approx(f.l2_norm())


def test_integer_power_rejects_negative():
    grid = Grid(SO21, 1.0, 5)
    with pytest.raises(UsageError):
        integer_power_apply(_bump(grid), -1)


# ── Sphere harmonics ─────────────────────────────────────────────────


def test_circle_transform_of_cosine():
    quad = circle_quadrature(4)
    theta = quad.theta
    spec = sphere_transform(quad, np.cos(2 * theta))
    expected = np.zeros(9)
    expected[4 + 2] = expected[4 - 2] = 0.5
    np.testing.assert_allclose(spec.coefficients, expected, atol=1e-14)
    np.testing.assert_allclose(sphere_inverse(spec, quad).real, np.cos(2 * theta), atol=1e-13)
    np.testing.assert_allclose(evaluate_spectrum(spec, quad.points()).real, np.cos(2 * theta), atol=1e-13)


def test_real_harmonics_are_orthonormal():
    quad = sphere_quadrature(5)
    basis = real_harmonics(5, quad.theta, quad.phi)
    gram = basis.T @ (quad.weights[:, None] * basis)
    np.testing.assert_allclose(gram, np.eye(36), atol=1e-12)
    spec = sphere_transform(quad, basis[:, 7])
    np.testing.assert_allclose(spec.coefficients, np.eye(36)[7], atol=1e-12)


def test_zonal_transform_of_legendre():
    quad = zonal_quadrature(6)
    x = np.cos(quad.theta)
    spec = sphere_transform(quad, 0.5 * (3 * x * x - 1))
    expected = np.zeros(7)
    expected[2] = 1.0 / np.sqrt(5.0)
    np.testing.assert_allclose(spec.coefficients, expected, atol=1e-13)


def test_underresolved_transform_is_rejected():
    quad = circle_quadrature(2)
    with pytest.raises(UsageError):
        sphere_transform(quad, np.zeros(quad.size), band=5)
    with pytest.raises(UsageError):
        sphere_transform(quad, np.zeros(quad.size + 1))


def test_w0_norm_of_circle_modes():
    quad = circle_quadrature(8)
    for k in (1, 3, 5):
        spec = sphere_transform(quad, np.cos(k * quad.theta))
        assert w0_norm_sphere(spec, SO21) == pytest.approx(np.sqrt(k / 2.0), rel=1e-12)
    constant = sphere_transform(quad, np.ones(quad.size))
    assert w0_norm_sphere(constant, SO21) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("params", [SO21, SO31], ids=lambda p: p.label)
def test_dual_extremizer_saturates_the_pairing(params, rng):
    quad = quadrature_for(params, 6)
    samples = rng.standard_normal(quad.size)
    mu = sphere_transform(quad, samples).without_zero_mode()
    phi = dual_extremizer(mu, params)
    dual = dual_norm_W(mu, params)
    assert pairing(mu, phi) == pytest.approx(dual**2, rel=1e-10)
    assert w0_norm_sphere(phi, params) == pytest.approx(dual, rel=1e-10)


def test_dual_norm_needs_zero_mass():
    quad = circle_quadrature(4)
    mu = sphere_transform(quad, np.ones(quad.size))
    with pytest.raises(DomainError):
        dual_norm_W(mu, SO21)


def test_sphere_norms_are_real_rank_one_only():
    with pytest.raises(ConfigurationError) as info:
        quadrature_for(SU21, 4)
    assert info.value.gate == "so-spectral-gate"


@pytest.mark.parametrize("m", [2, 3, 5, 7])
def test_ambient_sphere_rule_moments(m):
    rule = ambient_sphere_rule(m, 4)
    assert np.sum(rule.weights) == pytest.approx(1.0)
    np.testing.assert_allclose(np.sum(rule.points**2, axis=-1), 1.0, atol=1e-13)
    assert rule.integrate(rule.points[:, 0] ** 2) == pytest.approx(1.0 / m, rel=1e-12)
    assert rule.integrate(rule.points[:, -1] ** 4) == pytest.approx(3.0 / (m * (m + 2)), rel=1e-12)
    assert rule.integrate(rule.points[:, 0] * rule.points[:, -1]) == pytest.approx(0.0, abs=1e-14)


def test_ambient_sphere_rule_arguments():
    with pytest.raises(UsageError):
        ambient_sphere_rule(1, 3)
    with pytest.raises(UsageError):
        ambient_sphere_rule(3, 0)
