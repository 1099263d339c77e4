import numpy as np
import pytest

from app.core.errors import ConfigurationError, UsageError
from app.geometry.heisenberg import (
    Grid,
    GridBudgetError,
    GridField,
    HeisElement,
    ball_volume_mc,
    ball_volume_quad,
    dilate,
    dilate_coords,
    field_coefficients,
    flow_derivative,
    haar_integral,
    hom_norm,
    hom_norm_coords,
    mul_coords,
    sublaplacian_matrix,
    v_inv,
)
from app.geometry.params import GroupParams
from app.geometry.scalars import FieldTag

from tests.conftest import SO21, SO31, SP21, SU21


def _close(a: HeisElement, b: HeisElement, atol: float = 1e-12) -> None:
    np.testing.assert_allclose(a.to_coords(), b.to_coords(), atol=atol)


def test_group_law(params, rng):
    a, b, c = (HeisElement.random(rng, params) for _ in range(3))
    _close((a @ b) @ c, a @ (b @ c))
    _close(a @ v_inv(a), HeisElement.zero(params))
    _close(HeisElement.zero(params) @ a, a)


def test_real_v_is_abelian(rng):
    a, b = HeisElement.random(rng, SO31), HeisElement.random(rng, SO31)
    _close(a @ b, b @ a)
    np.testing.assert_allclose(mul_coords(SO31, a.to_coords(), b.to_coords()), a.to_coords() + b.to_coords())


def test_complex_v_is_not_abelian(rng):
    a, b = HeisElement.random(rng, SU21), HeisElement.random(rng, SU21)
    assert np.max(np.abs((a @ b).to_coords() - (b @ a).to_coords())) > 1e-6


def test_dilation_is_an_automorphism(params, rng):
    a, b = HeisElement.random(rng, params), HeisElement.random(rng, params)
    for s in (0.3, 2.5):
        _close(dilate(s, a @ b), dilate(s, a) @ dilate(s, b), atol=1e-11)
    with pytest.raises(UsageError):
        dilate(0.0, a)


def test_homogeneous_norm(params, rng):
    a = HeisElement.random(rng, params)
    assert hom_norm(dilate(1.7, a)) == pytest.approx(1.7 * hom_norm(a), rel=1e-12)
    assert hom_norm(v_inv(a)) == pytest.approx(hom_norm(a), rel=1e-14)
    assert hom_norm(HeisElement.zero(params)) == 0.0
    coords = rng.standard_normal((20, params.v_dim))
    np.testing.assert_allclose(
        hom_norm_coords(params, dilate_coords(params, 0.4, coords)), 0.4 * hom_norm_coords(params, coords), rtol=1e-12
    )


def test_centre_must_be_imaginary():
    with pytest.raises(UsageError):
        HeisElement(np.zeros((1, 4)), np.array([1.0, 0.0, 0.0, 0.0]), SU21)


def test_coordinate_length_is_checked():
    with pytest.raises(UsageError):
        HeisElement.from_coords(SU21, np.zeros(2))
    with pytest.raises(UsageError):
        HeisElement.from_coords(SO21, np.zeros((2, 2)))


def test_field_coefficients_ignore_own_coordinate(rng):
    coords = rng.standard_normal((10, SP21.v_dim))
    for j in range(SP21.o_dim):
        moved = coords.copy()
        moved[:, j] += 3.0
        np.testing.assert_allclose(field_coefficients(SP21, j, moved), field_coefficients(SP21, j, coords))
    with pytest.raises(UsageError):
        field_coefficients(SP21, SP21.o_dim, coords)


def test_flow_derivative_is_left_invariant(rng):
    params = SU21
    g = HeisElement.random(rng, params).to_coords()
    point = HeisElement.random(rng, params).to_coords()

    def f(c):
        return np.sin(c[..., 0]) * np.cos(c[..., 1]) + c[..., 2] ** 2

    def f_translated(c):
        return f(mul_coords(params, g, c))

    for j in range(params.o_dim):
        lhs = flow_derivative(params, f_translated, point, j)
        rhs = flow_derivative(params, f, mul_coords(params, g, point), j)
        assert lhs == pytest.approx(rhs, abs=1e-7)


def test_grid_validation():
    with pytest.raises(UsageError):
        Grid(SO21, 1.0, 4)
    with pytest.raises(UsageError):
        Grid(SO21, 1.0, 1)
    with pytest.raises(UsageError):
        Grid(SO21, 0.0, 5)
    with pytest.raises(GridBudgetError) as info:
        Grid(SU21, 1.0, 101, budget=1000)
    assert info.value.gate == "grid-budget"


def test_grid_geometry():
    grid = Grid(SU21, 2.0, 5)
    assert grid.shape == (5, 5, 5)
    assert grid.h == pytest.approx(1.0)
    np.testing.assert_allclose(grid.coords()[grid.center_index], 0.0)
    finer = grid.refined()
    assert finer.points_per_axis == 9
    assert finer.h == pytest.approx(grid.h / 2)
    ones = GridField(np.ones(grid.shape), grid)
    assert haar_integral(ones).real == pytest.approx(125.0)
    assert ones.l2_norm() == pytest.approx(np.sqrt(125.0))


def test_grid_field_rejects_non_finite():
    grid = Grid(SO21, 1.0, 5)
    with pytest.raises(UsageError):
        GridField(np.array([0.0, 1.0, np.nan, 1.0, 0.0]), grid)


def test_real_sublaplacian_is_the_second_difference():
    grid = Grid(SO21, 1.0, 5)
    lap = sublaplacian_matrix(grid).toarray()
    expected = (2.0 * np.eye(5) - np.eye(5, k=1) - np.eye(5, k=-1)) / grid.h ** 2
    np.testing.assert_allclose(lap, expected, atol=1e-12)


@pytest.mark.parametrize("params", [SO31, SU21, GroupParams(FieldTag.COMPLEX, 3)], ids=lambda p: p.label)
def test_sublaplacian_symmetric_and_kills_constants(params):
    m = 7 if params.v_dim <= 3 else 5
    grid = Grid(params, 1.0, m)
    lap = sublaplacian_matrix(grid)
    assert abs(lap - lap.T).max() < 1e-12
    applied = (lap @ np.ones(grid.size)).reshape(grid.shape)
    core = tuple(slice(2, m - 2) for _ in range(grid.dim))
    assert np.max(np.abs(applied[core])) < 1e-10
    if grid.size <= 1000:
        assert np.linalg.eigvalsh(lap.toarray()).min() > -1e-9


def test_sublaplacian_needs_first_stratum():
    params = GroupParams(FieldTag.COMPLEX, 1)
    with pytest.raises(ConfigurationError) as info:
        sublaplacian_matrix(Grid(params, 1.0, 5))
    assert info.value.gate == "n1-analysis-gate"


def test_ball_volume_scales_with_homogeneous_dimension(params):
    assert ball_volume_quad(params, 2.0) == pytest.approx(2.0 ** params.r * ball_volume_quad(params), rel=1e-6)


@pytest.mark.parametrize("params", [SO31, SU21], ids=lambda p: p.label)
def test_ball_volume_monte_carlo(params, rng):
    value, stderr = ball_volume_mc(params, rng, 1.0, 100_000)
    assert abs(value - ball_volume_quad(params)) < 5.0 * stderr
