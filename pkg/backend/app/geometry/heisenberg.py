"""
heisenberg.py

The stratified nilpotent group V = F^(n-1) x Im F.

Points are kept in two forms: ``HeisElement`` (x as an (n-1, 4) quaternion
array, y as a purely imaginary (4,) array) and flat real coordinate vectors of
length dim V, ordered as the field components of x_1 ... x_(n-1) followed by
the imaginary components of y. Grids, stencils and quadrature work on the flat
form.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import gamma, pi
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.integrate import quad

from app.core.constants import FLOW_STEP, GRID_NODE_BUDGET
from app.core.errors import ConfigurationError, UsageError
from app.geometry.params import GroupParams
from app.geometry.scalars import qconj, qdot, qim, qmul, qre

logger = logging.getLogger(__name__)


class GridBudgetError(ConfigurationError):
    """Raised when a grid would exceed the configured node budget."""

    def __init__(self, message: str) -> None:
        super().__init__(message, gate="grid-budget")


def require_first_stratum(params: GroupParams) -> None:
    """Analysis on V needs a nontrivial first stratum, i.e. n >= 2."""
    if params.n < 2:
        raise ConfigurationError(
            f"{params.label}: the first stratum F^(n-1) is zero-dimensional; "
            "sub-Laplacian analysis needs n >= 2.",
            gate="n1-analysis-gate",
        )


# ── Coordinates ──────────────────────────────────────────────────────


def split_coords(params: GroupParams, coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Flat real coordinates (..., dim V) -> (x (..., n-1, 4), y (..., 4))."""
    coords = np.asarray(coords, dtype=float)
    if coords.shape[-1] != params.v_dim:
        raise UsageError(
            f"Expected {params.v_dim} coordinates for {params.label}, got {coords.shape[-1]}."
        )
    lead = coords.shape[:-1]
    d = params.d
    x = np.zeros(lead + (params.n - 1, 4))
    x[..., :d] = coords[..., : params.o_dim].reshape(lead + (params.n - 1, d))
    y = np.zeros(lead + (4,))
    y[..., 1:d] = coords[..., params.o_dim:]
    return x, y


def join_coords(params: GroupParams, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = params.d
    lead = x.shape[:-2]
    xs = x[..., :d].reshape(lead + (params.o_dim,))
    return np.concatenate([xs, np.broadcast_to(y[..., 1:d], lead + (params.z_dim,))], axis=-1)


def mul_arrays(x1, y1, x2, y2) -> tuple[np.ndarray, np.ndarray]:
    """Group law (x1, y1)(x2, y2) = (x1 + x2, y1 + y2 - 2 Im(x1* x2))."""
    return x1 + x2, y1 + y2 - 2.0 * qim(qdot(x1, x2))


def mul_coords(params: GroupParams, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    x1, y1 = split_coords(params, a)
    x2, y2 = split_coords(params, b)
    return join_coords(params, *mul_arrays(x1, y1, x2, y2))


def dilate_coords(params: GroupParams, s: float, coords: np.ndarray) -> np.ndarray:
    coords = np.array(coords, dtype=float, copy=True)
    coords[..., : params.o_dim] *= s
    coords[..., params.o_dim:] *= s * s
    return coords


def hom_norm_coords(params: GroupParams, coords: np.ndarray) -> np.ndarray:
    """(|x*x|^2 + |y|^2)^(1/4), vectorised over leading axes."""
    coords = np.asarray(coords, dtype=float)
    xx = np.sum(coords[..., : params.o_dim] ** 2, axis=-1)
    yy = np.sum(coords[..., params.o_dim:] ** 2, axis=-1)
    return (xx * xx + yy) ** 0.25


# ── Group elements ───────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class HeisElement:
    """A point (x, y) of V; y is purely imaginary."""

    x: np.ndarray
    y: np.ndarray
    params: GroupParams

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float).reshape(self.params.n - 1, 4)
        y = np.asarray(self.y, dtype=float).reshape(4)
        if qre(y) != 0.0:
            raise UsageError(f"y must be purely imaginary, got real part {qre(y)!r}.")
        object.__setattr__(self, "x", self.params.field.project(x))
        object.__setattr__(self, "y", self.params.field.project(y))

    @classmethod
    def zero(cls, params: GroupParams) -> "HeisElement":
        return cls(np.zeros((params.n - 1, 4)), np.zeros(4), params)

    @classmethod
    def from_coords(cls, params: GroupParams, coords) -> "HeisElement":
        coords = np.asarray(coords, dtype=float)
        if coords.size != params.v_dim:
            raise UsageError(f"Expected {params.v_dim} coordinates for {params.label}, got {coords.size}.")
        x, y = split_coords(params, coords.reshape(params.v_dim))
        return cls(x, y, params)

    @classmethod
    def random(cls, rng: np.random.Generator, params: GroupParams, scale: float = 1.0) -> "HeisElement":
        return cls.from_coords(params, scale * rng.standard_normal(params.v_dim))

    def to_coords(self) -> np.ndarray:
        return join_coords(self.params, self.x, self.y)

    def __matmul__(self, other: "HeisElement") -> "HeisElement":
        return v_mul(self, other)

    def __repr__(self) -> str:
        return f"HeisElement({self.params.label}, coords={np.round(self.to_coords(), 6).tolist()})"


def _same_params(a: HeisElement, b: HeisElement) -> None:
    if a.params != b.params:
        raise UsageError(f"Cannot combine elements of {a.params.label} and {b.params.label}.")


def v_mul(a: HeisElement, b: HeisElement) -> HeisElement:
    _same_params(a, b)
    x, y = mul_arrays(a.x, a.y, b.x, b.y)
    return HeisElement(x, y, a.params)


def v_inv(a: HeisElement) -> HeisElement:
    return HeisElement(-a.x, -a.y, a.params)


def dilate(s: float, a: HeisElement) -> HeisElement:
    """Anisotropic dilation (x, y) -> (s x, s^2 y)."""
    if not s > 0:
        raise UsageError(f"Dilation factor must be positive, got {s!r}.")
    return HeisElement(s * a.x, s * s * a.y, a.params)


def hom_norm(a: HeisElement) -> float:
    return float(hom_norm_coords(a.params, a.to_coords()))


# ── Left-invariant fields on the first stratum ───────────────────────


def field_coefficients(params: GroupParams, j: int, coords: np.ndarray) -> np.ndarray:
    """
    Coefficients of the y-derivatives in E_j at the given points.

    E_j = d/dx_j + sum_b c_(j,b)(x) d/dy_b with c_j(x) = -2 Im(x_p* u_c), where
    the j-th basis vector is the unit u_c in slot p. The result has shape
    (..., dim Im F) and never depends on x_j itself.
    """
    _check_index(params, j)
    p, c = divmod(j, params.d)
    x, _ = split_coords(params, coords)
    unit = np.zeros(4)
    unit[c] = 1.0
    prod = qmul(qconj(x[..., p, :]), unit)
    return -2.0 * prod[..., 1 : params.d]


def _check_index(params: GroupParams, j: int) -> None:
    if not 0 <= j < params.o_dim:
        raise UsageError(f"Field index {j} out of range [0, {params.o_dim}).")


def flow_derivative(
    params: GroupParams,
    f: Callable[[np.ndarray], np.ndarray],
    coords: np.ndarray,
    j: int,
    step: float = FLOW_STEP,
) -> np.ndarray:
    """E_j f at ``coords`` by a central difference along the right group flow."""
    _check_index(params, j)
    e = np.zeros(params.v_dim)
    e[j] = step
    forward = mul_coords(params, coords, e)
    backward = mul_coords(params, coords, -e)
    return (f(forward) - f(backward)) / (2.0 * step)


# ── Grids ────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class Grid:
    """Box [-L, L]^dim with m nodes per axis; m odd so the origin is a node."""

    params: GroupParams
    half_width: float
    points_per_axis: int
    budget: int = GRID_NODE_BUDGET

    def __post_init__(self) -> None:
        m = self.points_per_axis
        if self.half_width <= 0:
            raise UsageError(f"Grid half-width must be positive, got {self.half_width}.")
        if m < 3 or m % 2 == 0:
            raise UsageError(f"Points per axis must be odd and >= 3, got {m}.")
        if self.dim < 1:
            raise UsageError(f"{self.params.label} has a zero-dimensional V.")
        if m ** self.dim > self.budget:
            logger.error("Grid %d^%d exceeds node budget %d", m, self.dim, self.budget)
            raise GridBudgetError(
                f"{m}^{self.dim} = {m ** self.dim} nodes exceeds the budget of {self.budget}."
            )

    @property
    def dim(self) -> int:
        return self.params.v_dim

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / (self.points_per_axis - 1)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def size(self) -> int:
        return self.points_per_axis ** self.dim

    @property
    def cell_volume(self) -> float:
        return self.h ** self.dim

    @property
    def key(self) -> dict:
        return {
            "field": self.params.field.value,
            "n": self.params.n,
            "L": float(self.half_width),
            "m": int(self.points_per_axis),
        }

    @property
    def center_index(self) -> tuple[int, ...]:
        return (self.points_per_axis // 2,) * self.dim

    def axis(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.points_per_axis)

    def coords(self) -> np.ndarray:
        """Node coordinates, shape ``shape + (dim,)``."""
        axes = np.meshgrid(*([self.axis()] * self.dim), indexing="ij")
        return np.stack(axes, axis=-1)

    def refined(self) -> "Grid":
        """Same box with spacing h/2."""
        return Grid(self.params, self.half_width, 2 * self.points_per_axis - 1, self.budget)


@dataclass(frozen=True, eq=False)
class GridField:
    """Samples of a function on the nodes of a grid."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        if values.shape != self.grid.shape:
            values = values.reshape(self.grid.shape)
        if not np.all(np.isfinite(values)):
            raise UsageError("Grid field contains non-finite values.")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: Grid, f: Callable[[np.ndarray], np.ndarray]) -> "GridField":
        return cls(f(grid.coords()), grid)

    @classmethod
    def zeros(cls, grid: Grid) -> "GridField":
        return cls(np.zeros(grid.shape), grid)

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.cell_volume))

    def inner(self, other: "GridField") -> complex:
        return complex(np.sum(np.conj(self.values) * other.values) * self.grid.cell_volume)

    def with_values(self, values: np.ndarray) -> "GridField":
        return GridField(values, self.grid)

    def __add__(self, other: "GridField") -> "GridField":
        return GridField(self.values + other.values, self.grid)

    def __sub__(self, other: "GridField") -> "GridField":
        return GridField(self.values - other.values, self.grid)

    def __mul__(self, alpha) -> "GridField":
        return GridField(alpha * self.values, self.grid)

    __rmul__ = __mul__


def haar_integral(f: GridField) -> complex:
    """Riemann sum for the Haar measure dx dy."""
    return complex(np.sum(f.values) * f.grid.cell_volume)


# ── Sparse stencils ──────────────────────────────────────────────────


def _central_1d(m: int, h: float) -> sp.csr_matrix:
    return sp.diags([-np.ones(m - 1), np.ones(m - 1)], [-1, 1], shape=(m, m), format="csr") / (2.0 * h)


def _forward_1d(m: int, h: float) -> sp.csr_matrix:
    """(m+1) x m edge differences with zero Dirichlet data beyond both ends."""
    return sp.diags([-np.ones(m), np.ones(m)], [-1, 0], shape=(m + 1, m), format="csr") / h


def _average_1d(m: int) -> sp.csr_matrix:
    return sp.diags([np.ones(m), np.ones(m)], [-1, 0], shape=(m + 1, m), format="csr") * 0.5


def _kron_axes(mats: list[sp.spmatrix]) -> sp.csr_matrix:
    out = mats[0]
    for mat in mats[1:]:
        out = sp.kron(out, mat, format="csr")
    return sp.csr_matrix(out)


def _edge_coords(grid: Grid, axis: int) -> np.ndarray:
    """Coordinates of the midpoints staggered along ``axis``."""
    base = grid.axis()
    h = grid.h
    mids = np.concatenate([[base[0] - h / 2], base + h / 2])
    axes = [mids if a == axis else base for a in range(grid.dim)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def field_operator(grid: Grid, j: int) -> sp.csr_matrix:
    """Node-centred second-order stencil for E_j."""
    params = grid.params
    _check_index(params, j)
    m, h = grid.points_per_axis, grid.h
    eye = sp.identity(m, format="csr")
    mats = [eye] * grid.dim
    mats[j] = _central_1d(m, h)
    op = _kron_axes(mats)
    coef = field_coefficients(params, j, grid.coords()).reshape(grid.size, params.z_dim)
    for b in range(params.z_dim):
        if not np.any(coef[:, b]):
            continue
        mats = [eye] * grid.dim
        mats[params.o_dim + b] = _central_1d(m, h)
        op = op + sp.diags(coef[:, b]) @ _kron_axes(mats)
    return sp.csr_matrix(op)


def edge_operator(grid: Grid, j: int) -> sp.csr_matrix:
    """
    Staggered discretisation of E_j from nodes to the edges along axis j.

    The x_j derivative is a forward difference; the y-part averages onto the
    edge and uses central differences in y. The coefficient of the y-part does
    not depend on x_j, so evaluating it on the edge grid is exact.
    """
    params = grid.params
    _check_index(params, j)
    m, h = grid.points_per_axis, grid.h
    eye = sp.identity(m, format="csr")
    mats = [eye] * grid.dim
    mats[j] = _forward_1d(m, h)
    op = _kron_axes(mats)
    edge_size = op.shape[0]
    coef = field_coefficients(params, j, _edge_coords(grid, j)).reshape(edge_size, params.z_dim)
    for b in range(params.z_dim):
        if not np.any(coef[:, b]):
            continue
        mats = [eye] * grid.dim
        mats[j] = _average_1d(m)
        mats[params.o_dim + b] = _central_1d(m, h)
        op = op + sp.diags(coef[:, b]) @ _kron_axes(mats)
    return sp.csr_matrix(op)


def left_invariant_field(j: int, f: GridField) -> GridField:
    """E_j f on the grid of ``f``."""
    return f.with_values((field_operator(f.grid, j) @ f.flat).reshape(f.grid.shape))


def sublaplacian_matrix(grid: Grid) -> sp.csr_matrix:
    """
    Symmetric positive semidefinite discretisation of -sum_j E_j^2.

    Assembled as sum_j D_j^T D_j from the staggered edge operators with
    Dirichlet data outside the box. For F = R this is the standard
    (2, -1) Laplacian stencil along each axis.
    """
    require_first_stratum(grid.params)
    total = sp.csr_matrix((grid.size, grid.size))
    for j in range(grid.params.o_dim):
        dj = edge_operator(grid, j)
        total = total + (dj.T @ dj)
    logger.debug("Assembled sub-Laplacian on %s (nnz=%d)", grid.key, total.nnz)
    return sp.csr_matrix(0.5 * (total + total.T))


# ── Volumes of homogeneous balls ─────────────────────────────────────


def unit_ball_volume(k: int) -> float:
    return pi ** (k / 2.0) / gamma(k / 2.0 + 1.0)


def unit_sphere_area(k: int) -> float:
    """Area of the unit sphere S^(k-1) in R^k."""
    return 2.0 * pi ** (k / 2.0) / gamma(k / 2.0)


def ball_volume_quad(params: GroupParams, radius: float = 1.0) -> float:
    """Haar measure of {N <= radius} by radial quadrature in |x|."""
    p, q = params.o_dim, params.z_dim
    r4 = radius ** 4
    if p == 0:
        return unit_ball_volume(q) * radius ** (2 * q)

    def integrand(a: float) -> float:
        return unit_sphere_area(p) * a ** (p - 1) * unit_ball_volume(q) * max(r4 - a ** 4, 0.0) ** (q / 2.0)

    value, _ = quad(integrand, 0.0, radius, limit=200)
    return float(value)


def ball_volume_mc(
    params: GroupParams,
    rng: np.random.Generator,
    radius: float = 1.0,
    samples: int = 200_000,
) -> tuple[float, float]:
    """Monte Carlo estimate (value, standard error) of the measure of {N <= radius}."""
    p, q = params.o_dim, params.z_dim
    half = np.concatenate([np.full(p, radius), np.full(q, radius * radius)])
    pts = rng.uniform(-1.0, 1.0, size=(samples, p + q)) * half
    inside = hom_norm_coords(params, pts) <= radius
    box = float(np.prod(2.0 * half))
    frac = inside.mean()
    return box * frac, box * np.sqrt(frac * (1.0 - frac) / samples)
