"""
cocycles.py

The two proper cocycles: visual-measure differences c(x, y) = mu_y - mu_x and
the Busemann cocycle gamma_(x,y). Both are evaluated pointwise on boundary
points given as (..., n, 4) arrays; spectra are taken on demand.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from app.core.constants import JACOBIAN_STEP, MASS_ERROR_LIMIT
from app.core.errors import NumericalError
from app.geometry.groups import (
    GroupElement,
    PointLike,
    _coords,
    act_boundary,
    act_disk,
    cayley_coords,
    cayley_denominator,
    lift,
    origin,
    points_from_real,
    q_form,
    sphere_real_coords,
    translation_to,
)
from app.geometry.heisenberg import GridField, hom_norm_coords, left_invariant_field, require_first_stratum, split_coords
from app.geometry.params import GroupParams
from app.geometry.scalars import qabs, qabs2, qreal
from app.geometry.spectral import SphereQuadrature, SphereSpectrum, sphere_transform

logger = logging.getLogger(__name__)


# ── Busemann cocycle ─────────────────────────────────────────────────


def busemann(x: PointLike, y: PointLike, z: PointLike) -> np.ndarray:
    """
    gamma_(x,y)(z) = log |q(y, z) / q(x, z)| + (1/2) log |q(x, x) / q(y, y)|

    with x, y, z lifted to [1, .]. Broadcasts over leading axes of z.
    """
    xt, yt, zt = lift(_coords(x)), lift(_coords(y)), lift(_coords(z))
    value = (
        np.log(qabs(q_form(yt, zt)))
        - np.log(qabs(q_form(xt, zt)))
        + 0.5 * np.log(qabs(q_form(xt, xt)))
        - 0.5 * np.log(qabs(q_form(yt, yt)))
    )
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True, eq=False)
class BusemannValue:
    """z -> gamma_(x,y)(z) for fixed disk points x and y."""

    x: np.ndarray
    y: np.ndarray

    def __call__(self, z: PointLike) -> np.ndarray:
        return busemann(self.x, self.y, z)

    def centred(self, quad: SphereQuadrature) -> np.ndarray:
        """Samples at the quadrature nodes with the mean removed (a representative in W0)."""
        values = self(quad.points())
        return values - quad.integrate(values)


def axis_point(params: GroupParams, t: float) -> np.ndarray:
    """a(t).0 = (0, ..., 0, tanh t)."""
    out = origin(params)
    out[-1, 0] = np.tanh(t)
    return out


def busemann_chart(params: GroupParams, t: float, coords: np.ndarray) -> np.ndarray:
    """
    log|1 - z_n tanh t| at z = C(v), written as
    log|D - tanh t (2 - D)| - log|D| with D = 1 + x*x/2 - y/2.
    """
    singular, smooth = busemann_chart_parts(params, t, coords)
    return singular - smooth


def busemann_chart_parts(params: GroupParams, t: float, coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x, y = split_coords(params, coords)
    xx = qabs2(x).sum(axis=-1)
    dmat = qreal(1.0 + xx / 2.0) - y / 2.0
    numer = dmat - np.tanh(t) * (qreal(2.0) - dmat)
    return np.log(qabs(numer)), np.log(cayley_denominator(params, coords))


def log_singular_chart(params: GroupParams, coords: np.ndarray) -> np.ndarray:
    """log|x*x - y| = 2 log N(v)."""
    return 2.0 * np.log(hom_norm_coords(params, coords))


@dataclass
class LimitCheck:
    t: float
    max_deviation: float
    identity_residual: float


def busemann_limit_check(params: GroupParams, t: float, coords: np.ndarray) -> LimitCheck:
    """
    Compare the singular part log|D - tanh t (2 - D)| of the chart Busemann
    function with its t -> infinity limit log|x*x - y| on chart samples, and
    verify the chart expression against gamma evaluated through the Cayley map.
    """
    singular, smooth = busemann_chart_parts(params, t, coords)
    deviation = float(np.max(np.abs(singular - log_singular_chart(params, coords))))
    z = cayley_coords(params, coords)
    direct = np.log(qabs(qreal(1.0) - np.tanh(t) * z[..., -1, :]))
    residual = float(np.max(np.abs(direct - (singular - smooth))))
    logger.debug("Busemann limit t=%.3g deviation=%.3e identity=%.3e", t, deviation, residual)
    return LimitCheck(t, deviation, residual)


# ── Visual densities ─────────────────────────────────────────────────


def _tangent_frames(r: np.ndarray) -> np.ndarray:
    """
    Orthonormal frames of the tangent spaces at unit vectors r (N, D).

    Built from the Householder reflection taking e_(D-1) to r; its first D-1
    columns span the orthogonal complement of r. Returns (N, D, D-1).
    """
    big_d = r.shape[-1]
    v = -r.copy()
    v[:, -1] += 1.0
    vv = np.sum(v * v, axis=-1)
    eye = np.eye(big_d)
    safe = np.where(vv > 1e-24, vv, 1.0)
    house = eye[None] - 2.0 * v[:, :, None] * v[:, None, :] / safe[:, None, None]
    house = np.where((vv > 1e-24)[:, None, None], house, eye[None])
    return house[:, :, :-1]


def sphere_jacobian(g: GroupElement, points: np.ndarray, step: float = JACOBIAN_STEP) -> np.ndarray:
    """
    Volume Jacobian of z -> g.z on the boundary sphere at ``points`` (N, n, 4),
    by central differences along great circles in a tangent frame.
    """
    params = g.params
    r = sphere_real_coords(params, points)
    frames = _tangent_frames(r)
    cols = []
    for i in range(frames.shape[-1]):
        e = frames[:, :, i]
        plus = act_boundary(g, points_from_real(params, r * np.cos(step) + e * np.sin(step)))
        minus = act_boundary(g, points_from_real(params, r * np.cos(step) - e * np.sin(step)))
        cols.append((sphere_real_coords(params, plus) - sphere_real_coords(params, minus)) / (2.0 * step))
    mat = np.stack(cols, axis=-1)
    gram = np.einsum("nki,nkj->nij", mat, mat)
    return np.sqrt(np.linalg.det(gram))


def visual_density_at(
    params: GroupParams,
    x: PointLike,
    points: np.ndarray,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """d mu_x / d mu_0 at ``points``: the Jacobian of z -> g^-1.z for some g with g.0 = x."""
    g = translation_to(params, _coords(x), rng)
    return sphere_jacobian(g.inverse(), points)


def visual_density_closed(params: GroupParams, x: PointLike, points: np.ndarray) -> np.ndarray:
    """(|q(x, x)|^(1/2) / |q(x, z)|)^r, the same density in closed form."""
    xt, zt = lift(_coords(x)), lift(np.asarray(points, dtype=float))
    ratio = np.sqrt(qabs(q_form(xt, xt))) / qabs(q_form(xt, zt))
    return ratio ** params.r


@dataclass(frozen=True, eq=False)
class VisualDensity:
    """Density of mu_x with respect to mu_0 sampled on a quadrature."""

    basepoint: np.ndarray
    quad: SphereQuadrature
    samples: np.ndarray

    @property
    def mass(self) -> float:
        return float(self.quad.integrate(self.samples))

    def spectrum(self) -> SphereSpectrum:
        return sphere_transform(self.quad, self.samples)


def visual_density(
    params: GroupParams,
    x: PointLike,
    quad: SphereQuadrature,
    rng: np.random.Generator | None = None,
) -> VisualDensity:
    samples = visual_density_at(params, x, quad.points(), rng)
    density = VisualDensity(np.array(_coords(x)), quad, samples)
    error = abs(density.mass - 1.0)
    if error > MASS_ERROR_LIMIT:
        logger.error("Visual density mass error %.3e exceeds %.1e", error, MASS_ERROR_LIMIT)
        raise NumericalError("Quadrature too coarse for the visual density", error)
    return density


@dataclass(frozen=True, eq=False)
class CocycleValue:
    """A zero-mass density (for c) or a mean-zero function (for gamma) on a quadrature."""

    quad: SphereQuadrature
    samples: np.ndarray

    @property
    def mean(self) -> float:
        return float(np.real(self.quad.integrate(self.samples)))

    def spectrum(self) -> SphereSpectrum:
        return sphere_transform(self.quad, self.samples)

    def __add__(self, other: "CocycleValue") -> "CocycleValue":
        return CocycleValue(self.quad, self.samples + other.samples)

    def __sub__(self, other: "CocycleValue") -> "CocycleValue":
        return CocycleValue(self.quad, self.samples - other.samples)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.samples)))


def c_cocycle(params: GroupParams, x: PointLike, y: PointLike, quad: SphereQuadrature) -> CocycleValue:
    """c(x, y) = mu_y - mu_x as a density against mu_0."""
    points = quad.points()
    values = visual_density_at(params, y, points) - visual_density_at(params, x, points)
    return CocycleValue(quad, values)


def c_cocycle_at(params: GroupParams, x: PointLike, y: PointLike, points: np.ndarray) -> np.ndarray:
    return visual_density_at(params, y, points) - visual_density_at(params, x, points)


def b_cocycle(g: GroupElement, quad: SphereQuadrature) -> CocycleValue:
    """b_g = c(g.0, 0)."""
    params = g.params
    g0 = act_disk(g, origin(params))
    return c_cocycle(params, g0, origin(params), quad)


# ── Boundary action ──────────────────────────────────────────────────


def pi_action(g: GroupElement, phi: Callable[[np.ndarray], np.ndarray], points: np.ndarray) -> np.ndarray:
    """(pi(g) phi)(z) = phi(g^-1 . z) on functions."""
    return phi(act_boundary(g.inverse(), points))


def pi_action_density(g: GroupElement, mu: Callable[[np.ndarray], np.ndarray], points: np.ndarray) -> np.ndarray:
    """(pi(g) mu)(z) = mu(g^-1 . z) Jac(g^-1)(z) on densities against mu_0."""
    ginv = g.inverse()
    return mu(act_boundary(ginv, points)) * sphere_jacobian(ginv, points)


def d_chart_gradient(phi: GridField) -> list[GridField]:
    """(E_1 phi, ..., E_(d(n-1)) phi) in the Cayley chart."""
    require_first_stratum(phi.grid.params)
    return [left_invariant_field(j, phi) for j in range(phi.grid.params.o_dim)]


def horizontal_gradient_norm(components: list[GridField]) -> np.ndarray:
    return np.sqrt(sum(np.abs(c.values) ** 2 for c in components))
