"""
spectral.py

Fractional powers of the grid sub-Laplacian, Sobolev norms on V, harmonic
analysis on the boundary spheres S^1 and S^2, and the W0 / dual W0 norms of the
real hyperbolic case.

Sphere conventions: unit round sphere, L^2 taken against the normalised
(probability) measure, o = (0, ..., 0, 1) at polar angle 0. Laplace
eigenvalues are m^2 on S^1 and l(l+1) on S^2.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.fft import dstn, fft, idstn, ifft
from scipy.special import gammaln, lpmv, roots_gegenbauer, roots_legendre

from app.core.constants import DENSE_EIGEN_LIMIT, KERNEL_TOL, ZERO_MODE_TOL
from app.core.errors import ConfigurationError, DomainError, UsageError
from app.geometry.heisenberg import Grid, GridField, sublaplacian_matrix
from app.geometry.params import GroupParams
from app.geometry.scalars import FieldTag
from app.integrations.operator_cache import OperatorCache

logger = logging.getLogger(__name__)


# ── Grid operator spectra ────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class OperatorSpectrum:
    """
    Eigendecomposition of the grid sub-Laplacian.

    ``kind == "dense"``: eigenvalues ascending, eigenvectors as columns.
    ``kind == "sine"``: the abelian case, diagonalised by the orthonormal
    DST-I; eigenvalues are stored in grid shape and ``eigenvectors`` is None.
    """

    grid: Grid
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    kind: str

    def transform(self, values: np.ndarray) -> np.ndarray:
        if self.kind == "sine":
            return _dst(values.reshape(self.grid.shape), inverse=False)
        return self.eigenvectors.T @ values.reshape(-1)

    def inverse(self, coeffs: np.ndarray) -> np.ndarray:
        if self.kind == "sine":
            return _dst(coeffs, inverse=True)
        return (self.eigenvectors @ coeffs).reshape(self.grid.shape)

    def sorted_eigenvalues(self) -> np.ndarray:
        return np.sort(self.eigenvalues.reshape(-1))

    def orthonormality_residual(self) -> float:
        if self.kind == "sine":
            return 0.0
        q = self.eigenvectors
        return float(np.max(np.abs(q.T @ q - np.eye(q.shape[1]))))

    def reconstruction_residual(self, matrix) -> float:
        if self.kind == "sine":
            sample = np.random.default_rng(0).standard_normal(self.grid.shape)
            direct = (matrix @ sample.reshape(-1)).reshape(self.grid.shape)
            return float(np.max(np.abs(self.inverse(self.eigenvalues * self.transform(sample)) - direct)))
        q = self.eigenvectors
        dense = matrix.toarray() if hasattr(matrix, "toarray") else np.asarray(matrix)
        return float(np.max(np.abs(dense - (q * self.eigenvalues) @ q.T)))


def _dst(values: np.ndarray, inverse: bool) -> np.ndarray:
    func = idstn if inverse else dstn
    if np.iscomplexobj(values):
        return func(values.real, type=1, norm="ortho") + 1j * func(values.imag, type=1, norm="ortho")
    return func(values, type=1, norm="ortho")


def sine_eigenvalues(grid: Grid) -> np.ndarray:
    """Eigenvalues of the Dirichlet (2, -1) stencil summed over axes, in grid shape."""
    m, h = grid.points_per_axis, grid.h
    k = np.arange(1, m + 1)
    one_d = (4.0 / h**2) * np.sin(k * np.pi / (2.0 * (m + 1))) ** 2
    total = np.zeros(grid.shape)
    for axis in range(grid.dim):
        shape = [1] * grid.dim
        shape[axis] = m
        total = total + one_d.reshape(shape)
    return total


def operator_spectrum(grid: Grid, cache: OperatorCache | None = None) -> OperatorSpectrum:
    """Spectrum of the sub-Laplacian on ``grid``; dense eigh outside the abelian case."""
    if grid.params.field is FieldTag.REAL:
        return OperatorSpectrum(grid, sine_eigenvalues(grid), None, "sine")
    if grid.size > DENSE_EIGEN_LIMIT:
        raise ConfigurationError(
            f"Dense eigendecomposition of {grid.size} nodes exceeds the limit "
            f"{DENSE_EIGEN_LIMIT}; use an integer Sobolev power instead.",
            gate="dense-eigen-limit",
        )
    key = dict(grid.key, operator="sublaplacian")
    if cache is not None:
        hit = cache.load(key)
        if hit is not None:
            logger.info("Loaded spectrum for %s from cache", grid.key)
            return OperatorSpectrum(grid, hit[0], hit[1], "dense")
    logger.info("Computing dense spectrum of %d x %d sub-Laplacian", grid.size, grid.size)
    evals, evecs = scipy.linalg.eigh(sublaplacian_matrix(grid).toarray())
    if cache is not None:
        cache.store(key, [evals, evecs])
    return OperatorSpectrum(grid, evals, evecs, "dense")


def _kernel_mask(lam: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(lam))))
    return np.abs(lam) <= ZERO_MODE_TOL * scale


def _power_weights(lam: np.ndarray, alpha: float, coeffs: np.ndarray) -> np.ndarray:
    kernel = _kernel_mask(lam)
    safe = np.where(kernel, 1.0, np.clip(lam, 0.0, None))
    if alpha == 0:
        return np.ones_like(lam)
    if alpha < 0 and np.any(kernel):
        leak = float(np.max(np.abs(coeffs[kernel])))
        if leak > KERNEL_TOL:
            raise DomainError(f"Negative power on a field with kernel component {leak:.3e}.")
    return np.where(kernel, 0.0, safe**alpha)


def frac_power_apply(spec: OperatorSpectrum, alpha: float, f: GridField, shift: float = 0.0) -> GridField:
    """(shift + Delta)^alpha f; zero modes map to 0 for alpha != 0."""
    coeffs = spec.transform(f.values)
    lam = spec.eigenvalues + shift
    return f.with_values(spec.inverse(_power_weights(lam, alpha, coeffs) * coeffs))


def integer_power_apply(f: GridField, k: int, shift: float = 0.0, matrix=None) -> GridField:
    """(shift + Delta)^k f by repeated sparse products."""
    if k < 0 or int(k) != k:
        raise UsageError(f"Integer power must be a nonnegative integer, got {k!r}.")
    matrix = sublaplacian_matrix(f.grid) if matrix is None else matrix
    vec = f.flat
    for _ in range(int(k)):
        vec = matrix @ vec + shift * vec
    return f.with_values(vec.reshape(f.grid.shape))


def sobolev_norm_V(
    f: GridField,
    alpha: float,
    shifted: bool = False,
    spec: OperatorSpectrum | None = None,
    matrix=None,
) -> float:
    """
    ||Delta^(alpha/2) f|| or, when ``shifted``, ||(1 + Delta)^(alpha/2) f||.

    Integer powers alpha/2 with no spectrum supplied go through sparse products.
    """
    half = alpha / 2.0
    shift = 1.0 if shifted else 0.0
    if alpha == 0:
        return f.l2_norm()
    if spec is None and float(half).is_integer() and half > 0:
        return integer_power_apply(f, int(half), shift, matrix).l2_norm()
    spec = spec if spec is not None else operator_spectrum(f.grid)
    coeffs = spec.transform(f.values)
    weights = _power_weights(spec.eigenvalues + shift, half, coeffs)
    return float(np.sqrt(np.sum(np.abs(weights * coeffs) ** 2) * f.grid.cell_volume))


# ── Sphere quadrature and transforms ─────────────────────────────────


@dataclass(frozen=True)
class SphereQuadrature:
    """
    Product quadrature on S^1 (uniform) or S^2 (Gauss-Legendre x uniform).

    A zonal quadrature on S^2 keeps only the polar nodes (phi = 0) and is exact
    for functions invariant under rotations fixing o.
    """

    sphere_dim: int
    band: int
    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray
    n_theta: int
    n_phi: int
    zonal: bool = False

    @property
    def size(self) -> int:
        return int(self.weights.size)

    def points(self) -> np.ndarray:
        """Nodes as boundary points of shape (N, n, 4) with n = sphere_dim + 1."""
        out = np.zeros((self.size, self.sphere_dim + 1, 4))
        if self.sphere_dim == 1:
            out[:, 0, 0] = np.sin(self.theta)
            out[:, 1, 0] = np.cos(self.theta)
        else:
            out[:, 0, 0] = np.sin(self.theta) * np.cos(self.phi)
            out[:, 1, 0] = np.sin(self.theta) * np.sin(self.phi)
            out[:, 2, 0] = np.cos(self.theta)
        return out

    def integrate(self, samples: np.ndarray) -> complex | float:
        return np.sum(self.weights * samples)


def circle_quadrature(band: int, size: int | None = None) -> SphereQuadrature:
    size = size or 2 * band + 2
    theta = 2.0 * np.pi * np.arange(size) / size
    return SphereQuadrature(1, band, theta, np.zeros(size), np.full(size, 1.0 / size), size, 1)


def sphere_quadrature(band: int, n_theta: int | None = None, n_phi: int | None = None) -> SphereQuadrature:
    n_theta = n_theta or band + 1
    n_phi = n_phi or 2 * band + 2
    x, w = roots_legendre(n_theta)
    theta = np.arccos(x)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    weights = np.repeat(w / 2.0, n_phi) / n_phi
    return SphereQuadrature(2, band, th.ravel(), ph.ravel(), weights, n_theta, n_phi)


def zonal_quadrature(band: int, n_theta: int | None = None) -> SphereQuadrature:
    n_theta = n_theta or band + 1
    x, w = roots_legendre(n_theta)
    theta = np.arccos(x)
    return SphereQuadrature(2, band, theta, np.zeros(n_theta), w / 2.0, n_theta, 1, zonal=True)


def quadrature_for(params: GroupParams, band: int, zonal: bool = False) -> SphereQuadrature:
    require_so_sphere(params)
    if params.n == 2:
        return circle_quadrature(band)
    return zonal_quadrature(band) if zonal else sphere_quadrature(band)


@dataclass(frozen=True)
class AmbientSphereRule:
    """Cubature on S^(m-1) in R^m: unit vectors (N, m) and weights summing to one."""

    points: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return int(self.weights.size)

    def integrate(self, samples: np.ndarray) -> complex | float:
        return np.sum(self.weights * samples)


def ambient_sphere_rule(m: int, nodes: int) -> AmbientSphereRule:
    """
    Recursive product rule: Gauss-Gegenbauer in the last coordinate times the
    rule on the equatorial S^(m-2), uniform at the bottom (S^1, 2*nodes points).
    Exact for polynomials of degree <= 2*nodes - 1.
    """
    if m < 2:
        raise UsageError(f"Sphere rule needs ambient dimension >= 2, got {m}.")
    if nodes < 1:
        raise UsageError(f"Sphere rule needs at least one node, got {nodes}.")
    if m == 2:
        phi = np.pi * np.arange(2 * nodes) / nodes
        pts = np.stack([np.sin(phi), np.cos(phi)], axis=-1)
        return AmbientSphereRule(pts, np.full(2 * nodes, 1.0 / (2 * nodes)))
    x, w = roots_gegenbauer(nodes, (m - 2) / 2.0)
    w = w / np.sum(w)
    sub = ambient_sphere_rule(m - 1, nodes)
    radius = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    head = radius[:, None, None] * sub.points[None, :, :]
    tail = np.broadcast_to(x[:, None, None], (x.size, sub.size, 1))
    pts = np.concatenate([head, tail], axis=-1).reshape(-1, m)
    return AmbientSphereRule(pts, (w[:, None] * sub.weights[None, :]).ravel())


def real_harmonics(band: int, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Real spherical harmonics, orthonormal for the normalised measure; index l^2 + l + m."""
    x = np.cos(theta)
    out = np.zeros((theta.size, (band + 1) ** 2))
    for l in range(band + 1):
        for m in range(l + 1):
            norm = np.sqrt(2 * l + 1) * np.exp(0.5 * (gammaln(l - m + 1) - gammaln(l + m + 1)))
            leg = (-1.0) ** m * lpmv(m, l, x) * norm
            if m == 0:
                out[:, l * l + l] = leg
            else:
                out[:, l * l + l + m] = np.sqrt(2.0) * leg * np.cos(m * phi)
                out[:, l * l + l - m] = np.sqrt(2.0) * leg * np.sin(m * phi)
    return out


def _legendre_sweep(band: int, theta: np.ndarray):
    """Yield (l, P_l(cos theta)) by the three-term recurrence; O(len(theta)) memory."""
    x = np.cos(theta)
    prev, cur = np.ones_like(x), x.copy()
    yield 0, prev
    if band >= 1:
        yield 1, cur
    for l in range(1, band):
        prev, cur = cur, ((2 * l + 1) * x * cur - l * prev) / (l + 1)
        yield l + 1, cur


def zonal_project(band: int, theta: np.ndarray, weighted: np.ndarray) -> np.ndarray:
    """Coefficients sum_i w_i f_i sqrt(2l+1) P_l(cos theta_i) for l <= band."""
    out = np.zeros(band + 1, dtype=np.result_type(weighted, float))
    for l, p in _legendre_sweep(band, theta):
        out[l] = np.sqrt(2 * l + 1) * np.dot(p, weighted)
    return out


def zonal_synthesize(band: int, theta: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    out = np.zeros(theta.shape, dtype=np.result_type(coeffs, float))
    for l, p in _legendre_sweep(band, theta):
        out = out + np.sqrt(2 * l + 1) * coeffs[l] * p
    return out


@dataclass(frozen=True, eq=False)
class SphereSpectrum:
    """Harmonic coefficients of a function or density on S^1 or S^2."""

    sphere_dim: int
    band: int
    coefficients: np.ndarray
    zonal: bool = False

    @property
    def degrees(self) -> np.ndarray:
        """Fourier mode m on S^1, degree l on S^2 (per coefficient)."""
        if self.sphere_dim == 1:
            return np.arange(-self.band, self.band + 1)
        if self.zonal:
            return np.arange(self.band + 1)
        return np.concatenate([np.full(2 * l + 1, l) for l in range(self.band + 1)])

    @property
    def laplace_eigenvalues(self) -> np.ndarray:
        k = self.degrees.astype(float)
        return k * k if self.sphere_dim == 1 else k * (k + 1.0)

    @property
    def zero_mode(self) -> complex:
        idx = self.band if self.sphere_dim == 1 else 0
        return complex(self.coefficients[idx])

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coefficients) ** 2)))

    def without_zero_mode(self) -> "SphereSpectrum":
        coeffs = np.array(self.coefficients, copy=True)
        coeffs[self.band if self.sphere_dim == 1 else 0] = 0.0
        return self.with_coefficients(coeffs)

    def with_coefficients(self, coeffs: np.ndarray) -> "SphereSpectrum":
        return SphereSpectrum(self.sphere_dim, self.band, coeffs, self.zonal)

    def __sub__(self, other: "SphereSpectrum") -> "SphereSpectrum":
        return self.with_coefficients(self.coefficients - other.coefficients)

    def __add__(self, other: "SphereSpectrum") -> "SphereSpectrum":
        return self.with_coefficients(self.coefficients + other.coefficients)


def sphere_transform(quad: SphereQuadrature, samples: np.ndarray, band: int | None = None) -> SphereSpectrum:
    band = quad.band if band is None else band
    samples = np.asarray(samples)
    if samples.shape[0] != quad.size:
        raise UsageError(f"Expected {quad.size} samples, got {samples.shape[0]}.")
    if quad.sphere_dim == 1:
        if quad.size < 2 * band + 1:
            raise UsageError(f"{quad.size} samples cannot resolve band {band} on S^1.")
        full = fft(samples) / quad.size
        modes = np.arange(-band, band + 1)
        return SphereSpectrum(1, band, full[modes % quad.size])
    if quad.n_theta < band + 1 or (not quad.zonal and quad.n_phi < 2 * band + 1):
        raise UsageError(
            f"Quadrature {quad.n_theta} x {quad.n_phi} cannot resolve band {band} on S^2."
        )
    if quad.zonal:
        return SphereSpectrum(2, band, zonal_project(band, quad.theta, quad.weights * samples), True)
    basis = real_harmonics(band, quad.theta, quad.phi)
    return SphereSpectrum(2, band, basis.T @ (quad.weights * samples))


def sphere_inverse(spec: SphereSpectrum, quad: SphereQuadrature) -> np.ndarray:
    """Evaluate the harmonic expansion at the quadrature nodes."""
    if spec.sphere_dim == 1:
        modes = np.arange(-spec.band, spec.band + 1)
        full = np.zeros(quad.size, dtype=complex)
        full[modes % quad.size] = spec.coefficients
        return ifft(full) * quad.size
    if spec.zonal:
        return zonal_synthesize(spec.band, quad.theta, spec.coefficients)
    return real_harmonics(spec.band, quad.theta, quad.phi) @ spec.coefficients


# ── W0 norms in the real hyperbolic case ─────────────────────────────


def require_so_sphere(params: GroupParams, spec: SphereSpectrum | None = None) -> None:
    if params.field is not FieldTag.REAL or params.n not in (2, 3):
        raise ConfigurationError(
            f"Sphere-spectral norms are available for SO_0(2,1) and SO_0(3,1), not {params.label}.",
            gate="so-spectral-gate",
        )
    if spec is not None and spec.sphere_dim != params.n - 1:
        raise UsageError(f"Spectrum lives on S^{spec.sphere_dim}, expected S^{params.n - 1}.")


def w0_norm_sphere(phi: SphereSpectrum, params: GroupParams) -> float:
    """||Delta^((n-1)/4) phi||; constants are invisible."""
    require_so_sphere(params, phi)
    lam = phi.laplace_eigenvalues
    live = lam > 0
    weight = lam[live] ** ((params.n - 1) / 2.0)
    return float(np.sqrt(np.sum(weight * np.abs(phi.coefficients[live]) ** 2)))


def dual_norm_W(mu: SphereSpectrum, params: GroupParams, mass_tol: float = 1e-10) -> float:
    """Dual of the W0 norm on zero-mass densities."""
    require_so_sphere(params, mu)
    if abs(mu.zero_mode) > mass_tol:
        raise DomainError(f"Density has total mass {abs(mu.zero_mode):.3e}; the dual norm needs mass 0.")
    lam = mu.laplace_eigenvalues
    live = lam > 0
    weight = lam[live] ** (-(params.n - 1) / 2.0)
    return float(np.sqrt(np.sum(weight * np.abs(mu.coefficients[live]) ** 2)))


def pairing(mu: SphereSpectrum, phi: SphereSpectrum) -> float:
    """<mu, phi> = integral of mu phi against the normalised measure, for real data."""
    return float(np.real(np.sum(np.conj(mu.coefficients) * phi.coefficients)))


def dual_extremizer(mu: SphereSpectrum, params: GroupParams) -> SphereSpectrum:
    """The phi saturating |<mu, phi>| <= ||mu||_* ||phi||_W0."""
    require_so_sphere(params, mu)
    lam = mu.laplace_eigenvalues
    live = lam > 0
    coeffs = np.zeros_like(mu.coefficients, dtype=complex if np.iscomplexobj(mu.coefficients) else float)
    coeffs[live] = mu.coefficients[live] * lam[live] ** (-(params.n - 1) / 2.0)
    return mu.with_coefficients(coeffs)


def sphere_angles(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(theta, phi) of real boundary points (..., n, 4); theta is the angle from o."""
    z = np.asarray(points, dtype=float)[..., 0]
    if z.shape[-1] == 2:
        return np.arctan2(z[..., 0], z[..., 1]), np.zeros(z.shape[:-1])
    theta = np.arccos(np.clip(z[..., 2], -1.0, 1.0))
    return theta, np.arctan2(z[..., 1], z[..., 0])


def evaluate_spectrum(spec: SphereSpectrum, points: np.ndarray) -> np.ndarray:
    """Evaluate a harmonic expansion at arbitrary boundary points."""
    theta, phi = sphere_angles(points)
    flat_theta, flat_phi = theta.ravel(), phi.ravel()
    if spec.sphere_dim == 1:
        modes = np.arange(-spec.band, spec.band + 1)
        values = np.exp(1j * np.outer(flat_theta, modes)) @ spec.coefficients
    elif spec.zonal:
        values = zonal_synthesize(spec.band, flat_theta, spec.coefficients)
    else:
        values = real_harmonics(spec.band, flat_theta, flat_phi) @ spec.coefficients
    return values.reshape(theta.shape)
