"""
groups.py

The rank-one groups G = O(q) over R, C, H acting on the unit disk of F^n and on
its boundary sphere S^(dn-1).

q(z, w) = -conj(z_0) w_0 + sum_j conj(z_j) w_j on F^(n+1). Matrices are stored
as (n+1, n+1, 4) real arrays and act on column vectors from the left; scalars
act on vectors from the right, so the disk action reads (c + D z)(a + b z)^-1.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.optimize import least_squares

from app.core.constants import (
    ACOSH_GUARD,
    CAYLEY_POLE_TOL,
    DENOMINATOR_TOL,
    HYPERBOLIC_RADIUS_CAP,
    IWASAWA_TOL,
    JACOBIAN_STEP,
    MEMBERSHIP_TOL,
    SPHERE_TOL,
)
from app.core.errors import DomainError, NumericalError, UsageError
from app.geometry.heisenberg import HeisElement, join_coords, split_coords, v_inv
from app.geometry.params import GroupParams
from app.geometry.scalars import (
    FieldTag,
    qabs,
    qabs2,
    qconj,
    qdot,
    qim,
    qinv,
    qmatmul,
    qmatvec,
    qmul,
    qre,
    qreal,
    random_components,
)

logger = logging.getLogger(__name__)

SQRT2 = np.sqrt(2.0)

__all__ = [
    "GroupParams",
    "GroupElement",
    "DiskPoint",
    "BoundaryPoint",
    "IwasawaDecomposition",
    "q_form",
    "make_a",
    "make_w0",
    "make_U",
    "make_a_diagonal",
    "make_v",
    "make_n",
    "act_disk",
    "act_boundary",
    "dist",
    "cayley",
    "cayley_inv",
    "cayley_jacobian",
    "iwasawa",
    "iwasawa_t",
    "rho",
]


# ── Elements ─────────────────────────────────────────────────────────


def _identity_entries(size: int) -> np.ndarray:
    out = np.zeros((size, size, 4))
    out[np.arange(size), np.arange(size), 0] = 1.0
    return out


def adjoint_entries(entries: np.ndarray) -> np.ndarray:
    """Conjugate transpose of (..., p, q, 4) matrices."""
    return qconj(np.swapaxes(entries, -3, -2))


@dataclass(frozen=True, eq=False)
class GroupElement:
    """An (n+1) x (n+1) matrix over F; membership in O(q) is checked on demand."""

    entries: np.ndarray
    params: GroupParams

    def __post_init__(self) -> None:
        size = self.params.size
        entries = np.asarray(self.entries, dtype=float)
        if entries.shape != (size, size, 4):
            raise UsageError(f"Expected a {size}x{size} matrix, got shape {entries.shape[:-1]}.")
        object.__setattr__(self, "entries", self.params.field.project(entries))

    @classmethod
    def identity(cls, params: GroupParams) -> "GroupElement":
        return cls(_identity_entries(params.size), params)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        if other.params != self.params:
            raise UsageError(f"Cannot multiply {self.params.label} by {other.params.label}.")
        return GroupElement(qmatmul(self.entries, other.entries), self.params)

    def adjoint(self) -> "GroupElement":
        return GroupElement(adjoint_entries(self.entries), self.params)

    def inverse(self) -> "GroupElement":
        """A^-1 = J A* J for A in O(q)."""
        j = q_matrix(self.params)
        return j @ self.adjoint() @ j

    def q_residual(self) -> float:
        """max |q(Ae_i, Ae_j) - q(e_i, e_j)|."""
        j = q_matrix(self.params).entries
        gram = qmatmul(adjoint_entries(self.entries), qmatmul(j, self.entries))
        return float(np.max(qabs(gram - j)))

    def euclidean_residual(self) -> float:
        gram = qmatmul(adjoint_entries(self.entries), self.entries)
        return float(np.max(qabs(gram - _identity_entries(self.params.size))))

    def distance_to(self, other: "GroupElement") -> float:
        return float(np.max(qabs(self.entries - other.entries)))


def q_matrix(params: GroupParams) -> GroupElement:
    """J = diag(-1, 1, ..., 1), the Gram matrix of q."""
    entries = _identity_entries(params.size)
    entries[0, 0, 0] = -1.0
    return GroupElement(entries, params)


def is_in_G(g: GroupElement, tol: float = MEMBERSHIP_TOL) -> bool:
    return g.q_residual() <= tol


def is_in_K(g: GroupElement, tol: float = MEMBERSHIP_TOL) -> bool:
    """K = G intersected with the Euclidean unitary group."""
    return g.q_residual() <= tol and g.euclidean_residual() <= tol


# ── Points ───────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class DiskPoint:
    """A point of the open unit disk in F^n."""

    z: np.ndarray
    params: GroupParams

    def __post_init__(self) -> None:
        z = self.params.field.project(np.asarray(self.z, dtype=float).reshape(self.params.n, 4))
        norm2 = float(qabs2(z).sum())
        if not norm2 < 1.0:
            raise DomainError(f"Point with |z|^2 = {norm2:.6g} is not in the open disk.")
        object.__setattr__(self, "z", z)


@dataclass(frozen=True, eq=False)
class BoundaryPoint:
    """A point of the unit sphere S^(dn-1)."""

    z: np.ndarray
    params: GroupParams

    def __post_init__(self) -> None:
        z = self.params.field.project(np.asarray(self.z, dtype=float).reshape(self.params.n, 4))
        norm2 = float(qabs2(z).sum())
        if abs(norm2 - 1.0) > SPHERE_TOL:
            raise DomainError(f"Point with |z|^2 = {norm2:.15g} is not on the unit sphere.")
        object.__setattr__(self, "z", z)


PointLike = Union[DiskPoint, BoundaryPoint, np.ndarray]


def _coords(p: PointLike) -> np.ndarray:
    if isinstance(p, (DiskPoint, BoundaryPoint)):
        return p.z
    return np.asarray(p, dtype=float)


def origin(params: GroupParams) -> np.ndarray:
    return np.zeros((params.n, 4))


def basepoint_o(params: GroupParams) -> np.ndarray:
    """o = (0, ..., 0, 1), the point fixed by P."""
    out = np.zeros((params.n, 4))
    out[-1, 0] = 1.0
    return out


def lift(z: np.ndarray) -> np.ndarray:
    """z -> [1, z] in F^(n+1)."""
    z = np.asarray(z, dtype=float)
    one = qreal(np.ones(z.shape[:-2] + (1,)))
    return np.concatenate([one, z], axis=-2)


def q_form(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """q(z, w) for (..., n+1, 4) arrays; sesquilinear with scalars on the right."""
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    if z.shape[-2] != w.shape[-2]:
        raise UsageError(f"q_form length mismatch: {z.shape[-2]} vs {w.shape[-2]}.")
    head = qmul(qconj(z[..., 0, :]), w[..., 0, :])
    return qdot(z[..., 1:, :], w[..., 1:, :]) - head


# ── Distinguished elements ───────────────────────────────────────────


def make_a(params: GroupParams, t: float) -> GroupElement:
    n = params.n
    entries = _identity_entries(params.size)
    entries[0, 0, 0] = entries[n, n, 0] = np.cosh(t)
    entries[0, n, 0] = entries[n, 0, 0] = np.sinh(t)
    return GroupElement(entries, params)


def make_w0(params: GroupParams) -> GroupElement:
    return q_matrix(params)


def make_U(params: GroupParams) -> GroupElement:
    """The involution exchanging the A-eigenlines; U = U* = U^-1."""
    n = params.n
    entries = _identity_entries(params.size)
    entries[0, 0, 0] = -1.0 / SQRT2
    entries[0, n, 0] = entries[n, 0, 0] = entries[n, n, 0] = 1.0 / SQRT2
    return GroupElement(entries, params)


def make_a_diagonal(params: GroupParams, t: float) -> GroupElement:
    """diag(e^-t, 1, ..., 1, e^t), so that a(t) = U diag U.

    U is a light-cone change of basis and does not preserve q; neither does
    this matrix. Only the conjugate U diag U lies in G.
    """
    n = params.n
    entries = _identity_entries(params.size)
    entries[0, 0, 0] = np.exp(-t)
    entries[n, n, 0] = np.exp(t)
    return GroupElement(entries, params)


def _xy(params: GroupParams, x, y) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(x, HeisElement):
        return x.x, x.y
    y = np.zeros(4) if y is None else np.asarray(y, dtype=float).reshape(4)
    if qre(y) != 0.0:
        raise UsageError(f"y must be purely imaginary, got real part {qre(y)!r}.")
    x = np.asarray(x, dtype=float).reshape(params.n - 1, 4)
    return params.field.project(x), params.field.project(y)


def make_v(params: GroupParams, x, y=None) -> GroupElement:
    """
    v(x, y) in V. ``x`` may be a HeisElement, in which case ``y`` is ignored.

    v(x', y') v(x, y) = v(x' + x, y' + y - 2 Im(x'* x)).
    """
    x, y = _xy(params, x, y)
    n = params.n
    xx = float(qabs2(x).sum())
    xs = qconj(x) / SQRT2
    entries = _identity_entries(params.size)
    entries[0, 0] = qreal(1.0 + xx / 4.0) - y / 4.0
    entries[0, n] = qreal(xx / 4.0) - y / 4.0
    entries[n, 0] = qreal(-xx / 4.0) + y / 4.0
    entries[n, n] = qreal(1.0 - xx / 4.0) + y / 4.0
    entries[0, 1:n] = xs
    entries[n, 1:n] = -xs
    entries[1:n, 0] = x / SQRT2
    entries[1:n, n] = x / SQRT2
    return GroupElement(entries, params)


def make_n(params: GroupParams, x, y=None) -> GroupElement:
    """n(x, y) = w0 v(x, y) w0."""
    w0 = make_w0(params)
    return w0 @ make_v(params, x, y) @ w0


def v_coordinates(g: GroupElement) -> HeisElement:
    """Read (x, y) back from a matrix of the form v(x, y)."""
    n = g.params.n
    x = SQRT2 * g.entries[1:n, 0]
    y = -4.0 * qim(g.entries[0, 0])
    return HeisElement(x, y, g.params)


def conjugation_dilation(t: float) -> float:
    """a(t) v(x, y) a(-t) = v(delta_s(x, y)) with s = e^-t."""
    return float(np.exp(-t))


def make_k(params: GroupParams, lam: np.ndarray, block: np.ndarray) -> GroupElement:
    """diag(lam, R) with lam a unit scalar and R an n x n unitary block."""
    entries = np.zeros((params.size, params.size, 4))
    entries[0, 0] = lam
    entries[1:, 1:] = block
    return GroupElement(entries, params)


# ── Random sampling ──────────────────────────────────────────────────


def _orthonormalise(cols: list[np.ndarray], v: np.ndarray) -> np.ndarray:
    for _ in range(2):
        for q in cols:
            v = v - qmul(q, qdot(q, v)[None, :])
    return v / np.sqrt(qabs2(v).sum())


def _fix_real_determinant(mat: np.ndarray, tag: FieldTag, column: int = 0) -> np.ndarray:
    if tag is FieldTag.REAL and mat.shape[0] > 0 and np.linalg.det(mat[..., 0]) < 0:
        mat = mat.copy()
        mat[:, column] *= -1.0
    return mat


def random_unitary(rng: np.random.Generator, tag: FieldTag, m: int) -> np.ndarray:
    """Random m x m unitary matrix over the field (determinant one over R)."""
    if m == 0:
        return np.zeros((0, 0, 4))
    cols: list[np.ndarray] = []
    for _ in range(m):
        cols.append(_orthonormalise(cols, random_components(rng, tag, m)))
    return _fix_real_determinant(np.stack(cols, axis=1), tag)


def complete_unitary(rng: np.random.Generator, tag: FieldTag, u: np.ndarray) -> np.ndarray:
    """Random unitary matrix whose last column is the unit vector ``u``."""
    m = u.shape[0]
    cols = [_orthonormalise([], tag.project(u))]
    for _ in range(m - 1):
        cols.append(_orthonormalise(cols, random_components(rng, tag, m)))
    mat = np.stack(cols[1:] + cols[:1], axis=1)
    return _fix_real_determinant(mat, tag)


def random_unit(rng: np.random.Generator, tag: FieldTag) -> np.ndarray:
    if tag is FieldTag.REAL:
        return qreal(1.0)
    z = random_components(rng, tag)
    return z / qabs(z)


def random_k(rng: np.random.Generator, params: GroupParams) -> GroupElement:
    return make_k(params, random_unit(rng, params.field), random_unitary(rng, params.field, params.n))


def random_m(rng: np.random.Generator, params: GroupParams) -> GroupElement:
    """diag(u, R', u): the centraliser of A in K."""
    n = params.n
    u = random_unit(rng, params.field)
    entries = np.zeros((params.size, params.size, 4))
    entries[0, 0] = entries[n, n] = u
    entries[1:n, 1:n] = random_unitary(rng, params.field, n - 1)
    return GroupElement(entries, params)


def random_heis(rng: np.random.Generator, params: GroupParams, scale: float = 1.0) -> HeisElement:
    return HeisElement.random(rng, params, scale)


def random_p(rng: np.random.Generator, params: GroupParams, t_scale: float = 2.0) -> GroupElement:
    """m a(t) n(x, y), an element of the stabiliser of o."""
    t = rng.uniform(-t_scale, t_scale)
    return random_m(rng, params) @ make_a(params, t) @ make_n(params, random_heis(rng, params))


def random_group_element(
    rng: np.random.Generator, params: GroupParams, t_max: float = HYPERBOLIC_RADIUS_CAP
) -> GroupElement:
    """k a(t) k' with t uniform in [0, t_max]."""
    t = rng.uniform(0.0, t_max)
    return random_k(rng, params) @ make_a(params, t) @ random_k(rng, params)


def random_boundary_point(rng: np.random.Generator, params: GroupParams, size=()) -> np.ndarray:
    shape = tuple(np.atleast_1d(size)) if size != () else ()
    z = random_components(rng, params.field, shape + (params.n,))
    return z / np.sqrt(qabs2(z).sum(axis=-1))[..., None, None]


def random_disk_point(
    rng: np.random.Generator,
    params: GroupParams,
    size=(),
    radius_cap: float = HYPERBOLIC_RADIUS_CAP,
) -> np.ndarray:
    """Random direction at hyperbolic distance uniform in [0, radius_cap] from 0."""
    direction = random_boundary_point(rng, params, size)
    t = rng.uniform(0.0, radius_cap, size=direction.shape[:-2])
    return direction * np.tanh(t)[..., None, None]


def translation_to(params: GroupParams, x: np.ndarray, rng: np.random.Generator | None = None) -> GroupElement:
    """
    Some g = k a(t) with g.0 = x.

    k fixes the lam-slot to 1 and rotates e_n onto x/|x|; the rest of k is drawn
    from ``rng`` (deterministic when rng is None).
    """
    x = _coords(x)
    radius = float(np.sqrt(qabs2(x).sum()))
    if radius == 0.0:
        return GroupElement.identity(params)
    rng = rng if rng is not None else np.random.default_rng(0)
    block = complete_unitary(rng, params.field, x / radius)
    k = make_k(params, qreal(1.0), block)
    return k @ make_a(params, float(np.arctanh(radius)))


# ── Actions and distance ─────────────────────────────────────────────


def _act(g: GroupElement, z: np.ndarray) -> np.ndarray:
    e = g.entries
    denom = e[0, 0] + qmul(e[0, 1:], z).sum(axis=-2)
    size = qabs(denom)
    if np.any(size < DENOMINATOR_TOL):
        logger.error("Vanishing denominator in disk action (min |a+bz| = %.3e)", float(np.min(size)))
        raise NumericalError("Denominator a + bz vanished in the disk action", float(np.min(size)))
    numer = e[1:, 0] + qmatvec(e[1:, 1:], z)
    return qmul(numer, qinv(denom)[..., None, :])


def act_disk(g: GroupElement, z: PointLike):
    """g.z = (c + D z)(a + b z)^-1; returns the same kind of object it was given."""
    out = _act(g, _coords(z))
    return DiskPoint(out, g.params) if isinstance(z, DiskPoint) else out


def act_boundary(g: GroupElement, z: PointLike):
    out = _act(g, _coords(z))
    return BoundaryPoint(out, g.params) if isinstance(z, BoundaryPoint) else out


def dist(x: PointLike, y: PointLike) -> np.ndarray:
    """Hyperbolic distance, normalised so that dist(0, a(t).0) = t."""
    xt, yt = lift(_coords(x)), lift(_coords(y))
    num = qabs(q_form(xt, yt))
    den = np.sqrt(qabs(q_form(xt, xt)) * qabs(q_form(yt, yt)))
    arg = num / den
    if np.any(arg < 1.0 - ACOSH_GUARD):
        logger.warning("Distance ratio below 1 beyond guard (min %.3e); clamping", float(np.min(arg)))
    out = np.arccosh(np.maximum(arg, 1.0))
    return float(out) if np.ndim(out) == 0 else out


# ── Cayley transform ─────────────────────────────────────────────────


def cayley_arrays(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """v(x, y).o = (sqrt2 x ; 1 - x*x/2 + y/2) (1 + x*x/2 - y/2)^-1."""
    xx = qabs2(x).sum(axis=-1)
    dinv = qinv(qreal(1.0 + xx / 2.0) - y / 2.0)
    head = SQRT2 * qmul(x, dinv[..., None, :])
    tail = qmul(qreal(1.0 - xx / 2.0) + y / 2.0, dinv)
    return np.concatenate([head, tail[..., None, :]], axis=-2)


def cayley_coords(params: GroupParams, coords: np.ndarray) -> np.ndarray:
    """Vectorised Cayley map from flat V coordinates to boundary points."""
    return cayley_arrays(*split_coords(params, coords))


def cayley_inv_coords(params: GroupParams, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    gap = np.sqrt(qabs2(z + basepoint_o(params)).sum(axis=-1))
    if np.any(gap <= CAYLEY_POLE_TOL):
        raise DomainError(
            f"Boundary point within {float(np.min(gap)):.3e} of -o has no Cayley preimage."
        )
    dmat = 2.0 * qinv(qreal(1.0) + z[..., -1, :])
    x = qmul(z[..., :-1, :], dmat[..., None, :]) / SQRT2
    y = -2.0 * qim(dmat)
    return join_coords(params, x, y)


def cayley(v: HeisElement) -> BoundaryPoint:
    return BoundaryPoint(cayley_arrays(v.x, v.y), v.params)


def cayley_inv(z: BoundaryPoint) -> HeisElement:
    return HeisElement.from_coords(z.params, cayley_inv_coords(z.params, z.z))


def cayley_denominator(params: GroupParams, coords: np.ndarray) -> np.ndarray:
    """|1 + x*x/2 - y/2|, which equals e^t(v) for the Iwasawa exponent of v."""
    x, y = split_coords(params, coords)
    xx = qabs2(x).sum(axis=-1)
    return np.sqrt((1.0 + xx / 2.0) ** 2 + qabs2(y) / 4.0)


def cayley_jacobian_constant(params: GroupParams) -> float:
    return 2.0 ** (params.o_dim / 2.0) / params.sphere_area


def cayley_jacobian_coords(params: GroupParams, coords: np.ndarray) -> np.ndarray:
    """Density of the normalised round measure pulled back to dx dy."""
    return cayley_jacobian_constant(params) * cayley_denominator(params, coords) ** (-params.r)


def cayley_jacobian(v: HeisElement) -> float:
    return float(cayley_jacobian_coords(v.params, v.to_coords()))


def sphere_real_coords(params: GroupParams, z: np.ndarray) -> np.ndarray:
    """Boundary points (..., n, 4) flattened to R^(dn)."""
    z = np.asarray(z, dtype=float)
    return z[..., : params.d].reshape(z.shape[:-2] + (params.d * params.n,))


def points_from_real(params: GroupParams, r: np.ndarray) -> np.ndarray:
    """Inverse of sphere_real_coords: (..., dn) real vectors to (..., n, 4) points."""
    r = np.asarray(r, dtype=float)
    lead = r.shape[:-1]
    out = np.zeros(lead + (params.n, 4))
    out[..., : params.d] = r.reshape(lead + (params.n, params.d))
    return out


def cayley_jacobian_numeric(params: GroupParams, coords: np.ndarray, step: float = JACOBIAN_STEP) -> float:
    """sqrt(det(M^T M)) / |S^(dn-1)| with M the central-difference derivative of the Cayley map."""
    coords = np.asarray(coords, dtype=float).reshape(params.v_dim)
    cols = []
    for i in range(params.v_dim):
        e = np.zeros(params.v_dim)
        e[i] = step
        plus = sphere_real_coords(params, cayley_coords(params, coords + e))
        minus = sphere_real_coords(params, cayley_coords(params, coords - e))
        cols.append((plus - minus) / (2.0 * step))
    mat = np.stack(cols, axis=1)
    return float(np.sqrt(np.linalg.det(mat.T @ mat)) / params.sphere_area)


# ── Iwasawa decomposition G = KNA ────────────────────────────────────


@dataclass(frozen=True)
class IwasawaDecomposition:
    """g = k n(x, y) a(t)."""

    k: GroupElement
    heis: HeisElement
    t: float
    residual: float


def _null_vector(params: GroupParams) -> np.ndarray:
    """[1, o] = e_0 + e_n, an eigenvector of a(t) with eigenvalue e^t and fixed by N."""
    return lift(basepoint_o(params))


def _k_part(g: GroupElement, t: float, heis: HeisElement) -> GroupElement:
    return g @ make_a(g.params, -t) @ make_n(g.params, v_inv(heis))


def iwasawa(g: GroupElement, tol: float = IWASAWA_TOL) -> IwasawaDecomposition:
    """
    Decompose g = k n(x, y) a(t).

    t comes from |g [1, o]| = sqrt2 e^t; with h = g a(-t) = k n one has
    h* h [1, o] = n(-x, -y) [1, o], from which x and y are read off. If the
    recovered k is not unitary to ``tol`` the chart (t, x, y) is refined by
    least squares on the off-unitarity of g a(-t) n(-x, -y).
    """
    params = g.params
    n = params.n
    o_hat = _null_vector(params)
    image = qmatvec(g.entries, o_hat)
    t = float(np.log(np.sqrt(qabs2(image).sum()) / SQRT2))
    h = g @ make_a(params, -t)
    w = qmatvec(qmatmul(adjoint_entries(h.entries), h.entries), o_hat)
    x = -w[1:n] / SQRT2
    y = qim(w[0] - w[n])
    heis = HeisElement(x, y, params)
    k = _k_part(g, t, heis)
    residual = max(k.euclidean_residual(), k.q_residual())
    if residual <= tol:
        return IwasawaDecomposition(k, heis, t, residual)

    logger.info("Closed-form Iwasawa residual %.3e above tolerance; refining", residual)

    def off_unitarity(p: np.ndarray) -> np.ndarray:
        cand = _k_part(g, p[0], HeisElement.from_coords(params, p[1:]))
        gram = qmatmul(adjoint_entries(cand.entries), cand.entries) - _identity_entries(params.size)
        return gram[..., : params.d].ravel()

    start = np.concatenate([[t], heis.to_coords()])
    sol = least_squares(off_unitarity, start, xtol=1e-15, ftol=1e-15, gtol=1e-15)
    t = float(sol.x[0])
    heis = HeisElement.from_coords(params, sol.x[1:])
    k = _k_part(g, t, heis)
    residual = max(k.euclidean_residual(), k.q_residual())
    if residual > tol:
        logger.error("Iwasawa refinement failed for %s", params.label)
        raise NumericalError("Iwasawa decomposition did not converge", residual)
    return IwasawaDecomposition(k, heis, t, residual)


def iwasawa_t(g: GroupElement) -> float:
    return iwasawa(g).t


def iwasawa_t_of_v(params: GroupParams, coords: np.ndarray) -> np.ndarray:
    """t(v) for v in V, vectorised: e^t(v) = |1 + x*x/2 - y/2|."""
    return np.log(cayley_denominator(params, coords))


def rho(params: GroupParams, t: float) -> float:
    """rho(a(t)) = exp(r t / 2)."""
    return float(np.exp(params.r * t / 2.0))


