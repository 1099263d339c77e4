"""
verification.py

The verify-group and verify-cocycle suites. Every check evaluates one identity
on random instances and records its worst residual against a tolerance; the
report has one row per check.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy.integrate import quad

from app.core.models import CocycleReport
from app.experiments.common import new_report
from app.geometry.cocycles import (
    axis_point,
    busemann,
    busemann_limit_check,
    c_cocycle_at,
    d_chart_gradient,
    pi_action,
    pi_action_density,
    visual_density_at,
    visual_density_closed,
)
from app.geometry.groups import (
    GroupElement,
    act_boundary,
    act_disk,
    basepoint_o,
    cayley_coords,
    cayley_inv_coords,
    cayley_jacobian_constant,
    cayley_jacobian_coords,
    cayley_jacobian_numeric,
    conjugation_dilation,
    dist,
    iwasawa,
    iwasawa_t,
    make_a,
    make_a_diagonal,
    make_n,
    make_U,
    make_v,
    make_w0,
    origin,
    points_from_real,
    q_form,
    random_boundary_point,
    random_disk_point,
    random_group_element,
    random_k,
    random_m,
    random_p,
    rho,
    v_coordinates,
)
from app.geometry.heisenberg import (
    Grid,
    GridField,
    HeisElement,
    ball_volume_mc,
    ball_volume_quad,
    dilate,
    dilate_coords,
    flow_derivative,
    hom_norm,
    hom_norm_coords,
    sublaplacian_matrix,
    unit_sphere_area,
)
from app.geometry.params import GroupParams
from app.geometry.scalars import FieldTag, qabs, qabs2, qconj, qim, qmul, qre, qreal, random_components
from app.geometry.spectral import ambient_sphere_rule

logger = logging.getLogger(__name__)

COLUMNS = ["check", "instances", "residual", "tolerance"]


def _record(report: CocycleReport, name: str, residual: float, tol: float, instances: int, detail: str = "") -> None:
    residual = float(residual)
    report.add_row(name, instances, residual, tol)
    report.check(name, residual <= tol, residual, tol, detail)
    if residual > tol:
        logger.warning("%s: %s residual %.3e exceeds %.1e", report.label, name, residual, tol)


# ── Scalars and the form q ───────────────────────────────────────────


def _check_scalars(report: CocycleReport, params: GroupParams, rng: np.random.Generator, count: int = 1000) -> None:
    tag = params.field
    z = random_components(rng, tag, count)
    w = random_components(rng, tag, count)
    scale = qabs(z) * qabs(w)
    _record(report, "modulus-multiplicative", np.max(np.abs(qabs(qmul(z, w)) - scale) / scale), 1e-13, count)
    anti = np.max(qabs(qconj(qmul(z, w)) - qmul(qconj(w), qconj(z))) / scale)
    _record(report, "conjugation-antihomomorphism", anti, 1e-13, count)
    split = max(
        float(np.max(np.abs(qre(z) - 0.5 * (z + qconj(z))[..., 0]))),
        float(np.max(np.abs(qim(z) - 0.5 * (z - qconj(z))))),
    )
    _record(report, "re-im-split", split, 1e-15, count, "Re z = (z + conj z)/2, Im z = (z - conj z)/2")

    size = params.size
    zv = random_components(rng, tag, (count, size))
    wv = random_components(rng, tag, (count, size))
    lam = random_components(rng, tag, count)
    mu = random_components(rng, tag, count)
    lhs = q_form(qmul(zv, lam[:, None, :]), qmul(wv, mu[:, None, :]))
    rhs = qmul(qmul(qconj(lam), q_form(zv, wv)), mu)
    norm = qabs(lam) * qabs(mu) * np.sqrt(qabs2(zv).sum(-1) * qabs2(wv).sum(-1))
    _record(report, "q-sesquilinear", np.max(qabs(lhs - rhs) / norm), 1e-13, count)


# ── Group structure ──────────────────────────────────────────────────


def _small_generator(rng: np.random.Generator, params: GroupParams) -> GroupElement:
    choice = rng.integers(4)
    if choice == 0:
        return make_a(params, rng.uniform(-0.25, 0.25))
    if choice == 1:
        return random_k(rng, params)
    if choice == 2 and params.n >= 2:
        return make_v(params, HeisElement.random(rng, params, 0.25))
    return random_m(rng, params)


def _check_generators(report: CocycleReport, params: GroupParams, rng: np.random.Generator) -> None:
    ident = GroupElement.identity(params)
    gens = [make_a(params, 5.0), make_w0(params), random_k(rng, params), random_m(rng, params)]
    if params.n >= 2:
        h = HeisElement.random(rng, params)
        gens += [make_v(params, h), make_n(params, h)]
    _record(report, "generators-in-G", max(g.q_residual() for g in gens), 1e-10, len(gens))
    k_res = max(max(g.q_residual(), g.euclidean_residual()) for g in (random_k(rng, params) for _ in range(20)))
    _record(report, "k-in-K", k_res, 1e-10, 20, "q and Euclidean form preserved")

    worst, inverse = 0.0, 0.0
    for _ in range(20):
        g = ident
        for _ in range(20):
            g = g @ _small_generator(rng, params)
        worst = max(worst, g.q_residual())
        inverse = max(inverse, (g @ g.inverse()).distance_to(ident))
    _record(report, "products-in-G", worst, 1e-9, 20, "chains of 20 generators")
    _record(report, "product-inverse", inverse, 1e-9, 20)

    a_res = 0.0
    for t in (0.5, 3.0, 10.0):
        scale = math.cosh(t) ** 2
        a_res = max(a_res, (make_a(params, t) @ make_a(params, -t)).distance_to(ident) / scale)
        a_res = max(a_res, (make_a(params, t) @ make_a(params, 0.7)).distance_to(make_a(params, t + 0.7)) / scale)
    _record(report, "a-one-parameter", a_res, 1e-12, 6, "relative to cosh(t)^2")
    invol = max(
        (make_w0(params) @ make_w0(params)).distance_to(ident),
        (make_U(params) @ make_U(params)).distance_to(ident),
        make_U(params).adjoint().distance_to(make_U(params)),
        make_a(params, 0.0).distance_to(ident),
    )
    _record(report, "involutions", invol, 1e-12, 4, "w0^2 = U^2 = 1, U = U*, a(0) = 1")
    u = make_U(params)
    diag_res = max(
        (u @ make_a_diagonal(params, t) @ u).distance_to(make_a(params, t)) / math.cosh(t) ** 2
        for t in (-1.0, 0.5, 3.0)
    )
    _record(report, "a-diagonalised-by-U", diag_res, 1e-12, 3, "U diag(e^-t, 1, e^t) U = a(t); U itself is not in G")


def _check_v(report: CocycleReport, params: GroupParams, rng: np.random.Generator, count: int) -> None:
    law, coords, bridge, auto = 0.0, 0.0, 0.0, 0.0
    for _ in range(count):
        a, b = HeisElement.random(rng, params), HeisElement.random(rng, params)
        law = max(law, (make_v(params, a) @ make_v(params, b)).distance_to(make_v(params, a @ b)))
        coords = max(coords, float(np.max(np.abs(v_coordinates(make_v(params, a)).to_coords() - a.to_coords()))))
        t = rng.uniform(-2.0, 2.0)
        conj = make_a(params, t) @ make_v(params, a) @ make_a(params, -t)
        moved = dilate(conjugation_dilation(t), a).to_coords()
        bridge = max(bridge, float(np.max(np.abs(v_coordinates(conj).to_coords() - moved))))
        s = rng.uniform(0.2, 3.0)
        auto = max(auto, float(np.max(np.abs(dilate(s, a @ b).to_coords() - (dilate(s, a) @ dilate(s, b)).to_coords()))))
        auto = max(auto, abs(hom_norm(dilate(s, a)) - s * hom_norm(a)))
    _record(report, "v-group-law", law, 1e-12, count, "v(x', y') v(x, y) against the law of V")
    _record(report, "v-coordinates", coords, 1e-12, count)
    _record(report, "conjugation-bridge", bridge, 1e-12, count, "a(t) v a(-t) = v(delta_(e^-t))")
    _record(report, "dilation-automorphism", auto, 1e-12, count)


def _check_actions(report: CocycleReport, params: GroupParams, rng: np.random.Generator, count: int) -> None:
    o = basepoint_o(params)
    iso = max(float(np.max(qabs(act_boundary(random_p(rng, params), o) - o))) for _ in range(100))
    _record(report, "isotropy-of-P", iso, 1e-10, 100)

    axis = max(float(np.max(qabs(act_disk(make_a(params, t), origin(params)) - axis_point(params, t)))) for t in (0.5, 1.0, 3.0))
    _record(report, "a-moves-origin", axis, 1e-14, 3, "a(t).0 = (0, ..., tanh t)")

    x = random_disk_point(rng, params, count, radius_cap=2.0)
    g, h = random_group_element(rng, params, 2.0), random_group_element(rng, params, 2.0)
    action = float(np.max(qabs(act_disk(g, act_disk(h, x)) - act_disk(g @ h, x))))
    _record(report, "action-property", action, 1e-9, count, "g.(h.z) = (gh).z")

    y = random_disk_point(rng, params, count, radius_cap=2.0)
    inv = float(np.max(np.abs(dist(act_disk(g, x), act_disk(g, y)) - dist(x, y))))
    _record(report, "dist-invariance", inv, 1e-10, count)
    axis_dist = max(abs(dist(origin(params), axis_point(params, t)) - t) for t in (1.0, 2.0, 5.0))
    _record(report, "dist-normalisation", axis_dist, 1e-10, 3, "dist(0, a(t).0) = t")


def _check_cayley(report: CocycleReport, params: GroupParams, rng: np.random.Generator, count: int) -> None:
    coords = rng.standard_normal((count, params.v_dim))
    z = cayley_coords(params, coords)
    on_sphere = float(np.max(np.abs(qabs2(z).sum(-1) - 1.0)))
    _record(report, "cayley-on-sphere", on_sphere, 1e-12, count)
    trip = float(np.max(np.abs(cayley_inv_coords(params, z) - coords)))
    _record(report, "cayley-round-trip", trip, 1e-10, count)
    by_action = max(
        float(np.max(qabs(act_boundary(make_v(params, HeisElement.from_coords(params, c)), basepoint_o(params)) - zc)))
        for c, zc in zip(coords[:20], z[:20])
    )
    _record(report, "cayley-is-v-dot-o", by_action, 1e-12, 20)

    gap_min = 1e-3
    points = random_boundary_point(rng, params, 1000)
    gap = np.sqrt(qabs2(points + basepoint_o(params)).sum(-1))
    live = points[gap > gap_min]
    back = cayley_coords(params, cayley_inv_coords(params, live))
    _record(report, "bruhat-coverage", float(np.max(qabs(back - live))), 1e-8, int(live.shape[0]), "|z + o| > 1e-3")

    j0 = float(cayley_jacobian_coords(params, np.zeros(params.v_dim)))
    jn = cayley_jacobian_numeric(params, np.zeros(params.v_dim))
    _record(report, "jacobian-at-origin", abs(j0 - jn) / j0, 1e-6, 1, "closed form vs finite differences")
    _record(report, "jacobian-mass", abs(jacobian_mass(params) - 1.0), 5e-3, 1, "integral of J over V")


def jacobian_mass(params: GroupParams) -> float:
    """Integral over V of c |1 + x*x/2 - y/2|^-r in polar coordinates for |x| and |y|."""
    p, q, r = params.o_dim, params.z_dim, params.r
    c = cayley_jacobian_constant(params)
    if q == 0:
        value, _ = quad(lambda a: a ** (p - 1) * (1.0 + a * a / 2.0) ** (-r), 0.0, np.inf, limit=200)
        return c * unit_sphere_area(p) * value

    def inner(a: float) -> float:
        value, _ = quad(lambda b: b ** (q - 1) * ((1.0 + a * a / 2.0) ** 2 + b * b / 4.0) ** (-r / 2.0), 0.0, np.inf, limit=200)
        return a ** (p - 1) * value

    value, _ = quad(inner, 0.0, np.inf, limit=200)
    return c * unit_sphere_area(p) * unit_sphere_area(q) * value


def _check_iwasawa(report: CocycleReport, params: GroupParams, rng: np.random.Generator, count: int) -> None:
    trivial = max(
        max(abs(iwasawa_t(make_a(params, s)) - s) for s in (-1.5, 0.0, 2.0)),
        max(abs(iwasawa_t(random_k(rng, params))) for _ in range(10)),
    )
    _record(report, "iwasawa-trivial", trivial, 1e-8, 13, "a(s) -> s, k -> 0")
    worst, residual = 0.0, 0.0
    for _ in range(count):
        t = rng.uniform(-2.0, 2.0)
        g = random_k(rng, params) @ make_n(params, HeisElement.random(rng, params)) @ make_a(params, t)
        dec = iwasawa(g)
        worst = max(worst, abs(dec.t - t))
        residual = max(residual, dec.residual)
    _record(report, "iwasawa-round-trip", worst, 1e-8, count, f"worst unitarity residual {residual:.2e}")


def _check_rho(report: CocycleReport, params: GroupParams, rng: np.random.Generator) -> None:
    t, step = 1.0, 1e-6
    w0 = make_w0(params)
    base = rng.standard_normal(params.v_dim)

    def conj_n(c: np.ndarray) -> np.ndarray:
        g = w0 @ make_a(params, t) @ make_n(params, HeisElement.from_coords(params, c)) @ make_a(params, -t) @ w0
        return v_coordinates(g).to_coords()

    cols = []
    for i in range(params.v_dim):
        e = np.zeros(params.v_dim)
        e[i] = step
        cols.append((conj_n(base + e) - conj_n(base - e)) / (2.0 * step))
    jac = abs(float(np.linalg.det(np.stack(cols, axis=1))))
    _record(report, "rho-squared-jacobian", abs(jac / rho(params, t) ** 2 - 1.0), 1e-6, 1, "n -> a(t) n a(-t) on N")

    if params.v_dim > 3:
        report.notes.append(f"conjugation-scaling quadrature skipped: dim V = {params.v_dim} > 3")
        return
    worst = 0.0
    exact = math.pi ** (params.v_dim / 2.0)
    for t in (1.0, -1.0):
        s = math.exp(t)
        widths = [8.0 / (math.sqrt(2.0) * s)] * params.o_dim + [8.0 / (math.sqrt(2.0) * s * s)] * params.z_dim
        nodes = 61 if params.v_dim == 3 else 201
        axes = [np.linspace(-w, w, nodes) for w in widths]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, params.v_dim)
        cell = float(np.prod([ax[1] - ax[0] for ax in axes]))
        moved = dilate_coords(params, s, mesh)
        value = float(np.sum(np.exp(-np.sum(moved * moved, axis=-1))) * cell) * rho(params, t) ** 2
        worst = max(worst, abs(value / exact - 1.0))
    _record(report, "conjugation-scaling", worst, 5e-3, 2, "integral of f(a^-1 v a) rho(a)^2, t = +-1")


def _check_heisenberg(report: CocycleReport, params: GroupParams, rng: np.random.Generator) -> None:
    volume = ball_volume_quad(params)
    worst = 0.0
    for radius in (0.5, 2.0):
        mc, stderr = ball_volume_mc(params, rng, radius, 400_000)
        scaled = radius ** params.r * volume
        worst = max(worst, max(abs(mc - scaled) / scaled - 5.0 * stderr / scaled, 0.0))
    _record(report, "ball-homogeneity", worst, 0.01, 2, "MC vol{N <= s} against s^r vol{N <= 1}, beyond 5 sigma")

    m = 9 if params.v_dim <= 3 else (7 if params.v_dim <= 5 else 5)
    grid = Grid(params, 1.0, m)
    lap = sublaplacian_matrix(grid)
    applied = (lap @ np.ones(grid.size)).reshape(grid.shape)
    core = tuple(slice(2, m - 2) for _ in range(grid.dim))
    _record(report, "sublaplacian-constants", float(np.max(np.abs(applied[core]))), 1e-10, int(np.prod(applied[core].shape)))
    sym = float(abs(lap - lap.T).max()) if lap.nnz else 0.0
    _record(report, "sublaplacian-symmetric", sym, 1e-12, grid.size)


def verify_group(params: GroupParams, rng: np.random.Generator | None = None, samples: int = 200) -> CocycleReport:
    """Algebraic identities of the field, the group, V and the Cayley chart."""
    rng = rng if rng is not None else np.random.default_rng(0)
    report = new_report("verify_group", params, COLUMNS)
    logger.info("verify_group on %s with %d samples", params.label, samples)
    _check_scalars(report, params, rng)
    _check_generators(report, params, rng)
    _check_actions(report, params, rng, samples)
    _check_iwasawa(report, params, rng, min(samples, 50))
    _record(report, "rho-values", max(abs(rho(params, 0.0) - 1.0), abs(rho(params, 1.0) - math.exp(params.r / 2.0))), 1e-14, 2)
    if params.n < 2:
        report.notes.append("V has no first stratum for n = 1; chart and sub-Laplacian checks skipped.")
        return report
    _check_v(report, params, rng, samples)
    _check_cayley(report, params, rng, samples)
    _check_rho(report, params, rng)
    _check_heisenberg(report, params, rng)
    return report


# ── Cocycle suite ────────────────────────────────────────────────────


# Nodes per axis of the product rule; exact to degree 2 * nodes - 1.
SPHERE_NODES = {2: 64, 3: 32, 4: 16, 5: 10, 6: 8, 7: 6, 8: 6}
SMALL_RULE_NODES = 3
RULE_SIZE_CAP = 500_000


def _rule_nodes(dim: int) -> int:
    if dim in SPHERE_NODES:
        return SPHERE_NODES[dim]
    return max(SMALL_RULE_NODES, int((RULE_SIZE_CAP / 2) ** (1.0 / (dim - 1))))


def _relative(values: np.ndarray, reference: np.ndarray) -> float:
    return float(np.max(np.abs(values)) / max(float(np.max(np.abs(reference))), 1.0))


def _check_busemann(report: CocycleReport, params: GroupParams, rng: np.random.Generator, count: int) -> None:
    x, y, w = (random_disk_point(rng, params, count) for _ in range(3))
    z = random_boundary_point(rng, params, count)
    ident = np.abs(busemann(x, y, z) + busemann(y, w, z) - busemann(x, w, z))
    _record(report, "busemann-cocycle", float(np.max(ident)), 1e-11, count)
    _record(report, "busemann-diagonal", float(np.max(np.abs(busemann(x, x, z)))), 0.0, count)

    g = random_group_element(rng, params, 3.0)
    xe, ye = random_disk_point(rng, params, count, 3.0), random_disk_point(rng, params, count, 3.0)
    equi = np.abs(busemann(act_disk(g, xe), act_disk(g, ye), act_boundary(g, z)) - busemann(xe, ye, z))
    _record(report, "busemann-equivariance", float(np.max(equi)), 1e-9, count)

    zero, o = origin(params), basepoint_o(params)
    axis = 0.0
    for t in (1.0, 2.0, 5.0):
        value = busemann(zero, axis_point(params, t), o)
        axis = max(axis, abs(value + t), abs(value + dist(zero, axis_point(params, t))))
    _record(report, "busemann-axis", axis, 1e-10, 3, "gamma_(0, a_t.0)(o) = -t = -dist")

    offset = 0.0
    for t in (0.5, 2.0):
        diff = busemann(zero, axis_point(params, t), z) - np.log(qabs(qreal(1.0) - math.tanh(t) * z[..., -1, :]))
        offset = max(offset, float(np.max(diff) - np.min(diff)))
    _record(report, "busemann-chart-offset", offset, 1e-10, count, "gamma - log|1 - z_n tanh t| is constant")

    xs, ys = random_disk_point(rng, params, 20, radius_cap=1.0), random_disk_point(rng, params, 20, radius_cap=1.0)
    zs = random_boundary_point(rng, params, 20)
    near = zs * (1.0 - 1e-6)
    gap = np.abs(dist(near, ys) - dist(near, xs) - busemann(xs, ys, zs))
    _record(report, "busemann-distance-limit", float(np.max(gap)), 1e-4, 20, "Euclidean radius 1 - 1e-6")


def _check_busemann_limit(report: CocycleReport, params: GroupParams, rng: np.random.Generator) -> None:
    coords = rng.uniform(-1.5, 1.5, size=(4000, params.v_dim))
    coords = coords[hom_norm_coords(params, coords) >= 0.3]
    checks = [busemann_limit_check(params, t, coords) for t in (2.0, 4.0, 6.0, 8.0, 10.0)]
    _record(report, "busemann-chart-identity", max(c.identity_residual for c in checks), 1e-12, len(coords))
    _record(report, "busemann-limit-t10", checks[-1].max_deviation, 1e-3, len(coords), "N >= 0.3")
    deviations = [c.max_deviation for c in checks]
    steps = np.diff(deviations)
    _record(report, "busemann-limit-decreasing", max(float(np.max(steps)), 0.0), 0.0, len(checks), "t = 2, 4, ..., 10")


def _check_visual(report: CocycleReport, params: GroupParams, rng: np.random.Generator, count: int) -> None:
    dim = params.d * params.n
    flat = visual_density_at(params, origin(params), random_boundary_point(rng, params, count))
    _record(report, "density-at-origin", float(np.max(np.abs(flat - 1.0))), 1e-8, count)

    rule = ambient_sphere_rule(dim, _rule_nodes(dim))
    quad_points = points_from_real(params, rule.points)
    mass = 0.0
    for t in (0.1, 0.25):
        x = act_disk(random_k(rng, params), axis_point(params, t))
        mass = max(mass, abs(float(rule.integrate(visual_density_closed(params, x, quad_points))) - 1.0))
    _record(report, "density-mass", mass, 2e-3, 2, f"{rule.size}-point sphere rule")

    closed, cocycle, equi, bcoc, defined = 0.0, 0.0, 0.0, 0.0, 0.0
    zero = origin(params)
    for _ in range(count):
        x, y, w = random_disk_point(rng, params, 3, radius_cap=1.5)
        z = random_boundary_point(rng, params, 4)
        numeric = visual_density_at(params, x, z)
        closed = max(closed, _relative(numeric - visual_density_closed(params, x, z), numeric))

        cxy, cyw, cxw = (c_cocycle_at(params, a, b, z) for a, b in ((x, y), (y, w), (x, w)))
        cocycle = max(cocycle, _relative(cxy + cyw - cxw, cxw))

        g = random_group_element(rng, params, 1.0)
        moved = pi_action_density(g, lambda pts: c_cocycle_at(params, x, y, pts), z)
        direct = c_cocycle_at(params, act_disk(g, x), act_disk(g, y), z)
        equi = max(equi, _relative(moved - direct, direct))

        h = random_group_element(rng, params, 1.0)

        def b_of(elem: GroupElement):
            return lambda pts: c_cocycle_at(params, act_disk(elem, zero), zero, pts)

        composite = pi_action_density(g, b_of(h), z) + b_of(g)(z)
        bcoc = max(bcoc, _relative(composite - b_of(g @ h)(z), composite))

        d1 = visual_density_at(params, x, z, np.random.default_rng(1))
        d2 = visual_density_at(params, x, z, np.random.default_rng(2))
        defined = max(defined, _relative(d1 - d2, d1))

    _record(report, "density-closed-form", closed, 1e-7, count, "finite-difference Jacobian against the closed form")
    _record(report, "visual-cocycle", cocycle, 1e-7, count, "c(x, y) + c(y, w) = c(x, w)")
    _record(report, "visual-equivariance", equi, 1e-6, count, "pi(g) c(x, y) = c(gx, gy)")
    _record(report, "b-cocycle", bcoc, 1e-6, count, "b_gh = pi(g) b_h + b_g")
    _record(report, "density-well-defined", defined, 1e-7, count, "two choices of g with g.0 = x")


def _check_pi(report: CocycleReport, params: GroupParams, rng: np.random.Generator) -> None:
    dim = params.d * params.n
    coef = rng.standard_normal(dim)
    quad_form = rng.standard_normal((dim, dim))

    def phi(points: np.ndarray) -> np.ndarray:
        real = np.asarray(points)[..., : params.d].reshape(np.shape(points)[:-2] + (dim,))
        return real @ coef + np.einsum("...i,ij,...j->...", real, quad_form, real)

    z = random_boundary_point(rng, params, 200)
    ident = float(np.max(np.abs(pi_action(GroupElement.identity(params), phi, z) - phi(z))))
    _record(report, "pi-identity", ident, 1e-14, 200)
    g, h = random_group_element(rng, params, 2.0), random_group_element(rng, params, 2.0)
    two_path = pi_action(g, lambda p: pi_action(h, phi, p), z)
    comp = _relative(two_path - pi_action(g @ h, phi, z), two_path)
    _record(report, "pi-composition", comp, 1e-8, 200)

    rule = ambient_sphere_rule(dim, SMALL_RULE_NODES)
    pts = points_from_real(params, rule.points)
    k = random_k(rng, params)
    before = float(rule.integrate(phi(pts) ** 2))
    after = float(rule.integrate(pi_action(k, phi, pts) ** 2))
    _record(report, "pi-k-unitary", abs(after - before) / before, 1e-8, rule.size)


def _check_chart_gradient(report: CocycleReport, params: GroupParams, rng: np.random.Generator) -> None:
    if params.v_dim <= 3:
        grid = Grid(params, 1.0, 9)
        const = d_chart_gradient(GridField(np.full(grid.shape, 2.5), grid))
        core = tuple(slice(1, 8) for _ in range(grid.dim))
        _record(report, "gradient-of-constant", max(float(np.max(np.abs(c.values[core]))) for c in const), 1e-12, grid.size)
        if params.field is FieldTag.REAL:
            slope = rng.standard_normal(grid.dim)
            linear = GridField(grid.coords() @ slope, grid)
            grads = d_chart_gradient(linear)
            euclid = max(float(np.max(np.abs(g.values[core] - slope[j]))) for j, g in enumerate(grads))
            _record(report, "gradient-euclidean", euclid, 1e-10, grid.size, "abelian case")

    def log_modulus(c: np.ndarray) -> np.ndarray:
        return 2.0 * np.log(hom_norm_coords(params, c))

    def grad_norm(c: np.ndarray) -> float:
        step = 1e-5 * float(hom_norm_coords(params, c))
        return math.sqrt(sum(float(flow_derivative(params, log_modulus, c, j, step)) ** 2 for j in range(params.o_dim)))

    worst = 0.0
    for _ in range(20):
        c = rng.standard_normal(params.v_dim)
        s = rng.uniform(0.3, 3.0)
        worst = max(worst, abs(grad_norm(dilate_coords(params, s, c)) * s / grad_norm(c) - 1.0))
    _record(report, "gradient-homogeneity", worst, 0.01, 20, "degree -1 under dilations")


def verify_cocycle(params: GroupParams, rng: np.random.Generator | None = None, samples: int = 200) -> CocycleReport:
    """Cocycle identities and equivariance for gamma and c, on random instances."""
    rng = rng if rng is not None else np.random.default_rng(0)
    report = new_report("verify_cocycle", params, COLUMNS)
    logger.info("verify_cocycle on %s with %d samples", params.label, samples)
    _check_busemann(report, params, rng, samples)
    _check_visual(report, params, rng, samples)
    _check_pi(report, params, rng)
    if params.n >= 2:
        _check_busemann_limit(report, params, rng)
        _check_chart_gradient(report, params, rng)
    else:
        report.notes.append("Chart checks skipped: V has no first stratum for n = 1.")
    return report
