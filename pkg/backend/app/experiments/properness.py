"""
properness.py

L^r properness of the Busemann cocycle, equivalence of the compact and
non-compact Sobolev norms, and the L^p identity between the two pictures of
the spherical principal series.

- lr_properness: ||d gamma_(0, a_t.0)||_(L^r) against t (sphere quadrature for
  SO, chart grid otherwise) plus annulus integrals of |d_o log|x*x - y||^r.
- norm_equivalence_check: sphere-spectral W0 norm vs chart grid norm on a
  family of chart bumps, with one refinement step.
- lp_isometry_check: (int_K |f|^p) / (int_V |f|^p) over random h.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln

from app.core.constants import FLOW_STEP
from app.core.errors import ConfigurationError
from app.core.models import CocycleReport
from app.core.refinement import RefinementManager
from app.core.trend import equal_increments, fit_trend, strictly_increasing
from app.experiments.common import (
    ChartNorm,
    bump,
    chart_cutoff,
    chart_grid,
    chart_pullback,
    check_growth,
    new_report,
    tan_product_rule,
)
from app.experiments.growth import CHART_GRIDS
from app.experiments.sobolev import annulus_integral
from app.geometry.cocycles import (
    axis_point,
    busemann,
    busemann_chart,
    d_chart_gradient,
    horizontal_gradient_norm,
)
from app.geometry.groups import (
    cayley_coords,
    cayley_jacobian_constant,
    cayley_jacobian_numeric,
    iwasawa_t,
    iwasawa_t_of_v,
    make_v,
    origin,
    points_from_real,
    sphere_real_coords,
)
from app.geometry.heisenberg import (
    GridField,
    HeisElement,
    flow_derivative,
    hom_norm_coords,
    require_first_stratum,
)
from app.geometry.params import GroupParams
from app.geometry.scalars import FieldTag
from app.geometry.spectral import (
    ambient_sphere_rule,
    circle_quadrature,
    require_so_sphere,
    sphere_transform,
    w0_norm_sphere,
    zonal_quadrature,
)
from app.integrations.operator_cache import OperatorCache

logger = logging.getLogger(__name__)

LR_AMPLIFICATION = 1.5


def _require_analysis_field(params: GroupParams, experiment: str) -> None:
    require_first_stratum(params)
    if params.field is FieldTag.QUATERNION:
        raise ConfigurationError(
            f"{experiment} needs grids on V of dimension {params.v_dim}; not available for {params.label}.",
            gate="sp-growth-gate",
        )


# ── L^r properness ───────────────────────────────────────────────────


def sphere_gradient_lr(params: GroupParams, t: float) -> float:
    """
    ||grad gamma_(0, a_t.0)||_(L^r(S^(n-1))), r = n - 1, normalised measure.

    gamma is log(1 - tanh t cos theta) up to a constant, so the gradient is
    zonal with modulus tanh t sin theta / (1 - tanh t cos theta).
    """
    require_so_sphere(params)
    if t == 0:
        return 0.0
    n, r = params.n, params.r
    tau = math.tanh(t)
    gap = 2.0 * math.exp(-2.0 * t) / (1.0 + math.exp(-2.0 * t))
    log_norm = gammaln(n / 2.0) - 0.5 * math.log(math.pi) - gammaln((n - 1) / 2.0)

    def integrand(theta: float) -> float:
        denom = gap + 2.0 * tau * math.sin(theta / 2.0) ** 2
        return (tau * math.sin(theta) / denom) ** r * math.sin(theta) ** (n - 2)

    peak = min(math.exp(-t), 1.0)
    breaks = sorted({min(peak * f, math.pi / 2) for f in (0.5, 1.0, 4.0, 16.0)})
    value, _ = quad(integrand, 0.0, math.pi, points=breaks, limit=500, epsabs=0.0, epsrel=1e-11)
    return float((math.exp(log_norm) * value) ** (1.0 / r))


def sphere_gradient_closed(params: GroupParams, t: float) -> float:
    """2t/pi on S^1 (r = 1); sqrt(2t coth t - 2) on S^2 (r = 2)."""
    if t == 0:
        return 0.0
    if params.n == 2:
        return 2.0 * t / math.pi
    return math.sqrt(2.0 * t / math.tanh(t) - 2.0)


def gradient_identity_residual(params: GroupParams, t: float, step: float = 1e-6) -> float:
    """Relative gap between the zonal gradient formula and central differences of busemann()."""
    theta = np.linspace(0.3, 2.5, 12)

    def points(angle: np.ndarray) -> np.ndarray:
        real = np.zeros(angle.shape + (params.n,))
        real[..., 0] = np.sin(angle)
        real[..., -1] = np.cos(angle)
        return points_from_real(params, real)

    x, y = origin(params), axis_point(params, t)
    numeric = (busemann(x, y, points(theta + step)) - busemann(x, y, points(theta - step))) / (2.0 * step)
    tau = math.tanh(t)
    exact = tau * np.sin(theta) / (1.0 - tau * np.cos(theta))
    return float(np.max(np.abs(numeric - exact) / np.abs(exact)))


def chart_gradient_lr(params: GroupParams, t: float, grid, cutoff: np.ndarray) -> float:
    """||d_o (chi * gamma o C)||_(L^r(V)) on the chart grid."""
    values = cutoff * busemann_chart(params, t, grid.coords())
    grad = horizontal_gradient_norm(d_chart_gradient(GridField(values, grid)))
    return float((np.sum(grad ** params.r) * grid.cell_volume) ** (1.0 / params.r))


def singular_gradient_weight(params: GroupParams):
    """(a, b) -> |d_o log|x*x - y||^r at x = a e_1, y = b e_i, by the group flow."""
    v_dim, o_dim = params.v_dim, params.o_dim

    def log_modulus(coords: np.ndarray) -> np.ndarray:
        return 2.0 * np.log(hom_norm_coords(params, coords))

    def weight(a: float, b: float) -> float:
        coords = np.zeros(v_dim)
        coords[0] = a
        if params.z_dim:
            coords[o_dim] = b
        step = FLOW_STEP * float(hom_norm_coords(params, coords))
        total = 0.0
        for j in range(o_dim):
            total += float(flow_derivative(params, log_modulus, coords, j, step)) ** 2
        return total ** (params.r / 2.0)

    return weight


def lr_properness(
    params: GroupParams,
    t_list: list[float] | None = None,
    backend: str | None = None,
    grid_L: float | None = None,
    grid_m: int | None = None,
    eps_list: list[float] | None = None,
) -> CocycleReport:
    """
    ||d gamma_(0, a_t.0)||_(L^r) against t, then the annulus scan of the
    t -> infinity limit log|x*x - y|.
    """
    _require_analysis_field(params, "lr-properness")
    spherical = params.field is FieldTag.REAL and params.n in (2, 3)
    backend = backend or ("spectral" if spherical else "chart")
    t_list = list(t_list or [float(t) for t in range(1, 9)])
    eps_list = sorted(eps_list or [1e-2, 1e-3, 1e-4], reverse=True)
    report = new_report("lr_properness", params, ["t", "backend", "lr_norm", "closed_form", "rel_error"])
    logger.info("lr_properness on %s (%s backend) for %d values of t", params.label, backend, len(t_list))

    if backend == "spectral":
        require_so_sphere(params)
        norms = [sphere_gradient_lr(params, t) for t in t_list]
        closed = [sphere_gradient_closed(params, t) for t in t_list]
        for t, value, exact in zip(t_list, norms, closed):
            rel = abs(value - exact) / exact if exact else abs(value)
            report.add_row(t, backend, value, exact, rel)
        worst = max(r[4] for r in report.rows)
        report.check("closed-form", worst <= 1e-6, worst, 1e-6, "quadrature vs closed form")
        checked_t = [t for t in t_list if 0 < t <= 3.0] or [1.0]
        residual = max(gradient_identity_residual(params, t) for t in checked_t)
        report.check("gradient-identity", residual <= 1e-5, residual, 1e-5, "zonal gradient vs busemann()")
    else:
        grid = chart_grid(params, grid_L, grid_m, CHART_GRIDS.get((params.field, params.n), (1.25, 57)))
        cutoff = chart_cutoff(params, grid.coords(), 0.4 * grid.half_width, 0.8 * grid.half_width)
        norms = [chart_gradient_lr(params, t, grid, cutoff) for t in t_list]
        for t, value in zip(t_list, norms):
            report.add_row(t, backend, value, float("nan"), float("nan"))
        unresolved = [t for t in t_list if math.exp(-t) < 3.0 * grid.h]
        if unresolved:
            report.notes.append(
                f"e^-t < 3h for t >= {min(unresolved):g}; growth past that point comes from the origin node."
            )

    check_growth(report, t_list, norms, min_amplification=LR_AMPLIFICATION)
    positive = [(t, v) for t, v in zip(t_list, norms) if t > 0]
    upper = positive[len(positive) // 2:]
    if len(upper) >= 2:
        fit = fit_trend([p[0] for p in upper], [p[1] for p in upper], "power")
        report.trends.append(fit)
        report.notes.append(f"upper-half exponent {fit.slope:.4f} (t^(1/r) gives {1.0 / params.r:.4f})")

    annulus = [annulus_integral(params, eps, singular_gradient_weight(params)) for eps in eps_list]
    for eps, value in zip(eps_list, annulus):
        report.notes.append(f"annulus eps={eps:g}: integral of |d_o log|x*x - y||^r = {value:.12g}")
    even, spread = equal_increments(annulus, 0.1)
    report.check(
        "annulus-log-growth",
        even and strictly_increasing(annulus),
        spread,
        0.1,
        "equal increments per decade of eps",
    )
    return report


# ── Norm equivalence ─────────────────────────────────────────────────


NORM_EQ_GRIDS = {
    (FieldTag.REAL, 2): (1.25, 2049),
    (FieldTag.REAL, 3): (1.25, 201),
}
CIRCLE_BAND = 4096
ZONAL_BAND = 600
LEAK_TOL = 1e-6


def bump_family(params: GroupParams, size: int = 20) -> list[tuple[np.ndarray, float]]:
    """
    (center, scale) pairs inside {N <= 0.4 L} of the default grid.

    On S^1 bumps are translated and scaled; on S^2 they are centred at 0 so
    their pullbacks are zonal.
    """
    if params.n == 2:
        centers = [-0.2, -0.1, 0.0, 0.1, 0.2]
        scales = [0.08, 0.12, 0.18, 0.25]
        family = [(np.array([c]), s) for c in centers for s in scales]
    else:
        family = [(np.zeros(params.v_dim), s) for s in np.linspace(0.08, 0.45, 20)]
    return family[:size]


def sphere_bump_norm(params: GroupParams, center: np.ndarray, scale: float) -> float:
    quad_rule = circle_quadrature(CIRCLE_BAND) if params.n == 2 else zonal_quadrature(ZONAL_BAND)
    samples = chart_pullback(params, lambda c: bump(params, c, center, scale), quad_rule.points())
    spec = sphere_transform(quad_rule, samples).without_zero_mode()
    return w0_norm_sphere(spec, params)


def norm_equivalence_check(
    params: GroupParams,
    samples: int = 20,
    grid_L: float | None = None,
    grid_m: int | None = None,
    cache: OperatorCache | None = None,
) -> CocycleReport:
    """||w||_W0 on the sphere against ||(1 + Delta)^(r/4) (w o C)||_(L^2(V)) for chart bumps."""
    require_so_sphere(params)
    family = bump_family(params, min(samples, 20))
    coarse = ChartNorm(params, grid_L, grid_m, NORM_EQ_GRIDS, cache)
    fine = ChartNorm(params, coarse.grid.half_width, 2 * coarse.grid.points_per_axis - 1, cache=cache)
    report = new_report(
        "norm_equivalence",
        params,
        ["center", "scale", "sphere_norm", "chart_norm", "ratio", "ratio_refined", "refinement_change"],
    )
    logger.info("norm_equivalence on %s with %d bumps", params.label, len(family))

    constant = circle_quadrature(16) if params.n == 2 else zonal_quadrature(16)
    flat = w0_norm_sphere(sphere_transform(constant, np.ones(constant.size)), params)
    report.check("constant-zero", flat <= 1e-12, flat, 1e-12, "W0 norm of a constant on the sphere")

    ratios, changes = [], []
    for center, scale in family:
        values = bump(params, coarse.coords, center, scale)
        leak = float(np.linalg.norm((1.0 - coarse.cutoff) * values) / np.linalg.norm(values))
        if leak > LEAK_TOL:
            logger.warning("Bump at %s (scale %.3g) leaks %.2e outside the chart core; rejected", center, scale, leak)
            report.notes.append(f"rejected bump center={center.tolist()} scale={scale:g}: leak {leak:.2e}")
            continue
        sphere_norm = sphere_bump_norm(params, center, scale)
        chart_norm = coarse.norm(values)
        refined = fine.norm(bump(params, fine.coords, center, scale))

        manager = RefinementManager(tolerance=0.05, max_refinements=1)
        manager.record(sphere_norm / chart_norm)
        manager.track_refinement()
        manager.record(sphere_norm / refined)
        ratios.append(sphere_norm / chart_norm)
        changes.append(manager.relative_change())
        report.add_row(
            float(center[0]),
            scale,
            sphere_norm,
            chart_norm,
            sphere_norm / chart_norm,
            sphere_norm / refined,
            manager.relative_change(),
        )

    if not ratios:
        report.check("family-size", False, 0.0, 1.0, "every bump was rejected")
        return report
    spread = max(ratios) / min(ratios)
    report.check("ratio-spread", spread <= 10.0, spread, 10.0, f"{len(ratios)} bumps")
    report.notes.append(f"equivalence constant C = {math.sqrt(spread):.6g} about {math.sqrt(max(ratios) * min(ratios)):.6g}")
    worst = max(changes)
    report.check("refinement-stability", worst < 0.05, worst, 0.05, "ratio change from m to 2m - 1")
    return report


# ── L^p identity between the compact and non-compact pictures ───────


SPHERE_NODES = {2: 200, 3: 40, 4: 24}
V_NODES = {1: 400, 2: 120, 3: 48}


def random_sphere_polynomial(rng: np.random.Generator, dim: int, degree: int = 2):
    """A real polynomial of the given degree in the ambient coordinates of S^(dim-1)."""
    linear = rng.standard_normal(dim)
    quadratic = rng.standard_normal((dim, dim)) if degree >= 2 else np.zeros((dim, dim))
    offset = 2.0 + abs(rng.standard_normal())

    def h(real: np.ndarray) -> np.ndarray:
        return offset + real @ linear + np.einsum("...i,ij,...j->...", real, quadratic, real)

    return h


def jacobian_iwasawa_residual(params: GroupParams, rng: np.random.Generator, count: int = 50) -> float:
    """Spread of log J(v) + r t(v) over random v, with J numeric and t from the full decomposition."""
    values = []
    for _ in range(count):
        heis = HeisElement.random(rng, params)
        t = iwasawa_t(make_v(params, heis))
        jac = cayley_jacobian_numeric(params, heis.to_coords())
        values.append(math.log(jac) + params.r * t)
    return float(max(values) - min(values))


def lp_isometry_check(
    params: GroupParams,
    samples: int = 10,
    lam: float = 0.0,
    rng: np.random.Generator | None = None,
) -> CocycleReport:
    """
    Ratio of int_K |f|^p to int_V |f|^p for f(v) = e^(-(lam + r) t(v)/2) h(v.o),
    1/p = lam/(2r) + 1/2, across h = 1 and ``samples`` random quadratics.
    """
    require_first_stratum(params)
    if params.v_dim not in V_NODES:
        raise ConfigurationError(
            f"The L^p check integrates over V of dimension {params.v_dim}; at most 3 is supported.",
            gate="lp-isometry-dimension",
        )
    r = params.r
    if not -r < lam < r:
        raise ConfigurationError(f"lambda must lie in (-{r}, {r}), got {lam}.", gate="lp-lambda-range")
    rng = rng if rng is not None else np.random.default_rng(0)
    p = 2.0 * r / (lam + r)
    dim = params.d * params.n
    report = new_report("lp_isometry", params, ["sample", "p", "int_K", "int_V", "ratio"])
    logger.info("lp_isometry on %s: lambda=%.3g p=%.4g, %d samples", params.label, lam, p, samples)

    sphere = ambient_sphere_rule(dim, SPHERE_NODES.get(dim, 24))
    coords, weights = tan_product_rule(params, V_NODES[params.v_dim])
    images = sphere_real_coords(params, cayley_coords(params, coords))
    t_v = iwasawa_t_of_v(params, coords)
    decay = np.exp(-0.5 * (lam + r) * t_v)

    members = [lambda real: np.ones(real.shape[:-1])]
    members += [random_sphere_polynomial(rng, dim) for _ in range(samples)]
    ratios = []
    for i, h in enumerate(members):
        int_k = float(sphere.integrate(np.abs(h(sphere.points)) ** p))
        int_v = float(np.sum(weights * np.abs(decay * h(images)) ** p))
        ratios.append(int_k / int_v)
        report.add_row(i, p, int_k, int_v, int_k / int_v)

    spread = max(ratios) / min(ratios) - 1.0
    report.check("ratio-constant", spread <= 0.01, spread, 0.01, f"{len(ratios)} functions, h = 1 first")
    fitted = float(np.mean(ratios))
    closed = cayley_jacobian_constant(params)
    gap = abs(fitted / closed - 1.0)
    report.check("c-g-closed-form", gap <= 0.01, gap, 0.01, f"fitted C_G {fitted:.10g} vs {closed:.10g}")
    residual = jacobian_iwasawa_residual(params, rng)
    report.check("jacobian-iwasawa", residual <= 1e-4, residual, 1e-4, "log J(v) + r t(v) over 50 v")
    return report
