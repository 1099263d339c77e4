"""
growth.py

Properness growth curves for the two cocycles and the uniform-boundedness
sampler they are contrasted with.

- growth_visual: ||c(0, a_t.0)||_(W0*) on S^1 / S^2 (dual spectral norm).
- growth_busemann: ||gamma_(0, a_t.0)||_W0, spectrally on the sphere (SO) or
  as the Cayley-chart Sobolev norm of chi * (gamma o C) (SO, SU(2,1)).
- uniform_boundedness_sample: sup ||pi(g) phi||_W0 / ||phi||_W0 over a(t) and
  random k a(t) k' for band-limited phi (SO); on S^2 past small t, zonal phi
  under a(t).
"""

from __future__ import annotations

import logging
import math

import numpy as np

from app.core.executor import OrderedExecutor
from app.core.models import CocycleReport
from app.core.trend import fit_trend, plateau_variation
from app.experiments.common import (
    ChartNorm,
    band_for,
    check_growth,
    composed_band,
    new_report,
)
from app.geometry.cocycles import axis_point, busemann, busemann_chart, visual_density_at, visual_density_closed
from app.geometry.groups import act_boundary, make_a, origin, random_k
from app.geometry.params import GroupParams
from app.geometry.scalars import FieldTag
from app.geometry.spectral import (
    SphereSpectrum,
    circle_quadrature,
    dual_norm_W,
    evaluate_spectrum,
    quadrature_for,
    require_so_sphere,
    sphere_transform,
    w0_norm_sphere,
    zonal_quadrature,
)
from app.integrations.operator_cache import OperatorCache

logger = logging.getLogger(__name__)

DEFAULT_T = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0, 6.5, 7.0, 7.5, 8.0]
BAND_CAP = 40000
# The finite-difference Jacobian loses accuracy as the density sharpens.
NUMERIC_DENSITY_T = 1.5
NUMERIC_DENSITY_NODES = 64

# (half-width L, points per axis m) of the chart grid per (field, n)
CHART_GRIDS = {
    (FieldTag.REAL, 2): (1.25, 4097),
    (FieldTag.REAL, 3): (1.25, 257),
    (FieldTag.COMPLEX, 2): (1.25, 57),
}


def series_oracle(t: float) -> float:
    """-2 log(1 - rho^2), rho = tanh(t/2): the squared norm of both cocycles on S^1."""
    rho = np.tanh(t / 2.0)
    return float(-2.0 * np.log1p(-rho * rho))


def _zonal_or_circle(params: GroupParams, band: int):
    return circle_quadrature(band) if params.n == 2 else zonal_quadrature(band)


def _relative(value: float, reference: float) -> float:
    if reference == 0.0:
        return abs(value)
    return abs(value - reference) / abs(reference)


# ── Visual cocycle ───────────────────────────────────────────────────


def _numeric_density_error(params: GroupParams, x, points: np.ndarray, closed: np.ndarray) -> float:
    """Closed-form density against the translate-and-Jacobian construction on a node subset."""
    idx = np.unique(np.linspace(0, len(points) - 1, NUMERIC_DENSITY_NODES).astype(int))
    numeric = visual_density_at(params, x, points[idx])
    return float(np.max(np.abs(numeric - closed[idx]) / np.abs(closed[idx])))


def _visual_point(params: GroupParams, t: float, band: int | None) -> dict:
    band = band or band_for(t, cap=BAND_CAP)
    quad = _zonal_or_circle(params, band)
    x = axis_point(params, t)
    points = quad.points()
    density = visual_density_closed(params, x, points)
    numeric_error = float("nan")
    if t <= NUMERIC_DENSITY_T:
        numeric_error = _numeric_density_error(params, x, points, density)
    spec = sphere_transform(quad, density - 1.0)
    mass_defect = abs(spec.zero_mode)
    norm = dual_norm_W(spec.without_zero_mode(), params)
    coeff_error = float("nan")
    if params.n == 2:
        rho = np.tanh(t / 2.0)
        modes = np.arange(1, min(20, band) + 1)
        got = spec.coefficients[band + modes]
        coeff_error = float(np.max(np.abs(got - rho ** modes))) if t > 0 else float(np.max(np.abs(got)))
    return {
        "band": band,
        "mass_defect": float(mass_defect),
        "norm": norm,
        "coeff_error": coeff_error,
        "numeric_error": numeric_error,
    }


def growth_visual(
    params: GroupParams,
    t_list: list[float] | None = None,
    band: int | None = None,
    executor: OrderedExecutor | None = None,
) -> CocycleReport:
    """
    ||c(0, a_t.0)||_(W0*) for SO_0(2,1) and SO_0(3,1).

    The density of mu_(a_t.0) is sampled in closed form; the zero mode of
    mu_x - mu_0 is dropped after recording it as ``mass_defect``.
    """
    require_so_sphere(params)
    t_list = list(t_list or DEFAULT_T)
    executor = executor or OrderedExecutor()
    report = new_report(
        "growth_visual",
        params,
        ["t", "band", "mass_defect", "norm", "norm_sq", "oracle_sq", "rel_error", "coeff_error", "numeric_rel_error"],
    )
    logger.info("growth_visual on %s for %d values of t", params.label, len(t_list))
    points = executor.map(lambda t: _visual_point(params, t, band), t_list)

    norms = []
    for t, p in zip(t_list, points):
        oracle = series_oracle(t) if params.n == 2 else float("nan")
        rel = _relative(p["norm"] ** 2, oracle) if params.n == 2 else float("nan")
        report.add_row(
            t,
            p["band"],
            p["mass_defect"],
            p["norm"],
            p["norm"] ** 2,
            oracle,
            rel,
            p["coeff_error"],
            p["numeric_error"],
        )
        norms.append(p["norm"])

    check_growth(report, t_list, norms, min_amplification=3.0)
    numeric = [r[8] for r in report.rows if r[0] <= NUMERIC_DENSITY_T]
    if numeric:
        worst = max(numeric)
        detail = f"closed form vs translate-and-Jacobian, t <= {NUMERIC_DENSITY_T:g}"
        report.check("numeric-density", worst <= 1e-6, worst, 1e-6, detail)
    report.notes.append(
        f"densities use the closed form; the finite-difference Jacobian construction is compared on "
        f"{NUMERIC_DENSITY_NODES} nodes for t <= {NUMERIC_DENSITY_T:g}"
    )
    if params.n == 2:
        rels = [r[6] for r in report.rows if 0 < r[0] <= 6.0]
        if rels:
            worst = max(rels)
            report.check("series-oracle", worst <= 0.01, worst, 0.01, "squared norm vs -2 log(1 - rho^2), t <= 6")
        coeffs = [r[7] for r in report.rows if 0 < r[0] <= 3.0]
        if coeffs:
            worst = max(coeffs)
            report.check("fourier-oracle", worst <= 1e-6, worst, 1e-6, "coefficients vs rho^|m|, |m| <= 20, t <= 3")
    report.trends.append(fit_trend(t_list, norms, "sqrt"))
    return report


# ── Busemann cocycle ─────────────────────────────────────────────────


def busemann_w0_spectral(params: GroupParams, t: float, band: int | None = None) -> tuple[float, int]:
    """W0 norm of gamma_(0, a_t.0) from its sphere spectrum; returns (norm, band)."""
    band = band or band_for(t, cap=BAND_CAP)
    quad = _zonal_or_circle(params, band)
    samples = busemann(origin(params), axis_point(params, t), quad.points())
    spec = sphere_transform(quad, samples).without_zero_mode()
    return w0_norm_sphere(spec, params), band


def growth_busemann(
    params: GroupParams,
    t_list: list[float] | None = None,
    backend: str | None = None,
    band: int | None = None,
    grid_L: float | None = None,
    grid_m: int | None = None,
    executor: OrderedExecutor | None = None,
    cache: OperatorCache | None = None,
) -> CocycleReport:
    """
    ||gamma_(0, a_t.0)||_W0 against t.

    ``backend == "spectral"`` (SO only) uses the sphere spectrum; ``"chart"``
    uses chi * (gamma o C) on the chart grid, with gamma taken modulo the
    constant log cosh t.
    """
    backend = backend or ("spectral" if params.field is FieldTag.REAL else "chart")
    t_list = list(t_list or DEFAULT_T)
    executor = executor or OrderedExecutor()
    report = new_report("growth_busemann", params, ["t", "backend", "resolution", "norm", "oracle_sq", "rel_error"])
    logger.info("growth_busemann on %s (%s backend) for %d values of t", params.label, backend, len(t_list))

    if backend == "spectral":
        require_so_sphere(params)
        results = executor.map(lambda t: busemann_w0_spectral(params, t, band), t_list)
        norms = [r[0] for r in results]
        resolutions = [r[1] for r in results]
    else:
        chart = ChartNorm(params, grid_L, grid_m, CHART_GRIDS, cache)
        report.notes.append(chart.equivalence_note())
        norms = executor.map(lambda t: chart.norm(busemann_chart(params, t, chart.coords)), t_list)
        resolutions = [chart.grid.points_per_axis] * len(t_list)
        h = chart.grid.h
        unresolved = [t for t in t_list if np.exp(-t) < 3.0 * h]
        if unresolved:
            report.notes.append(
                f"e^-t < 3h for t >= {min(unresolved):g}; growth past that point comes from the "
                "origin node, where log(1 - tanh t) is sampled exactly."
            )

    for t, value, res in zip(t_list, norms, resolutions):
        oracle = series_oracle(t) if (backend == "spectral" and params.n == 2) else float("nan")
        rel = float("nan") if math.isnan(oracle) else _relative(value ** 2, oracle)
        report.add_row(t, backend, res, value, oracle, rel)

    check_growth(report, t_list, norms, min_amplification=2.0)
    if backend == "spectral" and params.n == 2:
        rels = [r[5] for r in report.rows if 0 < r[0] <= 6.0]
        if rels:
            worst = max(rels)
            report.check("series-oracle", worst <= 0.01, worst, 0.01, "squared norm vs -2 log(1 - rho^2), t <= 6")
    report.trends.append(fit_trend(t_list, norms, "sqrt"))
    return report


# ── Uniform boundedness ──────────────────────────────────────────────


PHI_BAND = 8
S2_BAND = 40
# Above this t the full S^2 harmonic basis at S2_BAND no longer resolves
# pi(a(t)) phi; the zonal Legendre path takes over.
S2_T_CAP = 0.5


def random_band_limited(rng: np.random.Generator, params: GroupParams, band: int = PHI_BAND) -> SphereSpectrum:
    """A real, mean-zero function with harmonics up to ``band``."""
    if params.n == 2:
        coeffs = np.zeros(2 * band + 1, dtype=complex)
        half = rng.standard_normal(band) + 1j * rng.standard_normal(band)
        coeffs[band + 1:] = half
        coeffs[:band] = np.conj(half[::-1])
        return SphereSpectrum(1, band, coeffs)
    coeffs = rng.standard_normal((band + 1) ** 2)
    coeffs[0] = 0.0
    return SphereSpectrum(2, band, coeffs)


def random_zonal(rng: np.random.Generator, band: int = PHI_BAND) -> SphereSpectrum:
    """A real, mean-zero function on S^2 depending only on the angle from o."""
    coeffs = rng.standard_normal(band + 1)
    coeffs[0] = 0.0
    return SphereSpectrum(2, band, coeffs, zonal=True)


def action_ratio(params: GroupParams, g, phi: SphereSpectrum, band: int) -> float:
    """||pi(g) phi||_W0 / ||phi||_W0 with pi(g) phi = phi o g^-1."""
    quad = quadrature_for(params, band, zonal=phi.zonal)
    samples = np.real(evaluate_spectrum(phi, act_boundary(g.inverse(), quad.points())))
    moved = sphere_transform(quad, samples).without_zero_mode()
    return w0_norm_sphere(moved, params) / w0_norm_sphere(phi, params)


def _zonal_path(params: GroupParams, t: float) -> bool:
    return params.n == 3 and t > S2_T_CAP


def _action_band(params: GroupParams, t: float, band: int | None) -> int:
    if params.n == 3 and not _zonal_path(params, t):
        return S2_BAND
    return band or composed_band(t, PHI_BAND)


def _ratios_at(
    params: GroupParams,
    t: float,
    band: int,
    phis: list[SphereSpectrum],
    zonal_phis: list[SphereSpectrum],
    per_t: int,
    rng: np.random.Generator,
) -> tuple[float, list[float]]:
    a = make_a(params, t)
    if _zonal_path(params, t):
        # a(t) and the rotations about o keep zonal functions zonal, and the
        # W0 norm is K-invariant, so g = a(t) covers k a(t) m for m fixing o.
        ratios = [action_ratio(params, a, phi, band) for phi in zonal_phis]
        return max(ratios), ratios
    ratios = [action_ratio(params, a, phi, band) for phi in phis]
    ratio_a = max(ratios)
    for i in range(per_t):
        g = random_k(rng, params) @ a @ random_k(rng, params)
        ratios.append(action_ratio(params, g, phis[i % len(phis)], band))
    return ratio_a, ratios


def uniform_boundedness_sample(
    params: GroupParams,
    t_list: list[float] | None = None,
    samples: int = 200,
    rng: np.random.Generator | None = None,
    band: int | None = None,
) -> CocycleReport:
    """
    Sampled sup of the W0 operator norm of pi(g) over g = a(t) and random
    k a(t) k', next to the Busemann norm over the same t-range.

    On S^2, t above S2_T_CAP is sampled with zonal phi and g = a(t) at a band
    that grows with t.
    """
    require_so_sphere(params)
    rng = rng if rng is not None else np.random.default_rng(0)
    t_list = list(t_list or [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0])
    report = new_report(
        "uniform_boundedness",
        params,
        ["t", "band", "ratio_a", "ratio_min", "ratio_max", "busemann_norm"],
    )
    zonal_ts = [t for t in t_list if _zonal_path(params, t)]
    if zonal_ts:
        report.notes.append(
            f"S^2 ratios for t > {S2_T_CAP:g} use zonal phi and g = a(t); "
            f"t <= {S2_T_CAP:g} uses band {S2_BAND} with random k a(t) k'."
        )
    per_t = max(1, samples // len(t_list))
    logger.info("uniform_boundedness on %s: %d t-values x %d samples", params.label, len(t_list), per_t)

    phis = [random_band_limited(rng, params) for _ in range(3)]
    zonal_phis = [random_zonal(rng) for _ in range(3)] if zonal_ts else []
    identity_ratio = action_ratio(params, make_a(params, 0.0), phis[0], _action_band(params, 0.0, band))
    report.check("identity", abs(identity_ratio - 1.0) <= 1e-12, abs(identity_ratio - 1.0), 1e-12, "g = e")

    k_ratios = [action_ratio(params, random_k(rng, params), phi, _action_band(params, 0.0, band)) for phi in phis]
    k_dev = float(max(abs(r - 1.0) for r in k_ratios))
    report.check("k-invariance", k_dev <= 0.01, k_dev, 0.01, "g in K")

    maxima = []
    for t in t_list:
        b = _action_band(params, t, band)
        ratio_a, ratios = _ratios_at(params, t, b, phis, zonal_phis, per_t, rng)
        cocycle = busemann_w0_spectral(params, t)[0]
        report.add_row(t, b, ratio_a, min(ratios), max(ratios), cocycle)
        maxima.append(max(ratios))

    sup = max(maxima)
    report.notes.append(f"sampled sup of ||pi(g)||: {sup:.6g}")
    if len(t_list) >= 4:
        variation = plateau_variation(maxima)
        report.check("plateau", variation < 2.0, variation, 2.0, "max / min of the sup over the upper half of t")
    else:
        report.notes.append(f"plateau not evaluated: {len(t_list)} t values requested, 4 needed.")
    if max(t_list) >= 6.0:
        last = int(np.argmax(t_list))
        contrast = report.rows[last][5] / sup
        report.check("contrast", contrast >= 3.0, contrast, 3.0, "Busemann norm at t_max / sup action ratio")
    else:
        report.notes.append(f"contrast not evaluated: largest t is {max(t_list):g}, 6 needed.")
    return report
