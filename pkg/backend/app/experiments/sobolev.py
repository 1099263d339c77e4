"""
sobolev.py

Critical Sobolev analysis on V:

- witness_sequence: ev_0 is unbounded on H^(r/2)(V); phi_k = -1/4 chi log(N^4 + e^-4k)
  has phi_k(0) = k while its Sobolev norm grows more slowly.
- integrability_scan: N^(s-r) is locally integrable iff s > 0.
- cowling_operator_scan: Delta^(r/4) composed with convolution by N^(xi-r) on
  SO_0(2,1), largest singular value under grid refinement.
"""

from __future__ import annotations

import logging
import math
from typing import Callable

import numpy as np
from scipy.fft import dst
from scipy.integrate import quad
from scipy.linalg import svdvals

from app.core.errors import ConfigurationError
from app.core.models import CocycleReport
from app.core.trend import equal_increments, fit_trend, step_ratios, strictly_increasing
from app.experiments.common import ChartNorm, new_report
from app.geometry.heisenberg import (
    Grid,
    ball_volume_mc,
    ball_volume_quad,
    hom_norm_coords,
    require_first_stratum,
    unit_sphere_area,
)
from app.geometry.params import GroupParams
from app.geometry.scalars import FieldTag
from app.geometry.spectral import sine_eigenvalues
from app.integrations.operator_cache import OperatorCache

logger = logging.getLogger(__name__)

# (half-width L, points per axis m) for the witness grids
WITNESS_GRIDS = {
    (FieldTag.REAL, 2): (1.5, 2**17 + 1),
    (FieldTag.REAL, 3): (1.5, 257),
    (FieldTag.COMPLEX, 2): (0.5, 57),
}


# ── Non-embedding witnesses ──────────────────────────────────────────


def witness_values(params: GroupParams, k: float, coords: np.ndarray) -> np.ndarray:
    """-1/4 log(N^4 + e^-4k), before the cutoff; equals k at the origin."""
    norm4 = hom_norm_coords(params, coords) ** 4
    return -0.25 * np.log(norm4 + np.exp(-4.0 * k))


def feasible_k(k: float, h: float) -> bool:
    """The plateau radius e^-k must span at least three grid nodes."""
    return k == 0 or math.exp(-k) >= 3.0 * h


def witness_sequence(
    params: GroupParams,
    k_list: list[float] | None = None,
    grid_L: float | None = None,
    grid_m: int | None = None,
    cache: OperatorCache | None = None,
) -> CocycleReport:
    """
    ev_0(phi_k) / ||phi_k||_(H^(r/2)) over the feasible k.

    k = 0 is the zero function with ratio 0 by definition.
    """
    require_first_stratum(params)
    if k_list is None:
        k_list = [0.5, 1.0, 2.0, 4.0, 8.0] if params.field is FieldTag.REAL else [0.125, 0.25, 0.5, 1.0, 2.0]
    chart = ChartNorm(params, grid_L, grid_m, WITNESS_GRIDS, cache)
    h = chart.grid.h
    report = new_report("witness_sequence", params, ["k", "ev0", "sobolev_norm", "ratio"])

    kept = [k for k in k_list if feasible_k(k, h)]
    clipped = [k for k in k_list if k not in kept]
    k_max = math.log(1.0 / (3.0 * h))
    if clipped:
        logger.warning("Witness k clipped to <= %.3f on h=%.3g: dropped %s", k_max, h, clipped)
        report.notes.append(f"k clipped to the feasible range k <= {k_max:.4f}; dropped {clipped}")
    report.notes.append(f"feasible range: k <= {k_max:.4f} (h = {h:.6g})")
    report.notes.append(chart.equivalence_note())
    logger.info("witness_sequence on %s for k in %s", params.label, kept)

    ratios = []
    ev_error = 0.0
    for k in kept:
        if k == 0:
            report.add_row(0.0, 0.0, 0.0, 0.0)
            ratios.append(0.0)
            continue
        values = witness_values(params, k, chart.coords)
        ev0 = chart.origin_value(values)
        norm = chart.norm(values)
        ev_error = max(ev_error, abs(ev0 - k) / max(1.0, k))
        ratio = k / norm
        report.add_row(k, ev0, norm, ratio)
        ratios.append(ratio)

    report.check("ev0-exact", ev_error <= 1e-12, ev_error, 1e-12, "phi_k(0) = k")
    steps = np.diff(ratios)
    report.check(
        "strictly-increasing",
        strictly_increasing(ratios),
        float(np.min(steps)) if steps.size else 0.0,
        0.0,
        "ratio increments over the feasible k",
    )
    positive = [(k, q) for k, q in zip(kept, ratios) if k > 0]
    doublings = [
        b[1] / a[1]
        for a, b in zip(positive, positive[1:])
        if math.isclose(b[0], 2.0 * a[0], rel_tol=1e-9)
    ]
    if doublings:
        worst = min(doublings)
        report.check("doubling-growth", worst >= 1.25, worst, 1.25, f"{len(doublings)} doublings of k")
    if len(positive) >= 2:
        report.trends.append(fit_trend([p[0] for p in positive], [p[1] for p in positive], "sqrt"))
    return report


# ── Local integrability of N^(s-r) ───────────────────────────────────


def annulus_integral(params: GroupParams, eps: float, weight: Callable[[float, float], float]) -> float:
    """
    Integral over {eps <= N <= 1} of a weight depending on a = |x| and b = |y|
    only, by nested adaptive quadrature in log a and log b.
    """
    p, q = params.o_dim, params.z_dim
    area_x = unit_sphere_area(p)
    lo_a = math.log(eps)
    if q == 0:
        value, _ = quad(lambda u: area_x * math.exp(p * u) * weight(math.exp(u), 0.0), lo_a, 0.0, limit=200)
        return float(value)
    area_y = unit_sphere_area(q)

    def inner(u: float) -> float:
        a = math.exp(u)
        a4 = a ** 4
        b_hi = math.sqrt(max(1.0 - a4, 0.0))
        if b_hi <= 0.0:
            return 0.0
        b_lo = math.sqrt(eps ** 4 - a4) if a4 < eps ** 4 else 0.0
        w_lo = math.log(b_lo) if b_lo > 0 else math.log(a * a) - 40.0 / q
        w_hi = math.log(b_hi)
        if w_lo >= w_hi:
            return 0.0

        def integrand(w: float) -> float:
            b = math.exp(w)
            return b ** q * weight(a, b)

        value, _ = quad(integrand, w_lo, w_hi, limit=200, epsabs=0.0, epsrel=1e-10)
        return area_x * area_y * a ** p * value

    start = lo_a - 30.0 / p
    value, _ = quad(inner, start, 0.0, points=[lo_a], limit=400, epsabs=0.0, epsrel=1e-9)
    return float(value)


def shell_integral(params: GroupParams, s: float, eps: float) -> float:
    """Integral of N^(s-r) over {eps <= N <= 1}."""
    exponent = (s - params.r) / 4.0
    return annulus_integral(params, eps, lambda a, b: (a ** 4 + b * b) ** exponent)


def shell_closed_form(params: GroupParams, s: float, eps: float, volume: float) -> float:
    """vol{N <= 1} r (1 - eps^s)/s, or vol r log(1/eps) at s = 0."""
    if s == 0:
        return volume * params.r * math.log(1.0 / eps)
    return volume * params.r * (1.0 - eps ** s) / s


def integrability_scan(
    params: GroupParams,
    s_list: list[float] | None = None,
    eps_list: list[float] | None = None,
    rng: np.random.Generator | None = None,
    mc_samples: int = 200_000,
) -> CocycleReport:
    require_first_stratum(params)
    s_list = list(s_list if s_list is not None else [0.0, 0.5, 1.0, 2.0])
    eps_list = sorted(eps_list or [1e-2, 1e-3, 1e-4], reverse=True)
    rng = rng if rng is not None else np.random.default_rng(0)
    report = new_report("integrability_scan", params, ["s", "eps", "value", "closed_form", "rel_error"])

    volume = ball_volume_quad(params)
    mc, stderr = ball_volume_mc(params, rng, 1.0, mc_samples)
    mc_tol = max(0.01 * volume, 5.0 * stderr)
    report.check("ball-volume-mc", abs(mc - volume) <= mc_tol, abs(mc - volume), mc_tol, f"MC {mc:.6g} vs {volume:.6g}")
    report.notes.append(f"vol(N <= 1) = {volume:.12g} (radial quadrature), {mc:.6g} +- {stderr:.2g} (Monte Carlo)")
    logger.info("integrability_scan on %s: s=%s eps=%s", params.label, s_list, eps_list)

    worst = 0.0
    divergent: list[float] = []
    for s in s_list:
        for eps in eps_list:
            value = shell_integral(params, s, eps)
            exact = shell_closed_form(params, s, eps, volume)
            rel = abs(value - exact) / abs(exact)
            report.add_row(s, eps, value, exact, rel)
            if s > 0:
                worst = max(worst, rel)
            else:
                divergent.append(value)

    if any(s > 0 for s in s_list):
        report.check("closed-form", worst <= 0.01, worst, 0.01, "vol r (1 - eps^s)/s, s > 0")
    if len(divergent) >= 2:
        decades = -np.log10(eps_list)
        even, spread = equal_increments(divergent, 0.1)
        growing = strictly_increasing(divergent)
        report.check("log-divergence", even and growing, spread, 0.1, "s = 0: equal increments per decade of eps")
        report.trends.append(fit_trend(decades, divergent, "linear"))
    return report


# ── Cowling composition on SO_0(2,1) ─────────────────────────────────


def require_so21(params: GroupParams) -> None:
    if params.field is not FieldTag.REAL or params.n != 2:
        raise ConfigurationError(
            f"The Cowling operator scan runs on SO_0(2,1) only, not {params.label}.",
            gate="cowling-so21-gate",
        )


def convolution_matrix(grid: Grid, xi: float) -> np.ndarray:
    """
    Discrete convolution with |x|^(xi - 1) on a 1-d grid: h |x_i - x_j|^(xi-1)
    off the diagonal, the exact cell integral 2 (h/2)^xi / xi on it.
    """
    x = grid.axis()
    h = grid.h
    gap = np.abs(x[:, None] - x[None, :])
    safe = np.where(gap > 0, gap, 1.0)
    kernel = np.where(gap > 0, h * safe ** (xi - 1.0), 2.0 * (h / 2.0) ** xi / xi)
    return kernel


def _sine_power(matrix: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Apply diag(weights) in the DST-I basis along axis 0."""
    coeffs = dst(matrix, type=1, norm="ortho", axis=0)
    return dst(weights[:, None] * coeffs, type=1, norm="ortho", axis=0)


def cowling_point(params: GroupParams, xi: float, m: int, half_width: float) -> dict:
    grid = Grid(params, half_width, m)
    lam = sine_eigenvalues(grid)
    power = params.r / 4.0
    conv = convolution_matrix(grid, xi)
    composed = _sine_power(conv, lam ** power)
    half = _sine_power(_sine_power(conv, lam ** (power / 2.0)).T, lam ** (power / 2.0))
    sym = float(np.max(np.abs(half - half.T)) / np.max(np.abs(half)))
    conv_sym = float(np.max(np.abs(conv - conv.T)))
    return {"h": grid.h, "sigma": float(svdvals(composed)[0]), "sym": sym, "conv_sym": conv_sym}


def cowling_operator_scan(
    params: GroupParams,
    xi_list: list[float] | None = None,
    m_list: list[int] | None = None,
    grid_L: float | None = None,
) -> CocycleReport:
    """sigma_max(Delta^(r/4) o (* N^(xi - r))) on grids of m points, for each xi."""
    require_so21(params)
    xi_list = list(xi_list or [params.r / 2.0, float(params.r)])
    m_list = list(m_list or [101, 201, 401])
    half_width = grid_L or 1.0
    report = new_report("cowling_operator_scan", params, ["xi", "m", "h", "sigma_max", "sym_residual", "conv_sym"])
    logger.info("cowling_operator_scan on %s: xi=%s m=%s", params.label, xi_list, m_list)

    worst_sym = 0.0
    for xi in xi_list:
        if not xi > 0:
            raise ConfigurationError(f"xi must be positive, got {xi}.", gate="cowling-xi")
        sigmas = []
        for m in m_list:
            point = cowling_point(params, xi, m, half_width)
            report.add_row(xi, m, point["h"], point["sigma"], point["sym"], point["conv_sym"])
            sigmas.append(point["sigma"])
            worst_sym = max(worst_sym, point["sym"], point["conv_sym"])
        spread = max(sigmas) / min(sigmas)
        report.check(f"refinement-stability-xi={xi:g}", spread <= 2.0, spread, 2.0, "max / min sigma over grids")
        if len(sigmas) >= 2:
            report.notes.append(
                f"xi={xi:g}: sigma ratios under refinement {np.round(step_ratios(sigmas), 6).tolist()}"
            )
    report.check("symmetry", worst_sym <= 1e-8, worst_sym, 1e-8, "Delta^(r/8) K Delta^(r/8) and K")
    return report
