"""
common.py

Helpers shared by the experiment families: band selection for the sphere
transforms, smooth cutoffs and bumps in the Cayley chart, pullbacks of chart
functions to the sphere, a product rule on V and the monotone-growth checks.
"""

from __future__ import annotations

import logging
import math
from typing import Callable

import numpy as np
from scipy.special import roots_legendre

from app.core.errors import ConfigurationError
from app.core.models import CocycleReport
from app.core.trend import amplification, strictly_increasing
from app.geometry.groups import basepoint_o, cayley_inv_coords
from app.geometry.heisenberg import Grid, GridField, hom_norm_coords, sublaplacian_matrix
from app.geometry.params import GroupParams
from app.geometry.scalars import FieldTag, qabs2
from app.geometry.spectral import operator_spectrum, sobolev_norm_V
from app.integrations.operator_cache import OperatorCache

logger = logging.getLogger(__name__)

ZERO_TOL = 1e-10


def new_report(experiment: str, params: GroupParams, columns: list[str]) -> CocycleReport:
    return CocycleReport(
        experiment=experiment,
        group=params.cli_name,
        n=params.n,
        label=params.label,
        columns=columns,
    )


# ── Band selection ───────────────────────────────────────────────────


def band_for(t: float, tol: float = 1e-10, minimum: int = 16, cap: int | None = None) -> int:
    """
    Smallest band B with rho^(2B) <= tol, rho = tanh(t/2).

    Visual densities and Busemann functions of a(t).0 have harmonic
    coefficients decaying like rho^B, so the discarded tail of a squared norm
    is below ``tol``.
    """
    rho = math.tanh(abs(t) / 2.0)
    if rho <= 0.0:
        return minimum
    band = max(minimum, int(math.ceil(math.log(tol) / (2.0 * math.log(rho)))))
    if cap is not None and band > cap:
        logger.warning("Band %d for t=%.3g capped at %d", band, t, cap)
        return cap
    return band


def composed_band(t: float, degree: int, tol: float = 1e-12, minimum: int = 16) -> int:
    """
    Band for a degree-``degree`` trigonometric polynomial composed with the
    boundary action of a(t): coefficients decay like B^degree rho^B.
    """
    rho = math.tanh(abs(t) / 2.0)
    if rho <= 0.0:
        return max(minimum, degree)
    decay = -math.log(rho)
    band = float(max(minimum, degree))
    for _ in range(8):
        band = (math.log(1.0 / tol) + degree * math.log(max(band, 2.0))) / decay
    return max(minimum, degree, int(math.ceil(band)))


# ── Cutoffs and bumps in the chart ───────────────────────────────────


def smooth_step(s: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for s <= 0, 1 for s >= 1."""
    s = np.asarray(s, dtype=float)
    left = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
    right = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    return left / (left + right)


def chart_cutoff(params: GroupParams, coords: np.ndarray, inner: float, outer: float) -> np.ndarray:
    """chi = 1 on {N <= inner}, 0 on {N >= outer}, smooth in the homogeneous norm."""
    norm = hom_norm_coords(params, coords)
    return 1.0 - smooth_step((norm - inner) / (outer - inner))


def bump(params: GroupParams, coords: np.ndarray, center: np.ndarray, scale: float) -> np.ndarray:
    """exp(1 - 1/(1 - |u|^2)) on the unit ball, u = (v - center)/scale in flat coordinates."""
    u = (np.asarray(coords, dtype=float) - np.asarray(center, dtype=float)) / scale
    uu = np.sum(u * u, axis=-1)
    inside = uu < 1.0
    safe = np.where(inside, 1.0 - uu, 1.0)
    return np.where(inside, np.exp(1.0 - 1.0 / safe), 0.0)


def chart_pullback(
    params: GroupParams,
    f: Callable[[np.ndarray], np.ndarray],
    points: np.ndarray,
    pole_gap: float = 1e-3,
) -> np.ndarray:
    """w(z) = f(C^-1(z)) at boundary points; zero within ``pole_gap`` of -o."""
    points = np.asarray(points, dtype=float)
    gap = np.sqrt(qabs2(points + basepoint_o(params)).sum(axis=-1))
    live = gap > pole_gap
    out = np.zeros(points.shape[:-2])
    if np.any(live):
        out[live] = f(cayley_inv_coords(params, points[live]))
    return out


def chart_grid(params: GroupParams, half_width: float | None, points: int | None, defaults: tuple[float, int]) -> Grid:
    return Grid(params, half_width or defaults[0], points or defaults[1])


# ── Quadrature on V ──────────────────────────────────────────────────


def tan_product_rule(params: GroupParams, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Gauss-Legendre product rule on all of V after v_i = s_i tan(u_i), with
    s = sqrt2 on the first stratum and 2 on the centre (the scales of
    |1 + x*x/2 - y/2|). Returns coordinates (N, dim V) and weights (N,).
    """
    u, w = roots_legendre(nodes)
    u = 0.5 * np.pi * u
    w = 0.5 * np.pi * w
    scales = np.concatenate([np.full(params.o_dim, np.sqrt(2.0)), np.full(params.z_dim, 2.0)])
    axes = [s * np.tan(u) for s in scales]
    weights = [s * w / np.cos(u) ** 2 for s in scales]
    coords = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, params.v_dim)
    total = weights[0]
    for wk in weights[1:]:
        total = np.multiply.outer(total, wk)
    return coords, np.asarray(total).reshape(-1)


# ── Growth checks ────────────────────────────────────────────────────


def check_growth(
    report: CocycleReport,
    parameters,
    values,
    min_amplification: float,
    zero_tol: float = ZERO_TOL,
) -> None:
    """
    Zero at the trivial parameter, strict monotone growth and a minimum
    amplification (last over first positive-parameter value).
    """
    p = np.asarray(parameters, dtype=float)
    v = np.asarray(values, dtype=float)
    if np.any(p == 0):
        at_zero = float(np.max(np.abs(v[p == 0])))
        report.check("zero-at-origin", at_zero <= zero_tol, at_zero, zero_tol)
    steps = np.diff(v)
    report.check(
        "strictly-increasing",
        strictly_increasing(v),
        float(np.min(steps)) if steps.size else 0.0,
        0.0,
        "smallest consecutive increment",
    )
    amp = amplification(v[p > 0])
    report.check("amplification", amp >= min_amplification, amp, min_amplification, "last / first positive point")


# ── Chart Sobolev norm ───────────────────────────────────────────────


class ChartNorm:
    """
    ||(1 + Delta)^(r/4) (chi * f)||_(L^2(V)) on a fixed grid.

    The operator is prepared once: a sine spectrum in the real case, the
    sparse sub-Laplacian when r/4 is an integer, a dense spectrum otherwise.
    chi is the chart cutoff between 0.4 L and 0.8 L.
    """

    def __init__(
        self,
        params: GroupParams,
        half_width: float | None = None,
        points: int | None = None,
        defaults: dict | None = None,
        cache: OperatorCache | None = None,
    ) -> None:
        grid_defaults = (defaults or {}).get((params.field, params.n))
        if grid_defaults is None and (half_width is None or points is None):
            raise ConfigurationError(
                f"No default chart grid for {params.label}; pass --grid-L and --grid-m.",
                gate="chart-grid",
            )
        self.params = params
        self.grid = chart_grid(params, half_width, points, grid_defaults or (0.0, 0))
        self.alpha = params.r / 2.0
        self.coords = self.grid.coords()
        self.cutoff = chart_cutoff(params, self.coords, 0.4 * self.grid.half_width, 0.8 * self.grid.half_width)
        self.spectrum = None
        self.matrix = None
        if params.field is not FieldTag.REAL and (self.alpha / 2.0).is_integer():
            self.matrix = sublaplacian_matrix(self.grid)
        else:
            self.spectrum = operator_spectrum(self.grid, cache)
        logger.info(
            "ChartNorm initialised on %s (L=%.3g, m=%d, alpha=%.3g)",
            params.label,
            self.grid.half_width,
            self.grid.points_per_axis,
            self.alpha,
        )

    def field(self, values: np.ndarray) -> GridField:
        return GridField(self.cutoff * values, self.grid)

    def norm(self, values: np.ndarray) -> float:
        return sobolev_norm_V(self.field(values), self.alpha, shifted=True, spec=self.spectrum, matrix=self.matrix)

    def origin_value(self, values: np.ndarray) -> float:
        return float(self.field(values).values[self.grid.center_index])

    def equivalence_note(self) -> str:
        """How the shifted norm used here compares with the homogeneous H^(r/2) norm."""
        head = (
            "norm is the inhomogeneous ||(1 + Delta)^(r/4) (chi f)||_(L^2(V)); chi f is supported in the "
            "fixed chart ball, where it is equivalent to the homogeneous ||Delta^(r/4) (chi f)||"
        )
        lowest = float(self.spectrum.sorted_eigenvalues()[0]) if self.spectrum is not None else 0.0
        if lowest <= 0.0:
            return head + "."
        factor = (1.0 + 1.0 / lowest) ** (self.alpha / 2.0)
        return head + f" within a factor {factor:.6g} (lowest grid eigenvalue {lowest:.6g})."
