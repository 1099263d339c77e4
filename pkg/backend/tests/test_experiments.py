import math

import numpy as np
import pytest

from app.core.models import RunConfig
from app.experiments import EXPERIMENTS, list_experiments, run_experiment
from app.experiments.growth import growth_busemann, growth_visual, series_oracle, uniform_boundedness_sample
from app.experiments.properness import (
    gradient_identity_residual,
    jacobian_iwasawa_residual,
    lp_isometry_check,
    lr_properness,
    norm_equivalence_check,
    sphere_gradient_closed,
    sphere_gradient_lr,
)
from app.experiments.sobolev import (
    convolution_matrix,
    cowling_operator_scan,
    feasible_k,
    integrability_scan,
    shell_closed_form,
    witness_sequence,
    witness_values,
)
from app.experiments.verification import verify_cocycle, verify_group
from app.geometry.heisenberg import Grid
from app.geometry.params import GroupParams
from app.geometry.scalars import FieldTag

from tests.conftest import SO21, SO31, SP21, SU21


def _failed(report) -> list[str]:
    return [c.name for c in report.criteria if not c.passed]


# ── Identity suites ──────────────────────────────────────────────────


@pytest.mark.parametrize("params", [SO21, SU21], ids=lambda p: p.label)
def test_verify_group_passes(params, rng):
    report = verify_group(params, rng, samples=20)
    assert report.criteria
    assert _failed(report) == []
    assert report.criterion("a-diagonalised-by-U").passed


@pytest.mark.parametrize("params", [SO21, SU21], ids=lambda p: p.label)
def test_verify_cocycle_passes(params, rng):
    report = verify_cocycle(params, rng, samples=20)
    assert report.criteria
    assert _failed(report) == []


@pytest.mark.slow
def test_quaternionic_suites_pass(rng):
    assert _failed(verify_group(SP21, rng, samples=20)) == []
    assert _failed(verify_cocycle(SP21, rng, samples=20)) == []


# ── Growth ───────────────────────────────────────────────────────────


def test_series_oracle():
    assert series_oracle(0.0) == 0.0
    assert series_oracle(2.0) == pytest.approx(4.0 * math.log(math.cosh(1.0)))


def test_visual_growth_matches_series_on_circle():
    report = growth_visual(SO21, [0.0, 1.0, 2.0, 4.0, 6.0])
    assert _failed(report) == []
    assert report.criterion("series-oracle").value < 1e-6
    assert report.criterion("numeric-density").value < 1e-6
    assert math.isnan(report.column("numeric_rel_error")[2])
    assert report.column("norm")[0] == 0.0
    assert len(report.trends) == 1 and report.trends[0].derived_expectation


def test_busemann_growth_spectral_on_circle():
    report = growth_busemann(SO21, [0.0, 1.0, 2.0, 4.0, 6.0], backend="spectral")
    assert _failed(report) == []
    norms = report.column("norm")
    assert norms == sorted(norms)


def test_busemann_growth_chart_on_su21():
    report = growth_busemann(SU21, [0.0, 0.5, 1.0], grid_L=1.25, grid_m=9)
    assert report.column("backend") == ["chart"] * 3
    norms = report.column("norm")
    assert norms[0] == pytest.approx(0.0, abs=1e-12)
    assert all(v > 0 for v in norms[1:])
    assert any("inhomogeneous" in note for note in report.notes)


def test_uniform_boundedness_small_sample(rng):
    report = uniform_boundedness_sample(SO21, [0.0, 1.0, 2.0], samples=6, rng=rng)
    assert _failed(report) == []
    assert report.column("ratio_a")[0] == pytest.approx(1.0, abs=1e-12)
    assert len(report.rows) == 3
    assert any("plateau not evaluated" in note for note in report.notes)
    assert any("contrast not evaluated" in note for note in report.notes)


@pytest.mark.slow
def test_uniform_boundedness_on_s2_reaches_t6(rng):
    t_list = [0.0, 0.5, 3.0, 6.0]
    report = uniform_boundedness_sample(SO31, t_list, samples=4, rng=rng)
    names = [c.name for c in report.criteria]
    assert {"identity", "k-invariance", "plateau", "contrast"} <= set(names)
    assert _failed(report) == []
    assert report.column("t") == t_list
    # The Dirichlet energy on S^2 is conformally invariant.
    assert report.column("ratio_a") == pytest.approx([1.0] * 4, abs=1e-4)
    energies = [2.0 * (t / math.tanh(t) - 1.0) for t in t_list[1:]]
    assert [b ** 2 for b in report.column("busemann_norm")[1:]] == pytest.approx(energies, rel=1e-3)


# ── Critical Sobolev space ───────────────────────────────────────────


def test_witness_values_at_origin():
    assert witness_values(SU21, 1.5, np.zeros(SU21.v_dim)) == pytest.approx(1.5)
    assert feasible_k(0.0, 1.0)
    assert not feasible_k(3.0, 0.1)


def test_witness_sequence_clips_infeasible_k():
    report = witness_sequence(SO31, [0.5, 1.0, 4.0], grid_L=1.5, grid_m=65)
    assert report.column("k") == [0.5, 1.0]
    assert report.column("ev0") == pytest.approx([0.5, 1.0], abs=1e-12)
    assert report.criterion("ev0-exact").passed
    assert any("clipped" in note for note in report.notes)
    assert any("within a factor" in note for note in report.notes)


def test_shell_closed_form():
    assert shell_closed_form(SU21, 0.0, math.exp(-1.0), 2.0) == pytest.approx(2.0 * SU21.r)
    assert shell_closed_form(SU21, 1.0, 0.5, 1.0) == pytest.approx(SU21.r * 0.5)


def test_integrability_on_so31(rng):
    report = integrability_scan(SO31, [0.0, 1.0], [1e-1, 1e-2, 1e-3], rng, mc_samples=20_000)
    assert _failed(report) == []
    assert report.criterion("closed-form").value < 1e-6


def test_integrability_closed_form_on_su21(rng):
    report = integrability_scan(SU21, [1.0, 2.0], [1e-1, 1e-2], rng, mc_samples=20_000)
    assert report.criterion("closed-form").passed


def test_convolution_matrix_is_symmetric():
    grid = Grid(SO21, 1.0, 11)
    kernel = convolution_matrix(grid, 0.5)
    np.testing.assert_allclose(kernel, kernel.T)
    assert kernel[5, 5] == pytest.approx(2.0 * (grid.h / 2.0) ** 0.5 / 0.5)


def test_cowling_scan_is_stable_at_the_critical_exponent():
    report = cowling_operator_scan(SO21, [0.5], [21, 41, 81])
    assert report.criterion("symmetry").passed
    assert report.criterion("refinement-stability-xi=0.5").passed
    assert all(s > 0 for s in report.column("sigma_max"))


# ── Properness and norms ─────────────────────────────────────────────


@pytest.mark.parametrize("params", [SO21, SO31], ids=lambda p: p.label)
def test_sphere_gradient_closed_forms(params):
    for t in (0.5, 2.0, 5.0):
        assert sphere_gradient_lr(params, t) == pytest.approx(sphere_gradient_closed(params, t), rel=1e-6)
    assert gradient_identity_residual(params, 1.0) < 1e-5


def test_lr_properness_on_circle():
    report = lr_properness(SO21, [0.0, 1.0, 2.0, 4.0], eps_list=[1e-1, 1e-2, 1e-3])
    assert _failed(report) == []
    assert report.column("lr_norm")[2] == pytest.approx(4.0 / math.pi, rel=1e-6)


def test_lp_isometry_on_circle(rng):
    report = lp_isometry_check(SO21, samples=3, lam=0.0, rng=rng)
    assert _failed(report) == []
    assert report.column("p") == [2.0] * 4


def test_jacobian_iwasawa_relation(rng):
    assert jacobian_iwasawa_residual(SU21, rng, count=10) < 1e-6


def test_norm_equivalence_small_family():
    report = norm_equivalence_check(SO21, samples=3)
    assert report.criterion("constant-zero").passed
    assert report.criterion("ratio-spread").passed
    assert all(r > 0 for r in report.column("ratio"))


# ── Registry ─────────────────────────────────────────────────────────


def test_registry_lists_every_command():
    rows = list_experiments()
    names = [r["name"] for r in rows]
    assert names == sorted(names)
    assert set(names) == set(EXPERIMENTS)
    by_name = {r["name"]: r for r in rows}
    assert "H^(r/2)" in by_name["witness"]["statement"]
    assert "final properness statement" in by_name["lr-properness"]["statement"]


def test_run_experiment_uses_config(tmp_path):
    config = RunConfig(command="integrability", group="so", n=3, s_list=[1.0], eps_list=[0.1], cache=str(tmp_path))
    report = run_experiment(config, SO31)
    assert report.experiment == "integrability_scan"
    assert len(report.rows) == 1


def test_chart_growth_stores_its_spectrum_in_the_configured_cache(tmp_path):
    su31 = GroupParams(FieldTag.COMPLEX, 3)
    config = RunConfig(
        command="growth", group="su", n=3, t_list=[0.5, 1.0], grid_L=1.0, grid_m=3, cache=str(tmp_path)
    )
    report = run_experiment(config, su31)
    assert report.experiment == "growth_busemann"
    assert len(list(tmp_path.glob("*.bin"))) == 1
    run_experiment(config, su31)
    assert len(list(tmp_path.glob("*.bin"))) == 1
