import pytest

from app.core.errors import ConfigurationError, UsageError
from app.core.guard import growth_experiment, validate_grid, validate_run_config
from app.core.models import RunConfig
from app.geometry.scalars import FieldTag

from tests.conftest import SO21


def _gate(**fields) -> str:
    with pytest.raises(ConfigurationError) as info:
        validate_run_config(RunConfig(**fields))
    return info.value.gate


def test_identity_commands_accept_every_group():
    for group, n in (("so", 2), ("su", 1), ("sp", 1), ("sp", 3)):
        params = validate_run_config(RunConfig(command="verify-group", group=group, n=n))
        assert params.n == n


def test_real_n1_is_a_usage_error():
    with pytest.raises(UsageError):
        validate_run_config(RunConfig(command="verify-group", group="so", n=1))


def test_analysis_needs_n2():
    assert _gate(command="witness", group="su", n=1) == "n1-analysis-gate"


def test_quaternionic_growth_is_gated():
    assert _gate(command="growth", group="sp", n=2) == "sp-growth-gate"
    params = validate_run_config(RunConfig(command="integrability", group="sp", n=2))
    assert params.field is FieldTag.QUATERNION


def test_spectral_commands_need_low_dimensional_real_groups():
    assert _gate(command="uniform-bounded", group="su", n=2) == "so-spectral-gate"
    assert _gate(command="norm-equivalence", group="so", n=4) == "so-spectral-gate"
    assert _gate(command="growth", group="so", n=4, experiment="visual") == "so-spectral-gate"
    assert _gate(command="growth", group="su", n=2, backend="spectral") == "so-spectral-gate"
    assert _gate(command="lr-properness", group="su", n=2, backend="spectral") == "so-spectral-gate"
    validate_run_config(RunConfig(command="growth", group="so", n=4, experiment="busemann", backend="chart"))


def test_growth_defaults_to_visual_on_real_groups():
    assert growth_experiment(RunConfig(command="growth"), SO21) == "visual"
    su = validate_run_config(RunConfig(command="growth", group="su", n=2))
    assert growth_experiment(RunConfig(command="growth", group="su", n=2), su) == "busemann"
    assert growth_experiment(RunConfig(command="growth", experiment="busemann"), SO21) == "busemann"


def test_cowling_scan_is_so21_only():
    assert _gate(command="cowling-scan", group="so", n=3) == "cowling-so21-gate"
    assert _gate(command="cowling-scan", group="so", n=2, xi_list=[0.5, -0.1]) == "cowling-xi"


def test_lp_isometry_gates():
    assert _gate(command="lp-isometry", group="su", n=3) == "lp-isometry-dimension"
    assert _gate(command="lp-isometry", group="so", n=2, lam=1.0) == "lp-lambda-range"
    validate_run_config(RunConfig(command="lp-isometry", group="so", n=2, lam=0.5))


@pytest.mark.parametrize(
    "fields",
    [
        {"t_list": [-1.0]},
        {"k_list": [-2.0]},
        {"s_list": [2.0]},
        {"eps_list": [0.5, 0.5]},
        {"eps_list": [1.0]},
        {"m_list": [4]},
        {"grid_L": 0.0},
        {"band": 0},
        {"grid_m": 8},
    ],
)
def test_malformed_values_are_usage_errors(fields):
    with pytest.raises(UsageError):
        validate_run_config(RunConfig(command="growth", group="so", n=2, **fields))


def test_grid_budget_gate():
    with pytest.raises(ConfigurationError) as info:
        validate_grid(validate_run_config(RunConfig(command="witness", group="su", n=2)), 1001)
    assert info.value.gate == "grid-budget"
    validate_grid(SO21, None)
