"""
guard.py

Validation gates applied to a RunConfig before any experiment is dispatched.
Each rejected combination raises ConfigurationError naming the gate that
fired; the CLI turns that into exit code 1.
"""

import logging

from app.core.constants import GRID_NODE_BUDGET
from app.core.errors import ConfigurationError, UsageError
from app.core.models import RunConfig
from app.geometry.params import GroupParams
from app.geometry.scalars import FieldTag

logger = logging.getLogger(__name__)

# Commands that only touch scalars, groups and cocycles.
IDENTITY_COMMANDS = frozenset({"verify-group", "verify-cocycle"})

# Commands that need the sphere spectrum of SO_0(2,1) or SO_0(3,1).
SPHERE_COMMANDS = frozenset({"uniform-bounded", "norm-equivalence"})

# Norm-growth commands gated off for Sp(n,1).
QUATERNION_GATED = frozenset(
    {"growth", "witness", "uniform-bounded", "lr-properness", "norm-equivalence", "lp-isometry", "cowling-scan"}
)


def _fail(message: str, gate: str) -> None:
    logger.error("Gate %s: %s", gate, message)
    raise ConfigurationError(message, gate=gate)


def resolve_params(config: RunConfig) -> GroupParams:
    """
    Build GroupParams from the group and n of a config.

    Raises:
        UsageError: For SO_0(1,1), which has no boundary sphere of positive dimension.
    """
    return GroupParams.from_group(config.group, config.n)


def validate_grid(params: GroupParams, points: int | None) -> None:
    """
    Args:
        params: Group parameters; the grid lives on V of dimension ``params.v_dim``.
        points: Points per axis requested with --grid-m, or None.

    Raises:
        UsageError: If ``points`` is even or smaller than 3.
        ConfigurationError: ``grid-budget`` if points^dim exceeds GRID_NODE_BUDGET.
    """
    if points is None:
        return
    if points < 3 or points % 2 == 0:
        raise UsageError(f"--grid-m must be odd and >= 3, got {points}.")
    if points ** params.v_dim > GRID_NODE_BUDGET:
        _fail(f"{points}^{params.v_dim} grid nodes exceed the budget of {GRID_NODE_BUDGET}.", "grid-budget")


def growth_experiment(config: RunConfig, params: GroupParams) -> str:
    """The growth curve to run: visual by default on SO_0, Busemann otherwise."""
    if config.experiment is not None:
        return config.experiment
    return "visual" if params.field is FieldTag.REAL else "busemann"


def _check_field(config: RunConfig, params: GroupParams) -> None:
    command = config.command
    if command in IDENTITY_COMMANDS:
        return
    if params.n < 2:
        _fail(f"{command} needs analysis on V, which requires n >= 2 ({params.label}).", "n1-analysis-gate")
    if params.field is FieldTag.QUATERNION and command in QUATERNION_GATED:
        _fail(f"{command} is not available for {params.label}: grids on V would be {params.v_dim}-dimensional.", "sp-growth-gate")

    spectral = command in SPHERE_COMMANDS
    if command == "growth":
        spectral = growth_experiment(config, params) == "visual" or config.backend == "spectral"
    if command == "lr-properness" and config.backend == "spectral":
        spectral = True
    if spectral and (params.field is not FieldTag.REAL or params.n not in (2, 3)):
        _fail(f"{command} uses sphere-spectral norms, available for SO_0(2,1) and SO_0(3,1) only.", "so-spectral-gate")

    if command == "cowling-scan" and (params.field is not FieldTag.REAL or params.n != 2):
        _fail("cowling-scan composes Delta^(r/4) spectrally and is available for SO_0(2,1) only.", "cowling-so21-gate")
    if command == "lp-isometry" and params.v_dim > 3:
        _fail(f"lp-isometry integrates over V of dimension {params.v_dim}; at most 3 is supported.", "lp-isometry-dimension")


def _check_values(config: RunConfig, params: GroupParams) -> None:
    r = params.r
    if any(t < 0 for t in config.t_list):
        raise UsageError("t values must be nonnegative.")
    if any(k < 0 for k in config.k_list):
        raise UsageError("k values must be nonnegative.")
    if any(not 0.0 <= s <= r for s in config.s_list):
        raise UsageError(f"s values must lie in [0, r] = [0, {r}].")
    if any(not 0.0 < e < 1.0 for e in config.eps_list):
        raise UsageError("eps cutoffs must lie in (0, 1).")
    if any(b >= a for a, b in zip(config.eps_list, config.eps_list[1:])):
        raise UsageError("eps cutoffs must be strictly decreasing.")
    if any(xi <= 0 for xi in config.xi_list):
        _fail("xi must be positive for a locally integrable kernel.", "cowling-xi")
    for m in config.m_list:
        if m < 3 or m % 2 == 0:
            raise UsageError(f"--m values must be odd and >= 3, got {m}.")
    if config.grid_L is not None and config.grid_L <= 0:
        raise UsageError(f"--grid-L must be positive, got {config.grid_L}.")
    if config.band is not None and config.band < 1:
        raise UsageError(f"--band must be >= 1, got {config.band}.")
    if config.command == "lp-isometry" and not -r < config.lam < r:
        _fail(f"lambda must lie in (-{r}, {r}), got {config.lam}.", "lp-lambda-range")


def validate_run_config(config: RunConfig) -> GroupParams:
    """
    Apply every gate to ``config``.

    Returns:
        The GroupParams the experiment will run on.

    Raises:
        UsageError: For malformed values.
        ConfigurationError: For unsupported combinations, naming the gate.
    """
    params = resolve_params(config)
    _check_field(config, params)
    _check_values(config, params)
    if config.command not in IDENTITY_COMMANDS:
        validate_grid(params, config.grid_m)
    logger.info("Config for %s on %s passed all gates", config.command, params.label)
    return params
