"""
registry.py

The experiment table: one entry per CLI command with the statement it checks
and the runner that turns a validated RunConfig into a CocycleReport.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from app.core.executor import OrderedExecutor
from app.core.guard import growth_experiment
from app.core.models import CocycleReport, RunConfig
from app.experiments.growth import growth_busemann, growth_visual, uniform_boundedness_sample
from app.experiments.properness import lp_isometry_check, lr_properness, norm_equivalence_check
from app.experiments.sobolev import cowling_operator_scan, integrability_scan, witness_sequence
from app.experiments.verification import verify_cocycle, verify_group
from app.geometry.params import GroupParams
from app.integrations.operator_cache import OperatorCache

logger = logging.getLogger(__name__)

Runner = Callable[[RunConfig, GroupParams, np.random.Generator], CocycleReport]


@dataclass(frozen=True)
class Experiment:
    name: str
    summary: str
    statement: str
    runner: Runner


def _or_none(values: list) -> list | None:
    return list(values) if values else None


def _samples(config: RunConfig, default: int) -> int:
    return config.samples if config.samples is not None else default


def _growth(config: RunConfig, params: GroupParams, rng: np.random.Generator) -> CocycleReport:
    executor = OrderedExecutor()
    if growth_experiment(config, params) == "visual":
        return growth_visual(params, _or_none(config.t_list), config.band, executor)
    return growth_busemann(
        params,
        _or_none(config.t_list),
        config.backend,
        config.band,
        config.grid_L,
        config.grid_m,
        executor,
        OperatorCache(config.cache),
    )


def _witness(config: RunConfig, params: GroupParams, rng: np.random.Generator) -> CocycleReport:
    return witness_sequence(params, _or_none(config.k_list), config.grid_L, config.grid_m, OperatorCache(config.cache))


def _norm_equivalence(config: RunConfig, params: GroupParams, rng: np.random.Generator) -> CocycleReport:
    return norm_equivalence_check(params, _samples(config, 20), config.grid_L, config.grid_m, OperatorCache(config.cache))


EXPERIMENTS: dict[str, Experiment] = {
    e.name: e
    for e in (
        Experiment(
            "verify-group",
            "field, group, V and Cayley-chart identities on random instances",
            "structure of G = KNA, the Cayley transform and the modular function rho",
            lambda c, p, rng: verify_group(p, rng, _samples(c, 200)),
        ),
        Experiment(
            "verify-cocycle",
            "cocycle identities and equivariance of gamma and c",
            "gamma and c are cocycles for the boundary action",
            lambda c, p, rng: verify_cocycle(p, rng, _samples(c, 200)),
        ),
        Experiment(
            "growth",
            "||c(0, a_t.0)||_(W0*) or ||gamma_(0, a_t.0)||_W0 against t",
            "both cocycles are proper: their norms tend to infinity with d(x, y)",
            _growth,
        ),
        Experiment(
            "witness",
            "ev_0(phi_k) / ||phi_k||_(H^(r/2)) for truncated logarithms",
            "ev_0 is not bounded on the critical Sobolev space H^(r/2)(V)",
            _witness,
        ),
        Experiment(
            "integrability",
            "integral of N^(s - r) over eps <= N <= 1 against its closed form",
            "N^(xi - r) is locally integrable iff Re xi > 0",
            lambda c, p, rng: integrability_scan(p, _or_none(c.s_list), _or_none(c.eps_list), rng),
        ),
        Experiment(
            "uniform-bounded",
            "sup ||pi(g) phi||_W0 / ||phi||_W0 over sampled g",
            "the G-action on W0 is uniformly bounded",
            lambda c, p, rng: uniform_boundedness_sample(p, _or_none(c.t_list), _samples(c, 200), rng, c.band),
        ),
        Experiment(
            "lr-properness",
            "||d gamma_(0, a_t.0)||_(L^r) against t and the annulus scan",
            "the L^r norm of d gamma tends to infinity (final properness statement)",
            lambda c, p, rng: lr_properness(
                p, _or_none(c.t_list), c.backend, c.grid_L, c.grid_m, _or_none(c.eps_list)
            ),
        ),
        Experiment(
            "norm-equivalence",
            "sphere-spectral W0 norm against the Cayley-chart Sobolev norm on bumps",
            "the two norms on smooth vectors are equivalent",
            _norm_equivalence,
        ),
        Experiment(
            "lp-isometry",
            "ratio of the K and V integrals of |f|^p across random h",
            "int_K |f|^p = C_G int_V |f|^p with 1/p = Re(lambda)/2r + 1/2",
            lambda c, p, rng: lp_isometry_check(p, _samples(c, 10), c.lam, rng),
        ),
        Experiment(
            "cowling-scan",
            "largest singular value of Delta^(r/4) o (* N^(xi - r)) under refinement",
            "Delta^(r/4) o (* N^(-r/2)) extends to a bounded operator on L^2(V)",
            lambda c, p, rng: cowling_operator_scan(p, _or_none(c.xi_list), _or_none(c.m_list), c.grid_L),
        ),
    )
}


def list_experiments() -> list[dict]:
    """Rows of the experiment table, sorted by command name."""
    return [
        {"name": e.name, "summary": e.summary, "statement": e.statement}
        for e in sorted(EXPERIMENTS.values(), key=lambda e: e.name)
    ]


def run_experiment(config: RunConfig, params: GroupParams) -> CocycleReport:
    """Dispatch ``config`` to its runner with a generator seeded from ``config.seed``."""
    experiment = EXPERIMENTS[config.command]
    rng = np.random.default_rng(config.seed)
    logger.info("Running %s on %s (seed %d)", experiment.name, params.label, config.seed)
    return experiment.runner(config, params, rng)
