"""
experiments/__init__.py

Experiment families and the command table that dispatches to them.
"""

from app.experiments.registry import EXPERIMENTS, list_experiments, run_experiment

__all__ = ["EXPERIMENTS", "list_experiments", "run_experiment"]
