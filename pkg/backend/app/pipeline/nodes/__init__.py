"""
nodes/__init__.py

Pipeline nodes for one experiment run: validate, run, evaluate, write.
"""

from app.pipeline.nodes.evaluate import run as evaluate
from app.pipeline.nodes.run_experiment import run as run_experiment
from app.pipeline.nodes.validate import run as validate
from app.pipeline.nodes.write_report import run as write_report

__all__ = ["validate", "run_experiment", "evaluate", "write_report"]
