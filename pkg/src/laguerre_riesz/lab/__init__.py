"""Experiments, slope fitting, reports, the acceptance suite and the CLI."""

from .experiments import EXPERIMENTS, run_experiment
from .report import ExperimentReport

__all__ = ["EXPERIMENTS", "ExperimentReport", "run_experiment"]
