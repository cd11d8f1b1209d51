"""Experiment driver, fits and the acceptance-criteria registry."""

from .criteria import CRITERIA, VERDICTS, Criterion, criterion_for, list_criteria
from .experiments import ExperimentConfig, ExperimentReport, run
from .fitting import fit_linear, fit_rate

__all__ = [
    "CRITERIA",
    "VERDICTS",
    "Criterion",
    "ExperimentConfig",
    "ExperimentReport",
    "criterion_for",
    "fit_linear",
    "fit_rate",
    "list_criteria",
    "run",
]
