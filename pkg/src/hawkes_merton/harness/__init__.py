"""Experiment configs, statistical checks, serialization and the CLI."""
from .config import ExperimentConfig, dumps, load, loads
from .experiments import run_experiment
from .stats import NormalityReport, ks_statistic, normal_cdf, normality_check

__all__ = [
    "ExperimentConfig",
    "NormalityReport",
    "dumps",
    "ks_statistic",
    "load",
    "loads",
    "normal_cdf",
    "normality_check",
    "run_experiment",
]
