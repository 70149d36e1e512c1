"""Verification harness: registered experiments, configs and reports."""
from .core import (Check, Experiment, ExperimentConfig, Outcome, default_config, evaluate_checks,
                   recheck, run_experiment, run_suite, validate_config, write_report)
from .experiments import REGISTRY, experiment_registry

__all__ = [
    "Check", "Experiment", "ExperimentConfig", "Outcome", "REGISTRY", "default_config",
    "evaluate_checks", "experiment_registry", "recheck", "run_experiment", "run_suite",
    "validate_config", "write_report",
]
