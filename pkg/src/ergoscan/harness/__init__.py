from .config import SCHEMA_VERSION, Experiment, ExperimentConfig, derive_seed, materialize, validate_config
from .formatter import ReportFormatter
from .runner import ExperimentReport, TargetSummary, run_experiment

__all__ = [
    "SCHEMA_VERSION",
    "Experiment",
    "ExperimentConfig",
    "ExperimentReport",
    "ReportFormatter",
    "TargetSummary",
    "derive_seed",
    "materialize",
    "run_experiment",
    "validate_config",
]
