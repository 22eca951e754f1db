__version__ = "0.1.0"

from .database import RunRegistry
from .errors import ErgoscanError, HorizonExceeded, ParseFailed, ValidationFailed
from .harness import ExperimentConfig, ExperimentReport, ReportFormatter, run_experiment, validate_config
from .models import Classification, DistanceValue, HitSet, Hull, SpaceTag, SystemKind
from .server import mcp

__all__ = [
    "Classification",
    "DistanceValue",
    "ErgoscanError",
    "ExperimentConfig",
    "ExperimentReport",
    "HitSet",
    "HorizonExceeded",
    "Hull",
    "ParseFailed",
    "ReportFormatter",
    "RunRegistry",
    "SpaceTag",
    "SystemKind",
    "ValidationFailed",
    "mcp",
    "run_experiment",
    "validate_config",
]
