from .manager import RunRegistry
from .models import Base, RunModel, TargetResultModel

__all__ = [
    "RunRegistry",
    "Base",
    "RunModel",
    "TargetResultModel",
]
