from .family import (
    DEFAULT_MAX_FREQUENCY,
    DEFAULT_MAX_WORD_LENGTH,
    MAX_ENTRIES,
    FamilyEntry,
    TestFamily,
    build_family,
)
from .metric import catalog_diameter, detect_convergence, distance, integral_vector, weighted_gap

__all__ = [
    "DEFAULT_MAX_FREQUENCY",
    "DEFAULT_MAX_WORD_LENGTH",
    "MAX_ENTRIES",
    "FamilyEntry",
    "TestFamily",
    "build_family",
    "catalog_diameter",
    "detect_convergence",
    "distance",
    "integral_vector",
    "weighted_gap",
]
