from .design import DesignedPoint, TypicalBlock, design_transitive_point
from .dynamics import (
    CatMap,
    DoublingMap,
    DynamicalSystem,
    FullShift,
    OrbitCursor,
    Rotation,
    State,
    SubshiftOfFiniteType,
    iterate,
)
from .fixedpoint import TorusPoint, golden_angle, to_fixed, to_float, to_fraction
from .sequences import UNBOUNDED_HORIZON, SymbolicState, SymbolSequence
from .transitivity import admissible_words, check_transitive, connector, validate_adjacency

__all__ = [
    "CatMap",
    "DesignedPoint",
    "DoublingMap",
    "DynamicalSystem",
    "FullShift",
    "OrbitCursor",
    "Rotation",
    "State",
    "SubshiftOfFiniteType",
    "SymbolSequence",
    "SymbolicState",
    "TorusPoint",
    "TypicalBlock",
    "UNBOUNDED_HORIZON",
    "admissible_words",
    "check_transitive",
    "connector",
    "design_transitive_point",
    "golden_angle",
    "iterate",
    "to_fixed",
    "to_float",
    "to_fraction",
    "validate_adjacency",
]
