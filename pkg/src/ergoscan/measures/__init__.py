from .empirical import EmpiricalMeasure, empirical
from .integration import Measure, birkhoff_average, integrate, invariance_defect
from .observables import (
    AnyObservable,
    ConstantObservable,
    CylinderIndicator,
    FourierMode,
    Observable,
    ObservableCombination,
    combine,
)
from .reference import ReferenceMeasure

__all__ = [
    "AnyObservable",
    "ConstantObservable",
    "CylinderIndicator",
    "EmpiricalMeasure",
    "FourierMode",
    "Measure",
    "Observable",
    "ObservableCombination",
    "ReferenceMeasure",
    "birkhoff_average",
    "combine",
    "empirical",
    "integrate",
    "invariance_defect",
]
