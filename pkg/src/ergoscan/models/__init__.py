from .schemas import (
    BlockPlacement,
    BlockProgram,
    BlockSegment,
    Classification,
    CoveringNet,
    DenseBlockOrder,
    DistanceValue,
    EventuallyPeriodic,
    HitRun,
    HitSet,
    Hull,
    HullCenter,
    Provenance,
    ReferenceKind,
    RunRecord,
    ScanRecord,
    SeededIid,
    SequenceGenerator,
    SpaceTag,
    SystemKind,
    TargetResult,
    parse_word,
)

__all__ = [
    "BlockPlacement",
    "BlockProgram",
    "BlockSegment",
    "Classification",
    "CoveringNet",
    "DenseBlockOrder",
    "DistanceValue",
    "EventuallyPeriodic",
    "HitRun",
    "HitSet",
    "Hull",
    "HullCenter",
    "Provenance",
    "ReferenceKind",
    "RunRecord",
    "ScanRecord",
    "SeededIid",
    "SequenceGenerator",
    "SpaceTag",
    "SystemKind",
    "TargetResult",
    "parse_word",
]
