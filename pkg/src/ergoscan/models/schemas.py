from __future__ import annotations

from datetime import datetime
from enum import Enum
from typing import Annotated, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def parse_word(value: object) -> object:
    """Accept "0110" shorthand for words over alphabets of size <= 10."""
    if isinstance(value, str):
        if not value.isdigit() and value != "":
            raise ValueError(f"word {value!r} must be a string of decimal symbols")
        return [int(c) for c in value]
    return value


class SystemKind(str, Enum):
    FULL_SHIFT = "full-shift"
    SFT = "sft"
    DOUBLING_MAP = "doubling-map"
    CAT_MAP = "cat-map"
    ROTATION = "rotation"


class SpaceTag(str, Enum):
    SHIFT = "shift"
    CIRCLE = "circle"
    TORUS = "torus"


class ReferenceKind(str, Enum):
    PERIODIC_ATOMIC = "periodic-atomic"
    BERNOULLI = "bernoulli"
    LEBESGUE = "lebesgue"


class Classification(str, Enum):
    CONVERGENT = "convergent"
    OSCILLATING = "oscillating"
    EXTREMELY_OSCILLATING = "extremely-oscillating-relative-to-catalog"


class DenseBlockOrder(str, Enum):
    LENGTH_LEX = "length-lex"


class EventuallyPeriodic(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["eventually-periodic"] = "eventually-periodic"
    preamble: Tuple[int, ...] = ()
    cycle: Tuple[int, ...] = Field(..., min_length=1)

    @field_validator("preamble", "cycle", mode="before")
    @classmethod
    def _parse_words(cls, value: object) -> object:
        return parse_word(value)


class BlockSegment(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    word: Tuple[int, ...] = Field(..., min_length=1)
    repeat: int = Field(1, ge=1)

    @field_validator("word", mode="before")
    @classmethod
    def _parse_word(cls, value: object) -> object:
        return parse_word(value)

    @property
    def length(self) -> int:
        return len(self.word) * self.repeat


class BlockProgram(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["block-program"] = "block-program"
    segments: Tuple[BlockSegment, ...] = ()
    tail: EventuallyPeriodic

    @property
    def length(self) -> int:
        return sum(segment.length for segment in self.segments)


class SeededIid(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["seeded-iid"] = "seeded-iid"
    p: Tuple[float, ...] = Field(..., min_length=2)
    seed: int = Field(..., ge=0)

    @field_validator("p")
    @classmethod
    def _probability_vector(cls, p: Tuple[float, ...]) -> Tuple[float, ...]:
        if any(q < 0 for q in p) or abs(sum(p) - 1.0) > 1e-12:
            raise ValueError("p must be a probability vector")
        return p


SequenceGenerator = Annotated[
    Union[EventuallyPeriodic, BlockProgram, SeededIid], Field(discriminator="kind")
]


class DistanceValue(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float = Field(..., ge=0)
    tail_bound: float = Field(..., ge=0)

    @property
    def upper(self) -> float:
        return self.value + self.tail_bound


class Provenance(BaseModel):
    model_config = ConfigDict(frozen=True)

    system_id: str
    point_id: str
    m: int = Field(..., ge=0)
    n: int = Field(..., ge=1)


class ScanRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    m: int
    n: int
    distances: List[Tuple[str, DistanceValue]]

    def distance_to(self, label: str) -> DistanceValue:
        for target, value in self.distances:
            if target == label:
                return value
        raise KeyError(label)


class HitRun(BaseModel):
    """Hits at m = start, start + stride, ..., stop - stride for one window length."""

    n: int
    start: int
    stop: int
    stride: int = 1

    def positions(self) -> range:
        return range(self.start, self.stop, self.stride)


class HitSet(BaseModel):
    target: str
    epsilon: float
    m_max: int
    n_values: List[int]
    count: int = 0
    runs: List[HitRun] = Field(default_factory=list)

    @property
    def hits(self) -> List[Tuple[int, int]]:
        return [(m, run.n) for run in self.runs for m in run.positions()]

    @property
    def is_empty(self) -> bool:
        return self.count == 0


class HullCenter(BaseModel):
    m: int
    n: int
    window_count: int = 0
    target_distances: List[Tuple[str, DistanceValue]] = Field(default_factory=list)
    invariance_defect: Optional[float] = None

    def distance_to(self, label: str) -> DistanceValue:
        for target, value in self.target_distances:
            if target == label:
                return value
        raise KeyError(label)

    @property
    def nearest_target(self) -> Optional[str]:
        if not self.target_distances:
            return None
        return min(self.target_distances, key=lambda item: item[1].value)[0]


class Hull(BaseModel):
    n: int
    radius: float
    tail_bound: float
    windows: int = 0
    coverage: float = 0.0
    diameter: float = 0.0
    extent: float = 0.0
    centers: List[HullCenter] = Field(default_factory=list)

    @property
    def is_complete(self) -> bool:
        return self.windows > 0 and self.coverage == 1.0


class CoveringNet(BaseModel):
    k: int = Field(..., ge=1)
    radius: float
    centers: List[str]
    assignments: List[Tuple[str, str]] = Field(default_factory=list)

    @model_validator(mode="after")
    def _radius_matches_k(self) -> "CoveringNet":
        if self.radius != 1.0 / self.k:
            raise ValueError("covering radius must equal 1/k")
        return self


class BlockPlacement(BaseModel):
    target: str
    start: int
    length: int

    @property
    def stop(self) -> int:
        return self.start + self.length

    def contains_window(self, m: int, n: int) -> bool:
        return self.start <= m and m + n <= self.stop


class TargetResult(BaseModel):
    target: str
    epsilon: float
    hit_count: int = 0
    best_distance: Optional[float] = None


class RunRecord(BaseModel):
    id: Optional[int] = None
    config_hash: str
    system_kind: SystemKind
    point_kind: str
    classification: Classification
    classified_n: int
    output_dir: str
    total_seconds: Optional[float] = None
    created_at: Optional[datetime] = None
    results: List[TargetResult] = Field(default_factory=list)
    report: Optional[dict] = None

    @property
    def hit_targets(self) -> List[str]:
        return sorted({r.target for r in self.results if r.hit_count > 0})
