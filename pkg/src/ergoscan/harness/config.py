"""Experiment configuration: a JSON document validated with unknown-key rejection.

`validate_config` returns a config with every default written out, so the echo stored in a
report validates back to an equal config. All stream seeds come from `master_seed`:
stream 0 seeds the point, stream 1 + j seeds typical block j.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from ..errors import ParseFailed, ValidationFailed
from ..measures.reference import ReferenceMeasure
from ..models.schemas import DenseBlockOrder, EventuallyPeriodic, ReferenceKind, SpaceTag, SystemKind, parse_word
from ..systems.design import (
    DesignedPoint,
    TypicalBlock,
    check_word_length,
    default_word_length,
    design_transitive_point,
)
from ..systems.dynamics import CatMap, DoublingMap, DynamicalSystem, FullShift, Rotation, State, SubshiftOfFiniteType
from ..systems.fixedpoint import TorusPoint, golden_angle, to_fixed
from ..systems.sequences import SymbolicState, SymbolSequence
from ..systems.transitivity import first_violation
from ..weakstar.family import DEFAULT_MAX_FREQUENCY, DEFAULT_MAX_WORD_LENGTH, MAX_ENTRIES, TestFamily, build_family

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
# symbols of an iid point checked against an sft adjacency before the run
IID_ADMISSIBILITY_PREFIX = 4096


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RawFixed(_Strict):
    raw: int = Field(..., ge=0)


FixedValue = Union[str, RawFixed]


class SystemSpec(_Strict):
    kind: SystemKind
    alphabet_size: Optional[int] = Field(None, ge=2, le=256)
    adjacency: Optional[List[List[int]]] = None
    matrix: Optional[List[List[int]]] = None
    angle: Optional[FixedValue] = None


class BlockSpec(_Strict):
    target: str
    length: int = Field(..., ge=1)
    seed: Optional[int] = Field(None, ge=0)


class DesignedPointSpec(_Strict):
    kind: Literal["designed"] = "designed"
    blocks: List[BlockSpec] = Field(default_factory=list)
    max_word_length: Optional[int] = Field(None, ge=1, le=24)
    order: DenseBlockOrder = DenseBlockOrder.LENGTH_LEX


class IidPointSpec(_Strict):
    kind: Literal["seeded-iid"] = "seeded-iid"
    p: List[float] = Field(..., min_length=2)
    seed: Optional[int] = Field(None, ge=0)


class PeriodicPointSpec(_Strict):
    kind: Literal["periodic"] = "periodic"
    preamble: Tuple[int, ...] = ()
    cycle: Tuple[int, ...] = Field(..., min_length=1)

    @field_validator("preamble", "cycle", mode="before")
    @classmethod
    def _parse_words(cls, value: object) -> object:
        return parse_word(value)


class WordPointSpec(_Strict):
    kind: Literal["word"] = "word"
    symbols: Tuple[int, ...] = Field(..., min_length=1)
    tail: Tuple[int, ...] = (0,)

    @field_validator("symbols", "tail", mode="before")
    @classmethod
    def _parse_words(cls, value: object) -> object:
        return parse_word(value)


class FixedPointSpec(_Strict):
    kind: Literal["fixed-point"] = "fixed-point"
    values: List[FixedValue] = Field(..., min_length=1, max_length=2)


PointSpec = Annotated[
    Union[DesignedPointSpec, IidPointSpec, PeriodicPointSpec, WordPointSpec, FixedPointSpec],
    Field(discriminator="kind"),
]


class FamilySpec(_Strict):
    space: Optional[SpaceTag] = None
    max_word_length: Optional[int] = Field(None, ge=1)
    max_frequency: Optional[int] = Field(None, ge=1)


class OrbitSpec(_Strict):
    values: List[FixedValue] = Field(..., min_length=1, max_length=2)
    period: int = Field(..., ge=1)


class TargetSpec(_Strict):
    label: str = Field(..., min_length=1)
    kind: ReferenceKind
    cycle: Optional[Tuple[int, ...]] = None
    p: Optional[List[float]] = None
    orbit: Optional[OrbitSpec] = None

    @field_validator("cycle", mode="before")
    @classmethod
    def _parse_cycle(cls, value: object) -> object:
        return parse_word(value) if value is not None else None


class ExperimentConfig(_Strict):
    schema_version: Literal[1] = SCHEMA_VERSION
    system: SystemSpec
    point: PointSpec
    horizon: Optional[int] = Field(None, ge=0)
    family: FamilySpec = Field(default_factory=FamilySpec)
    targets: List[TargetSpec] = Field(..., min_length=1)
    n_values: List[int] = Field(..., min_length=1)
    m_horizon: int = Field(..., ge=0)
    stride: int = Field(1, ge=1)
    refine: bool = True
    epsilons: List[float] = Field(..., min_length=1)
    hull_radius: float = Field(0.02, gt=0)
    covering_k: int = Field(50, ge=1)
    classify_epsilon: Optional[float] = Field(None, gt=0)
    output_dir: str = "ergoscan-out"
    master_seed: int = Field(0, ge=0)
    record_timings: bool = False

    @field_validator("n_values")
    @classmethod
    def _positive_unique(cls, values: List[int]) -> List[int]:
        if any(n < 1 for n in values):
            raise ValueError("window lengths must be at least 1")
        if len(set(values)) != len(values):
            raise ValueError("window lengths must be distinct")
        return sorted(values)

    @field_validator("epsilons")
    @classmethod
    def _positive(cls, values: List[float]) -> List[float]:
        if any(e <= 0 for e in values):
            raise ValueError("epsilons must be positive")
        return values

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def derive_seed(master_seed: int, stream: int) -> int:
    """First 64-bit word of SeedSequence([master_seed, stream])."""
    state = np.random.SeedSequence([master_seed, stream]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def parse_fixed(value: FixedValue, field_path: str) -> int:
    if isinstance(value, RawFixed):
        if value.raw >= 1 << 64:
            raise ValidationFailed("raw fixed-point values must be below 2^64", field_path)
        return value.raw
    if value == "golden":
        return golden_angle()
    try:
        return to_fixed(Fraction(value))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationFailed(f"cannot read {value!r} as a number", field_path) from exc


def _error_path(loc: Tuple[Union[int, str], ...]) -> str:
    return ".".join(str(part) for part in loc)


def parse_config_text(raw: str) -> dict:
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseFailed(exc.msg, exc.lineno, exc.colno) from exc
    if not isinstance(data, dict):
        raise ParseFailed("config must be a JSON object", 1, 1)
    return data


def validate_config(raw: Union[str, dict]) -> ExperimentConfig:
    """Parse, default and cross-validate a config document."""
    data = parse_config_text(raw) if isinstance(raw, str) else raw
    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ValidationFailed(first["msg"], _error_path(first["loc"])) from exc
    return _complete(config)


def _system_defaults(system: SystemSpec) -> SystemSpec:
    updates: dict = {}
    if system.kind == SystemKind.FULL_SHIFT:
        updates["alphabet_size"] = system.alphabet_size or 2
    elif system.kind == SystemKind.SFT:
        if system.adjacency is None:
            raise ValidationFailed("sft systems need an adjacency matrix", "system.adjacency")
        updates["alphabet_size"] = len(system.adjacency)
    elif system.kind == SystemKind.DOUBLING_MAP:
        if system.alphabet_size not in (None, 2):
            raise ValidationFailed("the doubling map has a binary alphabet", "system.alphabet_size")
        updates["alphabet_size"] = 2
    elif system.kind == SystemKind.CAT_MAP:
        updates["matrix"] = system.matrix or [[2, 1], [1, 1]]
    else:
        updates["angle"] = system.angle if system.angle is not None else "golden"
    return system.model_copy(update=updates)


def _default_space(kind: SystemKind) -> SpaceTag:
    if kind == SystemKind.CAT_MAP:
        return SpaceTag.TORUS
    if kind == SystemKind.ROTATION:
        return SpaceTag.CIRCLE
    return SpaceTag.SHIFT


def _family_defaults(family: FamilySpec, system: SystemSpec) -> FamilySpec:
    space = family.space or _default_space(system.kind)
    if space == SpaceTag.SHIFT:
        if system.kind in (SystemKind.CAT_MAP, SystemKind.ROTATION):
            raise ValidationFailed(f"{system.kind.value} has no shift space", "family.space")
        length = family.max_word_length
        if length is None:
            alphabet = system.alphabet_size or 2
            length = DEFAULT_MAX_WORD_LENGTH
            while length > 1 and sum(alphabet**k for k in range(1, length + 1)) > MAX_ENTRIES:
                length -= 1
        return FamilySpec(space=space, max_word_length=length)
    if space == SpaceTag.CIRCLE and system.kind not in (SystemKind.ROTATION, SystemKind.DOUBLING_MAP):
        raise ValidationFailed(f"{system.kind.value} does not act on the circle", "family.space")
    if space == SpaceTag.TORUS and system.kind != SystemKind.CAT_MAP:
        raise ValidationFailed(f"{system.kind.value} does not act on the torus", "family.space")
    return FamilySpec(space=space, max_frequency=family.max_frequency or DEFAULT_MAX_FREQUENCY[space])


def _point_defaults(config: ExperimentConfig) -> PointSpec:
    point = config.point
    if isinstance(point, IidPointSpec) and point.seed is None:
        return point.model_copy(update={"seed": derive_seed(config.master_seed, 0)})
    if isinstance(point, DesignedPointSpec):
        blocks = [
            b if b.seed is not None else b.model_copy(update={"seed": derive_seed(config.master_seed, 1 + j)})
            for j, b in enumerate(point.blocks)
        ]
        alphabet = config.system.alphabet_size or 2
        length = point.max_word_length
        if length is None:
            length = default_word_length(alphabet)
        check_word_length(alphabet, length)
        return point.model_copy(update={"blocks": blocks, "max_word_length": length})
    return point


def lookahead(config: ExperimentConfig) -> int:
    """Symbols read past the last atom of a window."""
    family = config.family
    if family.space == SpaceTag.SHIFT:
        return (family.max_word_length or 1) - 1
    if config.system.kind == SystemKind.DOUBLING_MAP:
        return 63
    return 0


def required_horizon(config: ExperimentConfig) -> int:
    """Last sequence index a run reads: every window, its lookahead, and one more step for defects."""
    return config.m_horizon + max(config.n_values) + lookahead(config)


def _complete(config: ExperimentConfig) -> ExperimentConfig:
    system = _system_defaults(config.system)
    config = config.model_copy(update={"system": system})
    family = _family_defaults(config.family, system)
    config = config.model_copy(update={"family": family, "point": _point_defaults(config)})

    symbolic = system.kind in (SystemKind.FULL_SHIFT, SystemKind.SFT, SystemKind.DOUBLING_MAP)
    if symbolic == isinstance(config.point, FixedPointSpec):
        raise ValidationFailed(
            f"point kind {config.point.kind!r} does not fit a {system.kind.value} system", "point.kind"
        )

    needed = required_horizon(config)
    horizon = config.horizon
    if symbolic:
        if horizon is None:
            horizon = needed
        elif horizon < needed:
            raise ValidationFailed(
                f"m_horizon {config.m_horizon} with n_values up to {max(config.n_values)} reads index "
                f"{needed}, beyond horizon {horizon}",
                "n_values/horizon",
            )
    labels = [t.label for t in config.targets]
    if len(set(labels)) != len(labels):
        raise ValidationFailed("target labels must be unique", "targets")

    classify_epsilon = config.classify_epsilon if config.classify_epsilon is not None else max(config.epsilons)
    if classify_epsilon <= 2.0 / config.covering_k:
        raise ValidationFailed(
            f"classify_epsilon {classify_epsilon} must exceed 2/covering_k = {2.0 / config.covering_k:.3g}",
            "classify_epsilon",
        )
    config = config.model_copy(update={"horizon": horizon, "classify_epsilon": classify_epsilon})
    # building everything once surfaces admissibility, target and separation errors now
    materialize(config)
    return config


@dataclass
class Experiment:
    system: DynamicalSystem
    state: State
    family: TestFamily
    targets: List[ReferenceMeasure]
    point_id: str
    designed: Optional[DesignedPoint] = None


def build_system(spec: SystemSpec) -> DynamicalSystem:
    if spec.kind == SystemKind.FULL_SHIFT:
        return FullShift(spec.alphabet_size or 2)
    if spec.kind == SystemKind.SFT:
        assert spec.adjacency is not None
        return SubshiftOfFiniteType(spec.adjacency)
    if spec.kind == SystemKind.DOUBLING_MAP:
        return DoublingMap()
    if spec.kind == SystemKind.CAT_MAP:
        return CatMap(spec.matrix or [[2, 1], [1, 1]])
    return Rotation(parse_fixed(spec.angle if spec.angle is not None else "golden", "system.angle"))


def build_target(spec: TargetSpec, system: DynamicalSystem, index: int) -> ReferenceMeasure:
    path = f"targets.{index}"
    alphabet = getattr(system, "alphabet_size", 2)
    if spec.kind == ReferenceKind.BERNOULLI:
        if spec.p is None:
            raise ValidationFailed("bernoulli targets need p", f"{path}.p")
        if not system.symbolic:
            raise ValidationFailed("bernoulli targets live on shift spaces", f"{path}.kind")
        return ReferenceMeasure.bernoulli(tuple(spec.p), label=spec.label)
    if spec.kind == ReferenceKind.LEBESGUE:
        if system.kind == SystemKind.CAT_MAP:
            return ReferenceMeasure.lebesgue(2, label=spec.label)
        if system.kind in (SystemKind.ROTATION, SystemKind.DOUBLING_MAP):
            return ReferenceMeasure.lebesgue(1, label=spec.label)
        raise ValidationFailed(f"{system.system_id} carries no Lebesgue measure", f"{path}.kind")
    if spec.cycle is not None:
        if not system.symbolic:
            raise ValidationFailed("periodic words describe shift orbits", f"{path}.cycle")
        if isinstance(system, SubshiftOfFiniteType):
            word = spec.cycle + spec.cycle[:1]
            violation = first_violation(word, system.adjacency)
            if violation is not None:
                raise ValidationFailed(
                    f"transition {violation[1]}->{violation[2]} of cycle is not allowed", f"{path}.cycle"
                )
        if max(spec.cycle) >= alphabet:
            raise ValidationFailed("cycle uses symbols outside the alphabet", f"{path}.cycle")
        return ReferenceMeasure.periodic_word(spec.cycle, alphabet, label=spec.label)
    if spec.orbit is not None:
        point = TorusPoint(tuple(parse_fixed(v, f"{path}.orbit.values") for v in spec.orbit.values))
        return ReferenceMeasure.periodic_orbit(system, point, spec.orbit.period, label=spec.label)
    raise ValidationFailed("periodic-atomic targets need a cycle or an orbit", path)


def typical_block(spec: BlockSpec, target: ReferenceMeasure, index: int) -> TypicalBlock:
    if target.kind == ReferenceKind.BERNOULLI:
        return TypicalBlock(label=target.label, length=spec.length, p=target.p, seed=spec.seed)
    if target.kind == ReferenceKind.PERIODIC_ATOMIC and target.cycle is not None:
        return TypicalBlock(label=target.label, length=spec.length, cycle=target.cycle)
    raise ValidationFailed(
        f"no typical block can be written for target {target.label!r}", f"point.blocks.{index}.target"
    )


def _check_word(system: DynamicalSystem, sequence: SymbolSequence, stop: int) -> None:
    if isinstance(system, SubshiftOfFiniteType):
        system.ensure_admissible(sequence, min(stop, sequence.horizon + 1))


def materialize(config: ExperimentConfig) -> Experiment:
    """Build the system, point, family and targets a validated config describes."""
    system = build_system(config.system)
    targets = [build_target(t, system, i) for i, t in enumerate(config.targets)]
    family_spec = config.family
    assert family_spec.space is not None
    family = build_family(
        family_spec.space,
        max_word_length=family_spec.max_word_length,
        max_frequency=family_spec.max_frequency,
        alphabet_size=getattr(system, "alphabet_size", 2),
    )
    try:
        family.validate_separation(targets)
    except ValidationFailed as exc:
        raise ValidationFailed(exc.message, "targets") from exc

    horizon = config.horizon if config.horizon is not None else required_horizon(config)
    point = config.point
    designed: Optional[DesignedPoint] = None
    state: State
    if isinstance(point, FixedPointSpec):
        coords = tuple(parse_fixed(v, f"point.values.{i}") for i, v in enumerate(point.values))
        state = TorusPoint(coords)
        point_id = "fixed:" + ",".join(str(c) for c in coords)
    else:
        alphabet = getattr(system, "alphabet_size", 2)
        if isinstance(point, DesignedPointSpec):
            by_label = {t.label: t for t in targets}
            blocks = []
            for j, b in enumerate(point.blocks):
                if b.target not in by_label:
                    raise ValidationFailed(f"unknown target {b.target!r}", f"point.blocks.{j}.target")
                blocks.append(typical_block(b, by_label[b.target], j))
            adjacency = system.adjacency.tolist() if isinstance(system, SubshiftOfFiniteType) else None
            try:
                designed = design_transitive_point(
                    alphabet,
                    blocks,
                    order=point.order,
                    max_word_length=point.max_word_length,
                    adjacency=adjacency,
                    horizon=horizon,
                )
            except ValidationFailed as exc:
                raise ValidationFailed(exc.message, exc.field_path or "point") from exc
            sequence = designed.sequence
            point_id = f"designed:{len(blocks)}-blocks"
        elif isinstance(point, IidPointSpec):
            assert point.seed is not None
            if len(point.p) != alphabet:
                raise ValidationFailed("p must have one entry per symbol", "point.p")
            try:
                sequence = SymbolSequence.iid(tuple(point.p), point.seed, horizon)
            except ValueError as exc:
                raise ValidationFailed(str(exc), "point.p") from exc
            point_id = f"iid:{point.seed}"
        else:
            if isinstance(point, PeriodicPointSpec):
                generator = EventuallyPeriodic(preamble=point.preamble, cycle=point.cycle)
            else:
                generator = EventuallyPeriodic(preamble=point.symbols, cycle=point.tail)
            try:
                sequence = SymbolSequence(alphabet, generator, horizon)
            except ValidationFailed as exc:
                raise ValidationFailed(exc.message, "point") from exc
            point_id = "word:" + "".join(map(str, generator.preamble)) + "(" + "".join(map(str, generator.cycle)) + ")"
        span = IID_ADMISSIBILITY_PREFIX
        if isinstance(sequence.generator, EventuallyPeriodic):
            span = len(sequence.generator.preamble) + 2 * len(sequence.generator.cycle)
        _check_word(system, sequence, span)
        state = SymbolicState(sequence, 0)
    system.validate_state(state)
    return Experiment(system, state, family, targets, point_id, designed)
