"""The closed catalog of test functions: cylinder indicators, Fourier modes, constants."""

from __future__ import annotations

import math
from typing import Annotated, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..errors import ValidationFailed
from ..models.schemas import SpaceTag, parse_word
from ..systems.fixedpoint import MASK, TorusPoint, phase_to_radians
from ..systems.sequences import SymbolicState


class CylinderIndicator(BaseModel):
    """1 if the symbols at positions [offset, offset + len(word)) spell `word`, else 0."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["cylinder"] = "cylinder"
    word: Tuple[int, ...] = Field(..., min_length=1)
    offset: int = Field(0, ge=0)

    @field_validator("word", mode="before")
    @classmethod
    def _parse_word(cls, value: object) -> object:
        return parse_word(value)

    @property
    def space(self) -> Optional[SpaceTag]:
        return SpaceTag.SHIFT

    @property
    def sup_bound(self) -> float:
        return 1.0

    @property
    def oscillation(self) -> float:
        return 1.0

    @property
    def lipschitz(self) -> Optional[float]:
        return None

    @property
    def reach(self) -> int:
        """Number of symbols read, counted from the atom."""
        return self.offset + len(self.word)

    @property
    def code(self) -> str:
        word = "".join(str(s) for s in self.word) if max(self.word) < 10 else ",".join(map(str, self.word))
        return f"[{word}]" if self.offset == 0 else f"[{word}]@{self.offset}"

    def evaluate(self, x: object) -> float:
        if not isinstance(x, SymbolicState):
            raise ValidationFailed(f"cylinder indicator {self.code} needs a symbolic state", "observable")
        return 1.0 if x.word(len(self.word), self.offset) == self.word else 0.0


class FourierMode(BaseModel):
    """cos or sin of 2*pi*<k, x> on the circle (one frequency) or the 2-torus (two)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["fourier"] = "fourier"
    frequency: Tuple[int, ...] = Field(..., min_length=1, max_length=2)
    part: Literal["cos", "sin"] = "cos"

    @property
    def space(self) -> Optional[SpaceTag]:
        return SpaceTag.CIRCLE if len(self.frequency) == 1 else SpaceTag.TORUS

    @property
    def dimension(self) -> int:
        return len(self.frequency)

    @property
    def is_constant(self) -> bool:
        return not any(self.frequency)

    @property
    def sup_bound(self) -> float:
        return 1.0

    @property
    def oscillation(self) -> float:
        return 0.0 if self.is_constant else 2.0

    @property
    def lipschitz(self) -> Optional[float]:
        """Lipschitz constant for the max-coordinate circle distance."""
        return 2.0 * math.pi * sum(abs(k) for k in self.frequency)

    @property
    def code(self) -> str:
        return f"{self.part}({','.join(str(k) for k in self.frequency)})"

    def phase(self, coords: Tuple[int, ...]) -> int:
        return sum(k * u for k, u in zip(self.frequency, coords)) & MASK

    def evaluate(self, x: object) -> float:
        coords = fixed_coords(x, self.dimension)
        angle = phase_to_radians(self.phase(coords))
        return math.cos(angle) if self.part == "cos" else math.sin(angle)


class ConstantObservable(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["constant"] = "constant"
    value: float = 1.0

    @property
    def space(self) -> Optional[SpaceTag]:
        return None

    @property
    def sup_bound(self) -> float:
        return abs(self.value)

    @property
    def oscillation(self) -> float:
        return 0.0

    @property
    def lipschitz(self) -> Optional[float]:
        return 0.0

    @property
    def code(self) -> str:
        return f"const({self.value!r})"

    def evaluate(self, x: object) -> float:
        return self.value


Observable = Annotated[
    Union[CylinderIndicator, FourierMode, ConstantObservable], Field(discriminator="kind")
]


class ObservableCombination(BaseModel):
    """A finite linear combination of catalog observables."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["combination"] = "combination"
    terms: Tuple[Tuple[float, Observable], ...] = Field(..., min_length=1)

    @property
    def space(self) -> Optional[SpaceTag]:
        spaces = {phi.space for _, phi in self.terms} - {None}
        if len(spaces) > 1:
            raise ValidationFailed("combination mixes observables of different spaces", "observable")
        return spaces.pop() if spaces else None

    @property
    def sup_bound(self) -> float:
        return math.fsum(abs(c) * phi.sup_bound for c, phi in self.terms)

    @property
    def code(self) -> str:
        return " + ".join(f"{c!r}*{phi.code}" for c, phi in self.terms)

    def evaluate(self, x: object) -> float:
        return math.fsum(c * phi.evaluate(x) for c, phi in self.terms)


AnyObservable = Union[CylinderIndicator, FourierMode, ConstantObservable, ObservableCombination]


def fixed_coords(x: object, dimension: int) -> Tuple[int, ...]:
    """Fixed-point coordinates of a circle/torus point, or of a binary sequence read as a dyadic."""
    if isinstance(x, TorusPoint):
        if x.dimension != dimension:
            raise ValidationFailed(
                f"observable on dimension {dimension} applied to a {x.dimension}-dimensional point",
                "observable",
            )
        return x.coords
    if isinstance(x, SymbolicState) and dimension == 1:
        return (x.dyadic(64),)
    raise ValidationFailed("Fourier modes need circle or torus coordinates", "observable")


def combine(*terms: Tuple[float, AnyObservable]) -> ObservableCombination:
    flat: List[Tuple[float, Observable]] = []
    for coefficient, phi in terms:
        if isinstance(phi, ObservableCombination):
            flat.extend((coefficient * c, inner) for c, inner in phi.terms)
        else:
            flat.append((coefficient, phi))
    return ObservableCombination(terms=tuple(flat))
