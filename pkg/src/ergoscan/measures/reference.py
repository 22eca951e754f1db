from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

from ..errors import ValidationFailed
from ..models.schemas import EventuallyPeriodic, ReferenceKind, SpaceTag, parse_word
from ..systems.dynamics import DynamicalSystem, State
from ..systems.fixedpoint import TorusPoint
from ..systems.sequences import SymbolicState, SymbolSequence


@dataclass(frozen=True)
class ReferenceMeasure:
    """An ergodic measure with closed-form integrals against the observable catalog."""

    kind: ReferenceKind
    label: str
    space: SpaceTag
    atoms: Tuple[State, ...] = ()
    p: Tuple[float, ...] = ()
    dimension: int = 1
    cycle: Optional[Tuple[int, ...]] = field(default=None, compare=False)

    @classmethod
    def periodic_word(
        cls, cycle: Tuple[int, ...] | str, alphabet_size: int = 2, label: Optional[str] = None
    ) -> "ReferenceMeasure":
        """Uniform measure on the shift orbit of the periodic sequence cycle^infinity."""
        word = tuple(parse_word(cycle))  # type: ignore[arg-type]
        if not word:
            raise ValidationFailed("periodic word must be nonempty", "cycle")
        sequence = SymbolSequence.periodic(word, alphabet_size)
        atoms = tuple(SymbolicState(sequence, j) for j in range(len(word)))
        name = label or f"orbit({''.join(map(str, word))})"
        return cls(
            ReferenceKind.PERIODIC_ATOMIC, name, SpaceTag.SHIFT, atoms=atoms, cycle=word
        )

    @classmethod
    def dirac(cls, symbol: int = 0, alphabet_size: int = 2, label: Optional[str] = None) -> "ReferenceMeasure":
        return cls.periodic_word((symbol,), alphabet_size, label or f"delta({symbol})")

    @classmethod
    def periodic_orbit(
        cls, system: DynamicalSystem, x: State, period: int, label: Optional[str] = None
    ) -> "ReferenceMeasure":
        """Uniform measure on {x, f(x), ..., f^(period-1)(x)}, after checking f^period(x) = x."""
        if period < 1:
            raise ValidationFailed("period must be at least 1", "period")
        system.validate_state(x)
        if not _returns(system, x, period):
            raise ValidationFailed(f"point does not return to itself after {period} steps", "orbit")
        atoms = tuple(system.orbit(x, 0, period))
        space = system.space
        if isinstance(x, TorusPoint):
            space = SpaceTag.CIRCLE if x.dimension == 1 else SpaceTag.TORUS
        return cls(
            ReferenceKind.PERIODIC_ATOMIC,
            label or f"orbit[{period}]@{system.system_id}",
            space,
            atoms=atoms,
            dimension=x.dimension if isinstance(x, TorusPoint) else 1,
        )

    @classmethod
    def bernoulli(cls, p: Tuple[float, ...], label: Optional[str] = None) -> "ReferenceMeasure":
        p = tuple(float(q) for q in p)
        if len(p) < 2 or any(q < 0 for q in p) or abs(sum(p) - 1.0) > 1e-12:
            raise ValidationFailed("p must be a probability vector over at least 2 symbols", "p")
        name = label or "bernoulli(" + ",".join(f"{q:g}" for q in p) + ")"
        return cls(ReferenceKind.BERNOULLI, name, SpaceTag.SHIFT, p=p)

    @classmethod
    def lebesgue(cls, dimension: int = 1, label: Optional[str] = None) -> "ReferenceMeasure":
        if dimension not in (1, 2):
            raise ValidationFailed("lebesgue measure is defined on the circle or the 2-torus", "dimension")
        space = SpaceTag.CIRCLE if dimension == 1 else SpaceTag.TORUS
        return cls(ReferenceKind.LEBESGUE, label or ("lebesgue" if dimension == 1 else "lebesgue2"), space, dimension=dimension)

    @property
    def alphabet_size(self) -> Optional[int]:
        if self.kind == ReferenceKind.BERNOULLI:
            return len(self.p)
        if self.atoms and isinstance(self.atoms[0], SymbolicState):
            return self.atoms[0].sequence.alphabet_size
        return None

    def describe(self) -> dict:
        out: dict = {"label": self.label, "kind": self.kind.value, "space": self.space.value}
        if self.kind == ReferenceKind.BERNOULLI:
            out["p"] = list(self.p)
        elif self.kind == ReferenceKind.LEBESGUE:
            out["dimension"] = self.dimension
        elif self.cycle is not None:
            out["cycle"] = list(self.cycle)
        else:
            out["orbit"] = [list(a.coords) for a in self.atoms if isinstance(a, TorusPoint)]
        return out


def _returns(system: DynamicalSystem, x: State, period: int) -> bool:
    if isinstance(x, TorusPoint):
        return system.iterate(x, period) == x
    assert isinstance(x, SymbolicState)
    gen = x.sequence.generator
    if not isinstance(gen, EventuallyPeriodic):
        raise ValidationFailed("symbolic periodic orbits need an eventually periodic sequence", "orbit")
    # x_{i+period} = x_i on [0, preamble + cycle) forces it everywhere
    span = len(gen.preamble) + len(gen.cycle)
    return x.word(span) == x.word(span, period)
