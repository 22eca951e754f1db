"""Test families fixing the weak* metric dist(mu, nu) = sum_k w_k |int phi_k dmu - int phi_k dnu|.

w_k = 2^-k divided by the oscillation of phi_k when it exceeds 1, so every term and
the whole distance stay below 1 (Fourier modes have oscillation 2).

Enumeration rules, all deterministic:

* shift: cylinder indicators [w] at offset 0 for words of length 1..max_word_length,
  by length, then lexicographically (the base-alphabet code of w);
* circle: cos(k), sin(k) for k = 1..max_frequency;
* torus: shells r = max(|k1|, |k2|) = 1..max_frequency; inside a shell the frequency
  vectors with k1 > 0, or k1 = 0 and k2 > 0, in lexicographic order, each as cos then sin.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import ValidationFailed
from ..measures.observables import CylinderIndicator, FourierMode, Observable
from ..models.schemas import SpaceTag
from .metric import distance

MAX_ENTRIES = 1000

DEFAULT_MAX_WORD_LENGTH = 8
DEFAULT_MAX_FREQUENCY = {SpaceTag.CIRCLE: 16, SpaceTag.TORUS: 4}


@dataclass(frozen=True)
class FamilyEntry:
    observable: Observable
    weight: float


@dataclass(frozen=True)
class TestFamily:
    __test__ = False

    space: SpaceTag
    entries: Tuple[FamilyEntry, ...]
    alphabet_size: int = 2
    max_word_length: Optional[int] = None
    max_frequency: Optional[int] = None
    _integrals: Dict[object, np.ndarray] = field(default_factory=dict, compare=False, repr=False)

    @property
    def depth(self) -> int:
        return len(self.entries)

    @property
    def observables(self) -> List[Observable]:
        return [e.observable for e in self.entries]

    @property
    def weights(self) -> np.ndarray:
        return np.array([e.weight for e in self.entries], dtype=np.float64)

    @property
    def tail_bound(self) -> float:
        """Worst contribution of the dropped entries k > K, each normalized to oscillation <= 1."""
        return math.ldexp(1.0, -self.depth)

    @property
    def reach(self) -> int:
        """Symbols beyond an atom read by the family (cylinder families only)."""
        return max((getattr(e.observable, "reach", 1) for e in self.entries), default=1)

    def descriptor(self) -> dict:
        out: dict = {
            "space": self.space.value,
            "depth": self.depth,
            "tail_bound": self.tail_bound,
            "weights": "2^-k / max(1, oscillation)",
        }
        if self.space == SpaceTag.SHIFT:
            out["order"] = "length-then-lex cylinders at offset 0"
            out["alphabet_size"] = self.alphabet_size
            out["max_word_length"] = self.max_word_length
        else:
            out["order"] = "max-frequency shells, lexicographic, cos then sin"
            out["max_frequency"] = self.max_frequency
        out["codes"] = [e.observable.code for e in self.entries]
        return out

    def validate_separation(self, catalog: Sequence[object]) -> None:
        """Raise unless distinct catalog measures are more than tail_bound apart."""
        for mu, nu in itertools.combinations(catalog, 2):
            d = distance(mu, nu, self)
            if d.value <= self.tail_bound:
                raise ValidationFailed(
                    f"family does not separate {getattr(mu, 'label', mu)!s} from "
                    f"{getattr(nu, 'label', nu)!s} (distance {d.value:.3g})",
                    "family",
                )


def _weighted(observables: Sequence[Observable]) -> Tuple[FamilyEntry, ...]:
    if len(observables) > MAX_ENTRIES:
        raise ValidationFailed(
            f"family would have {len(observables)} entries; at most {MAX_ENTRIES} are supported",
            "family",
        )
    return tuple(
        FamilyEntry(observable=phi, weight=math.ldexp(1.0, -(k + 1)) / max(1.0, phi.oscillation))
        for k, phi in enumerate(observables)
    )


def torus_frequencies(max_frequency: int) -> List[Tuple[int, int]]:
    out: List[Tuple[int, int]] = []
    for r in range(1, max_frequency + 1):
        shell = [
            (k1, k2)
            for k1 in range(0, r + 1)
            for k2 in range(-r, r + 1)
            if max(abs(k1), abs(k2)) == r and (k1 > 0 or k2 > 0)
        ]
        out.extend(shell)
    return out


def build_family(
    space: SpaceTag | str,
    *,
    max_word_length: Optional[int] = None,
    max_frequency: Optional[int] = None,
    alphabet_size: int = 2,
    catalog: Optional[Sequence[object]] = None,
) -> TestFamily:
    try:
        space = SpaceTag(space)
    except ValueError as exc:
        raise ValidationFailed(f"unsupported space {space!r}", "family.space") from exc

    observables: List[Observable] = []
    if space == SpaceTag.SHIFT:
        depth = DEFAULT_MAX_WORD_LENGTH if max_word_length is None else max_word_length
        if depth < 1:
            raise ValidationFailed("max_word_length must be at least 1", "family.max_word_length")
        if alphabet_size < 2:
            raise ValidationFailed("alphabet size must be at least 2", "family.alphabet_size")
        for length in range(1, depth + 1):
            if len(observables) + alphabet_size**length > MAX_ENTRIES:
                raise ValidationFailed(
                    f"words up to length {depth} over {alphabet_size} symbols exceed "
                    f"{MAX_ENTRIES} entries",
                    "family.max_word_length",
                )
            for word in itertools.product(range(alphabet_size), repeat=length):
                observables.append(CylinderIndicator(word=word))
        family = TestFamily(space, _weighted(observables), alphabet_size, max_word_length=depth)
    else:
        top = DEFAULT_MAX_FREQUENCY[space] if max_frequency is None else max_frequency
        if top < 1:
            raise ValidationFailed("max_frequency must be at least 1", "family.max_frequency")
        frequencies: List[Tuple[int, ...]]
        if space == SpaceTag.CIRCLE:
            frequencies = [(k,) for k in range(1, top + 1)]
        else:
            frequencies = list(torus_frequencies(top))
        for k in frequencies:
            observables.append(FourierMode(frequency=k, part="cos"))
            observables.append(FourierMode(frequency=k, part="sin"))
        family = TestFamily(space, _weighted(observables), max_frequency=top)

    if catalog is not None:
        family.validate_separation(catalog)
    return family
