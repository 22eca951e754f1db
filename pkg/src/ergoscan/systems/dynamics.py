from __future__ import annotations

import threading
import weakref
from abc import ABC, abstractmethod
from functools import cached_property
from typing import List, Sequence, Tuple, Union

import numpy as np

from ..errors import ValidationFailed
from ..models.schemas import SpaceTag, SystemKind
from .fixedpoint import MASK, Matrix2, TorusPoint, mat_apply, mat_mul, mat_pow
from .sequences import SymbolicState, SymbolSequence
from .transitivity import first_violation, transition_graph, validate_adjacency

State = Union[SymbolicState, TorusPoint]

ORBIT_BLOCK = 1024


class DynamicalSystem(ABC):
    kind: SystemKind
    space: SpaceTag
    symbolic: bool = False

    @property
    @abstractmethod
    def system_id(self) -> str: ...

    @abstractmethod
    def validate_state(self, x: State) -> None: ...

    @abstractmethod
    def iterate(self, x: State, k: int) -> State:
        """f^k(x)."""

    def step(self, x: State) -> State:
        return self.iterate(x, 1)

    def supports(self, space: SpaceTag) -> bool:
        return space == self.space

    def orbit(self, x: State, m: int, n: int) -> List[State]:
        """The states f^m(x), ..., f^(m+n-1)(x)."""
        current = self.iterate(x, m)
        states = [current]
        for _ in range(n - 1):
            current = self.step(current)
            states.append(current)
        return states

    def fixed_orbit(self, x: State, start: int, count: int) -> np.ndarray:
        """Fixed-point coordinates of f^start(x), ..., as a (count, d) uint64 array."""
        raise ValidationFailed(f"{self.system_id} has no circle or torus coordinates", "system")

    def cursor(self, x: State) -> "OrbitCursor":
        self.validate_state(x)
        return OrbitCursor(self, x)

    def describe(self) -> dict:
        return {"kind": self.kind.value, "id": self.system_id}

    def __repr__(self) -> str:
        return self.system_id


class FullShift(DynamicalSystem):
    kind = SystemKind.FULL_SHIFT
    space = SpaceTag.SHIFT
    symbolic = True

    def __init__(self, alphabet_size: int = 2) -> None:
        if alphabet_size < 2:
            raise ValidationFailed("alphabet size must be at least 2", "alphabet_size")
        self.alphabet_size = alphabet_size

    @property
    def system_id(self) -> str:
        return f"full-shift({self.alphabet_size})"

    def validate_state(self, x: State) -> None:
        if not isinstance(x, SymbolicState):
            raise ValidationFailed(f"{self.system_id} acts on symbol sequences", "point")
        if x.sequence.alphabet_size != self.alphabet_size:
            raise ValidationFailed(
                f"sequence alphabet {x.sequence.alphabet_size} does not match {self.alphabet_size}",
                "point",
            )

    def iterate(self, x: State, k: int) -> State:
        if k < 0:
            raise ValidationFailed("iteration count must be non-negative", "k")
        self.validate_state(x)
        assert isinstance(x, SymbolicState)
        return x.shifted(k)

    def orbit(self, x: State, m: int, n: int) -> List[State]:
        first = self.iterate(x, m + n - 1)
        assert isinstance(first, SymbolicState)
        base = first.offset - (n - 1)
        return [SymbolicState(first.sequence, base + j) for j in range(n)]

    def symbol_block(self, x: SymbolicState, start: int, stop: int) -> np.ndarray:
        """Symbols of x at positions [start, stop), relative to x."""
        self.validate_state(x)
        return x.symbols(start, stop - start)


class SubshiftOfFiniteType(FullShift):
    kind = SystemKind.SFT

    def __init__(self, adjacency: Sequence[Sequence[int]]) -> None:
        self.adjacency = validate_adjacency(adjacency)
        super().__init__(self.adjacency.shape[0])
        self.graph = transition_graph(adjacency)
        self._checked: "weakref.WeakKeyDictionary[SymbolSequence, int]" = weakref.WeakKeyDictionary()
        self._lock = threading.Lock()

    @property
    def system_id(self) -> str:
        rows = "/".join("".join(str(int(v)) for v in row) for row in self.adjacency)
        return f"sft({rows})"

    def describe(self) -> dict:
        return {**super().describe(), "adjacency": self.adjacency.tolist()}

    def ensure_admissible(self, sequence: SymbolSequence, stop: int) -> None:
        """Check every transition among symbols [0, stop) not checked before."""
        with self._lock:
            done = self._checked.get(sequence, 0)
        if stop <= done:
            return
        start = max(done - 1, 0)
        block = sequence.block(start, stop)
        violation = first_violation(block, self.adjacency)
        if violation is not None:
            pos, a, b = violation
            raise ValidationFailed(
                f"transition {a}->{b} at index {start + pos} is not allowed by the adjacency matrix",
                "point",
            )
        with self._lock:
            self._checked[sequence] = max(self._checked.get(sequence, 0), stop)

    def iterate(self, x: State, k: int) -> State:
        shifted = super().iterate(x, k)
        assert isinstance(shifted, SymbolicState)
        self.ensure_admissible(shifted.sequence, min(shifted.offset + 2, shifted.sequence.horizon + 1))
        return shifted

    def symbol_block(self, x: SymbolicState, start: int, stop: int) -> np.ndarray:
        self.ensure_admissible(x.sequence, x.offset + stop)
        return super().symbol_block(x, start, stop)


class DoublingMap(FullShift):
    """x -> 2x mod 1, carried by binary expansions so that long orbits stay exact."""

    kind = SystemKind.DOUBLING_MAP

    def __init__(self) -> None:
        super().__init__(2)

    @property
    def system_id(self) -> str:
        return "doubling-map"

    def supports(self, space: SpaceTag) -> bool:
        return space in (SpaceTag.SHIFT, SpaceTag.CIRCLE)

    def fixed_orbit(self, x: State, start: int, count: int) -> np.ndarray:
        self.validate_state(x)
        assert isinstance(x, SymbolicState)
        symbols = x.symbols(start, count + 63).astype(np.uint64)
        values = np.zeros(count, dtype=np.uint64)
        for i in range(64):
            values = (values << np.uint64(1)) | symbols[i : i + count]
        return values.reshape(count, 1)


class CatMap(DynamicalSystem):
    kind = SystemKind.CAT_MAP
    space = SpaceTag.TORUS

    def __init__(self, matrix: Sequence[Sequence[int]] = ((2, 1), (1, 1))) -> None:
        if len(matrix) != 2 or any(len(row) != 2 for row in matrix):
            raise ValidationFailed("cat map matrix must be 2x2", "matrix")
        (a, b), (c, d) = matrix
        if abs(a * d - b * c) != 1:
            raise ValidationFailed("cat map matrix must have determinant +1 or -1", "matrix")
        self.matrix: Matrix2 = ((int(a), int(b)), (int(c), int(d)))

    @property
    def system_id(self) -> str:
        (a, b), (c, d) = self.matrix
        return f"cat-map({a},{b},{c},{d})"

    def describe(self) -> dict:
        return {**super().describe(), "matrix": [list(row) for row in self.matrix]}

    def validate_state(self, x: State) -> None:
        if not isinstance(x, TorusPoint) or x.dimension != 2:
            raise ValidationFailed("cat maps act on 2-dimensional torus points", "point")

    def iterate(self, x: State, k: int) -> State:
        if k < 0:
            raise ValidationFailed("iteration count must be non-negative", "k")
        self.validate_state(x)
        assert isinstance(x, TorusPoint)
        return TorusPoint(mat_apply(mat_pow(self.matrix, k), (x.coords[0], x.coords[1])))

    def step(self, x: State) -> State:
        assert isinstance(x, TorusPoint)
        return TorusPoint(mat_apply(self.matrix, (x.coords[0], x.coords[1])))

    @cached_property
    def _powers(self) -> np.ndarray:
        powers = np.empty((ORBIT_BLOCK, 2, 2), dtype=np.uint64)
        current: Matrix2 = ((1, 0), (0, 1))
        reduced = mat_pow(self.matrix, 1)
        for r in range(ORBIT_BLOCK):
            powers[r] = current
            current = mat_mul(reduced, current)
        return powers

    def fixed_orbit(self, x: State, start: int, count: int) -> np.ndarray:
        base = self.iterate(x, start)
        assert isinstance(base, TorusPoint)
        coords: Tuple[int, int] = (base.coords[0], base.coords[1])
        jump = mat_pow(self.matrix, ORBIT_BLOCK)
        powers = self._powers
        out = np.empty((count, 2), dtype=np.uint64)
        for q in range(0, count, ORBIT_BLOCK):
            r = min(ORBIT_BLOCK, count - q)
            u, v = np.uint64(coords[0]), np.uint64(coords[1])
            out[q : q + r, 0] = powers[:r, 0, 0] * u + powers[:r, 0, 1] * v
            out[q : q + r, 1] = powers[:r, 1, 0] * u + powers[:r, 1, 1] * v
            coords = mat_apply(jump, coords)
        return out


class Rotation(DynamicalSystem):
    """x -> x + angle mod 1 with a fixed-point angle (a rational rotation of denominator 2^64)."""

    kind = SystemKind.ROTATION
    space = SpaceTag.CIRCLE

    def __init__(self, angle: int) -> None:
        self.angle = angle & MASK

    @property
    def system_id(self) -> str:
        return f"rotation({self.angle:#018x})"

    def describe(self) -> dict:
        return {**super().describe(), "angle": self.angle}

    def validate_state(self, x: State) -> None:
        if not isinstance(x, TorusPoint) or x.dimension != 1:
            raise ValidationFailed("rotations act on circle points", "point")

    def iterate(self, x: State, k: int) -> State:
        if k < 0:
            raise ValidationFailed("iteration count must be non-negative", "k")
        self.validate_state(x)
        assert isinstance(x, TorusPoint)
        return TorusPoint(((x.coords[0] + k * self.angle) & MASK,))

    def fixed_orbit(self, x: State, start: int, count: int) -> np.ndarray:
        self.validate_state(x)
        assert isinstance(x, TorusPoint)
        base = np.uint64((x.coords[0] + start * self.angle) & MASK)
        steps = np.arange(count, dtype=np.uint64) * np.uint64(self.angle)
        return (steps + base).reshape(count, 1)


class OrbitCursor:
    """Single-owner walker along one orbit."""

    def __init__(self, system: DynamicalSystem, state: State) -> None:
        self.system = system
        self.state = state
        self.step_index = 0

    def advance(self, k: int = 1) -> State:
        self.state = self.system.iterate(self.state, k)
        self.step_index += k
        return self.state


def iterate(system: DynamicalSystem, x: State, k: int) -> State:
    return system.iterate(x, k)
