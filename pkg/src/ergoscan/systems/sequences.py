from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Tuple

import numpy as np

from ..errors import HorizonExceeded, ValidationFailed
from ..models.schemas import BlockProgram, EventuallyPeriodic, SeededIid, SequenceGenerator

IID_CHUNK = 1 << 16

# far beyond any scan; periodic and block-program sequences never run out
UNBOUNDED_HORIZON = (1 << 62) - 1


class SymbolSequence:
    """A one-sided infinite symbol sequence produced by a deterministic program.

    Symbols are produced on demand. Indices past `horizon` are refused with
    `HorizonExceeded`; nothing is wrapped or invented.
    """

    def __init__(
        self,
        alphabet_size: int,
        generator: SequenceGenerator,
        horizon: int = UNBOUNDED_HORIZON,
    ) -> None:
        if not 2 <= alphabet_size <= 256:
            raise ValidationFailed("alphabet size must lie in [2, 256]", "alphabet_size")
        if horizon < 0:
            raise ValidationFailed("horizon must be non-negative", "horizon")
        self.alphabet_size = alphabet_size
        self.generator = generator
        self.horizon = horizon
        self._chunks: Dict[int, np.ndarray] = {}
        self._lock = threading.Lock()
        self._check_alphabet()

    @classmethod
    def periodic(
        cls, cycle: Tuple[int, ...] | str, alphabet_size: int = 2, preamble: Tuple[int, ...] | str = ()
    ) -> "SymbolSequence":
        return cls(alphabet_size, EventuallyPeriodic(preamble=preamble, cycle=cycle))

    @classmethod
    def iid(
        cls, p: Tuple[float, ...], seed: int, horizon: int = UNBOUNDED_HORIZON
    ) -> "SymbolSequence":
        return cls(len(p), SeededIid(p=tuple(p), seed=seed), horizon)

    def _check_alphabet(self) -> None:
        words: list[Tuple[int, ...]] = []
        gen = self.generator
        if isinstance(gen, EventuallyPeriodic):
            words = [gen.preamble, gen.cycle]
        elif isinstance(gen, BlockProgram):
            words = [s.word for s in gen.segments] + [gen.tail.preamble, gen.tail.cycle]
        elif len(gen.p) != self.alphabet_size:
            raise ValidationFailed("distribution length must equal the alphabet size", "p")
        for word in words:
            for symbol in word:
                if not 0 <= symbol < self.alphabet_size:
                    raise ValidationFailed(
                        f"symbol {symbol} outside alphabet [0, {self.alphabet_size})", "generator"
                    )

    def check_range(self, start: int, stop: int) -> None:
        if start < 0:
            raise ValidationFailed(f"negative index {start}", "index")
        if stop - 1 > self.horizon:
            raise HorizonExceeded(stop - 1, self.horizon)

    def symbol(self, index: int) -> int:
        return int(self.block(index, index + 1)[0])

    def word(self, start: int, length: int) -> Tuple[int, ...]:
        return tuple(int(s) for s in self.block(start, start + length))

    def block(self, start: int, stop: int) -> np.ndarray:
        """Symbols [start, stop) as a uint8 array."""
        self.check_range(start, stop)
        if stop <= start:
            return np.zeros(0, dtype=np.uint8)
        gen = self.generator
        if isinstance(gen, EventuallyPeriodic):
            return _periodic_block(self._preamble, self._cycle, start, stop)
        if isinstance(gen, BlockProgram):
            return self._program_block(start, stop)
        return self._iid_block(start, stop)

    @cached_property
    def _preamble(self) -> np.ndarray:
        gen = self.generator
        tail = gen.tail if isinstance(gen, BlockProgram) else gen
        return np.asarray(tail.preamble, dtype=np.uint8)

    @cached_property
    def _cycle(self) -> np.ndarray:
        gen = self.generator
        tail = gen.tail if isinstance(gen, BlockProgram) else gen
        return np.asarray(tail.cycle, dtype=np.uint8)

    @cached_property
    def _program(self) -> np.ndarray:
        assert isinstance(self.generator, BlockProgram)
        parts = [
            np.tile(np.asarray(s.word, dtype=np.uint8), s.repeat) for s in self.generator.segments
        ]
        return np.concatenate(parts) if parts else np.zeros(0, dtype=np.uint8)

    def _program_block(self, start: int, stop: int) -> np.ndarray:
        program = self._program
        length = len(program)
        if stop <= length:
            return program[start:stop].copy()
        head = program[start:length] if start < length else np.zeros(0, dtype=np.uint8)
        tail = _periodic_block(
            self._preamble, self._cycle, max(start, length) - length, stop - length
        )
        return np.concatenate([head, tail])

    def _chunk(self, index: int) -> np.ndarray:
        chunk = self._chunks.get(index)
        if chunk is None:
            gen = self.generator
            assert isinstance(gen, SeededIid)
            rng = np.random.default_rng(np.random.SeedSequence([gen.seed, index]))
            chunk = rng.choice(self.alphabet_size, size=IID_CHUNK, p=np.asarray(gen.p)).astype(
                np.uint8
            )
            with self._lock:
                self._chunks.setdefault(index, chunk)
        return chunk

    def _iid_block(self, start: int, stop: int) -> np.ndarray:
        first, last = start // IID_CHUNK, (stop - 1) // IID_CHUNK
        parts = [self._chunk(c) for c in range(first, last + 1)]
        joined = parts[0] if len(parts) == 1 else np.concatenate(parts)
        offset = first * IID_CHUNK
        return joined[start - offset : stop - offset].copy()

    def describe(self) -> dict:
        return {
            "alphabet_size": self.alphabet_size,
            "horizon": self.horizon,
            "generator": self.generator.model_dump(mode="json"),
        }

    def __repr__(self) -> str:
        return f"SymbolSequence({self.generator.kind}, alphabet={self.alphabet_size}, horizon={self.horizon})"


def _periodic_block(preamble: np.ndarray, cycle: np.ndarray, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    lp = len(preamble)
    out = np.empty(len(idx), dtype=np.uint8)
    in_pre = idx < lp
    if in_pre.any():
        out[in_pre] = preamble[idx[in_pre]]
    rest = ~in_pre
    out[rest] = cycle[(idx[rest] - lp) % len(cycle)]
    return out


@dataclass(frozen=True)
class SymbolicState:
    """The point sigma^offset(x) of a shift space, x given by `sequence`."""

    sequence: SymbolSequence
    offset: int = 0

    def shifted(self, k: int) -> "SymbolicState":
        if self.offset + k > self.sequence.horizon:
            raise HorizonExceeded(self.offset + k, self.sequence.horizon)
        return SymbolicState(self.sequence, self.offset + k)

    def symbols(self, start: int, length: int) -> np.ndarray:
        return self.sequence.block(self.offset + start, self.offset + start + length)

    def word(self, length: int, start: int = 0) -> Tuple[int, ...]:
        return self.sequence.word(self.offset + start, length)

    def dyadic(self, precision: int = 64) -> int:
        """First `precision` binary digits read as a fixed-point fraction (precision <= 64)."""
        if self.sequence.alphabet_size != 2:
            raise ValidationFailed("dyadic evaluation needs a binary alphabet", "alphabet_size")
        value = 0
        for s in self.symbols(0, precision):
            value = (value << 1) | int(s)
        return value << (64 - precision)
