"""Construction of points with dense orbits that also visit chosen statistics.

The emitted word is, level by level: typical block number `level` (if any), then
every word of length `level + 1` in length-lexicographic order. For subshifts of
finite type only admissible words are listed and shortest connecting paths are
inserted at junctions that the adjacency matrix forbids. After the last level the
sequence repeats the concatenation of all words of maximal length.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..errors import ValidationFailed
from ..models.schemas import (
    BlockPlacement,
    BlockProgram,
    BlockSegment,
    DenseBlockOrder,
    EventuallyPeriodic,
)
from .sequences import UNBOUNDED_HORIZON, SymbolicState, SymbolSequence
from .transitivity import (
    admissible_words,
    check_transitive,
    connector,
    first_violation,
    transition_graph,
    validate_adjacency,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_WORD_LENGTH = 12
# symbols the word listing may take, counted over the full shift
PROGRAM_BUDGET = 1 << 20


class TypicalBlock(BaseModel):
    """A long word typical for one reference measure: a repeated cycle or a seeded iid draw."""

    model_config = ConfigDict(frozen=True)

    label: str
    length: int = Field(..., ge=1)
    cycle: Optional[Tuple[int, ...]] = None
    p: Optional[Tuple[float, ...]] = None
    seed: Optional[int] = None

    @model_validator(mode="after")
    def _one_source(self) -> "TypicalBlock":
        if (self.cycle is None) == (self.p is None):
            raise ValueError("a typical block needs exactly one of cycle or p")
        if self.p is not None and self.seed is None:
            raise ValueError("iid typical blocks need a seed")
        return self

    def symbols(self) -> np.ndarray:
        if self.cycle is not None:
            return np.resize(np.asarray(self.cycle, dtype=np.uint8), self.length)
        assert self.p is not None and self.seed is not None
        return SymbolSequence.iid(self.p, self.seed).block(0, self.length)


@dataclass
class DesignedPoint:
    sequence: SymbolSequence
    blocks: List[BlockPlacement]
    max_word_length: int
    order: DenseBlockOrder = DenseBlockOrder.LENGTH_LEX
    dense_lengths: List[Tuple[int, int, int]] = field(default_factory=list)

    @property
    def state(self) -> SymbolicState:
        return SymbolicState(self.sequence, 0)

    def block_for(self, label: str) -> BlockPlacement:
        for block in self.blocks:
            if block.target == label:
                return block
        raise KeyError(label)

    def metadata(self) -> dict:
        return {
            "alphabet_size": self.sequence.alphabet_size,
            "order": self.order.value,
            "max_word_length": self.max_word_length,
            "program_length": self.sequence.generator.length,
            "blocks": [b.model_dump() for b in self.blocks],
            "dense_regions": [
                {"word_length": length, "start": start, "stop": stop}
                for length, start, stop in self.dense_lengths
            ],
        }


class _ProgramWriter:
    def __init__(self, graph: Optional[nx.DiGraph]) -> None:
        self.graph = graph
        self.segments: List[BlockSegment] = []
        self.pending: List[int] = []
        self.position = 0
        self.last: Optional[int] = None

    def _bridge(self, first: int) -> None:
        if self.graph is not None and self.last is not None:
            bridge = connector(self.graph, self.last, first)
            self.pending.extend(bridge)
            self.position += len(bridge)

    def word(self, word: Sequence[int]) -> None:
        self._bridge(word[0])
        self.pending.extend(word)
        self.position += len(word)
        self.last = word[-1]

    def block(self, symbols: np.ndarray) -> int:
        self._bridge(int(symbols[0]))
        self.flush()
        start = self.position
        self.segments.append(BlockSegment(word=tuple(int(s) for s in symbols)))
        self.position += len(symbols)
        self.last = int(symbols[-1])
        return start

    def flush(self) -> None:
        if self.pending:
            self.segments.append(BlockSegment(word=tuple(self.pending)))
            self.pending = []


def _words(length: int, alphabet_size: int, adjacency: Optional[np.ndarray]) -> List[Tuple[int, ...]]:
    if adjacency is not None:
        return admissible_words(length, adjacency)
    return list(itertools.product(range(alphabet_size), repeat=length))


def dense_symbols(alphabet_size: int, max_word_length: int) -> int:
    """Symbols of the full-shift word listing up to max_word_length."""
    return sum(length * alphabet_size**length for length in range(1, max_word_length + 1))


def default_word_length(alphabet_size: int) -> int:
    """Longest listing within the program budget, at most DEFAULT_MAX_WORD_LENGTH."""
    length = DEFAULT_MAX_WORD_LENGTH
    while length > 1 and dense_symbols(alphabet_size, length) > PROGRAM_BUDGET:
        length -= 1
    return length


def check_word_length(alphabet_size: int, max_word_length: int) -> None:
    if max_word_length < 1:
        raise ValidationFailed("max_word_length must be at least 1", "point.max_word_length")
    if dense_symbols(alphabet_size, max_word_length) > PROGRAM_BUDGET:
        raise ValidationFailed(
            f"listing all words up to length {max_word_length} over {alphabet_size} symbols "
            f"exceeds {PROGRAM_BUDGET} symbols; use at most {default_word_length(alphabet_size)}",
            "point.max_word_length",
        )


def _check_block(block: TypicalBlock, symbols: np.ndarray, adjacency: Optional[np.ndarray], alphabet_size: int) -> None:
    if int(symbols.max()) >= alphabet_size:
        raise ValidationFailed(
            f"typical block {block.label!r} uses symbols outside the alphabet", "point.blocks"
        )
    if adjacency is None:
        return
    violation = first_violation(symbols, adjacency)
    if violation is not None:
        pos, a, b = violation
        raise ValidationFailed(
            f"typical block {block.label!r} has forbidden transition {a}->{b} at offset {pos}",
            "point.blocks",
        )


def design_transitive_point(
    alphabet_size: int,
    typical_blocks: Sequence[TypicalBlock] = (),
    *,
    order: DenseBlockOrder = DenseBlockOrder.LENGTH_LEX,
    max_word_length: Optional[int] = None,
    adjacency: Optional[Sequence[Sequence[int]]] = None,
    horizon: int = UNBOUNDED_HORIZON,
) -> DesignedPoint:
    matrix: Optional[np.ndarray] = None
    graph: Optional[nx.DiGraph] = None
    if adjacency is not None:
        matrix = validate_adjacency(adjacency)
        if not check_transitive(matrix):
            raise ValidationFailed("the subshift is not transitive; no dense orbit exists", "system.adjacency")
        graph = transition_graph(matrix)
        alphabet_size = matrix.shape[0]

    if max_word_length is None:
        max_word_length = default_word_length(alphabet_size)
    check_word_length(alphabet_size, max_word_length)

    writer = _ProgramWriter(graph)
    placements: List[BlockPlacement] = []
    dense: List[Tuple[int, int, int]] = []
    for level in range(max(max_word_length, len(typical_blocks))):
        if level < len(typical_blocks):
            block = typical_blocks[level]
            symbols = block.symbols()
            _check_block(block, symbols, matrix, alphabet_size)
            start = writer.block(symbols)
            placements.append(BlockPlacement(target=block.label, start=start, length=block.length))
        if level < max_word_length:
            region_start = writer.position
            for word in _words(level + 1, alphabet_size, matrix):
                writer.word(word)
            dense.append((level + 1, region_start, writer.position))
    writer.flush()

    cycle: List[int] = []
    tail_writer = _ProgramWriter(graph)
    tail_writer.last = writer.last
    for word in _words(max_word_length, alphabet_size, matrix):
        tail_writer.word(word)
    cycle = tail_writer.pending
    if graph is not None and cycle:
        cycle = cycle + connector(graph, cycle[-1], cycle[0])

    program = BlockProgram(segments=tuple(writer.segments), tail=EventuallyPeriodic(cycle=tuple(cycle)))
    sequence = SymbolSequence(alphabet_size, program, horizon)
    logger.debug(
        "designed point: %d program symbols, %d typical blocks", program.length, len(placements)
    )
    return DesignedPoint(
        sequence=sequence,
        blocks=placements,
        max_word_length=max_word_length,
        order=order,
        dense_lengths=dense,
    )
