"""Family integrals over many windows sigma_{m,n} at once.

Per-position observable values are integers (cylinder indicators are 0/1, Fourier values
are rounded to multiples of 2^-40), so window sums taken from int64 prefix sums are exact
and do not depend on how the m-range is cut into chunks. Fourier integrals carry at most
2^-41 of rounding error.
"""

from __future__ import annotations

import logging
from collections import deque
from concurrent.futures import Future, ThreadPoolExecutor
from typing import Deque, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import HorizonExceeded, ValidationFailed
from ..measures.observables import CylinderIndicator, FourierMode
from ..models.schemas import SpaceTag
from ..systems.dynamics import DynamicalSystem, FullShift, State
from ..systems.fixedpoint import MASK
from ..systems.sequences import SymbolicState
from ..weakstar.family import TestFamily

logger = logging.getLogger(__name__)

QUANT_BITS = 40
QUANT = float(1 << QUANT_BITS)

# int64 prefix sums of |value| <= 2^40 stay exact over 2^22 positions
FOURIER_SPAN = 1 << 22
CHUNK_CELLS = 1 << 22
MIN_CHUNK_POSITIONS = 1024
# beyond this many (position x observable) cells a single window is summed block by block
MAX_PREFIX_CELLS = 1 << 24
BLOCK_POSITIONS = 1 << 16

# doubling-map orbit points are read from 64 binary digits
DYADIC_LOOKAHEAD = 63


class WindowIntegrator:
    """Integrals of every family observable over windows of one orbit."""

    def __init__(self, system: DynamicalSystem, x: State, family: TestFamily) -> None:
        system.validate_state(x)
        self.system = system
        self.x = x
        self.family = family
        self.depth = family.depth
        observables = family.observables
        if family.space == SpaceTag.SHIFT:
            if not isinstance(system, FullShift):
                raise ValidationFailed(
                    f"cylinder families need a shift space; {system.system_id} has none", "family.space"
                )
            if not all(isinstance(phi, CylinderIndicator) for phi in observables):
                raise ValidationFailed("shift families contain cylinder indicators only", "family")
            self.cylinders = True
            self.base = system.alphabet_size
            self._groups = sorted({(phi.offset, len(phi.word)) for phi in observables})  # type: ignore[union-attr]
            self._entry_group: List[int] = []
            self._entry_code: List[int] = []
            for phi in observables:
                assert isinstance(phi, CylinderIndicator)
                self._entry_group.append(self._groups.index((phi.offset, len(phi.word))))
                code = 0
                for s in phi.word:
                    code = code * self.base + s
                # a word outside the alphabet never matches
                self._entry_code.append(code if max(phi.word) < self.base else -1)
            self.lookahead = family.reach - 1
        else:
            if not system.supports(family.space):
                raise ValidationFailed(
                    f"{system.system_id} does not act on the {family.space.value}", "family.space"
                )
            if not all(isinstance(phi, FourierMode) for phi in observables):
                raise ValidationFailed("circle and torus families contain Fourier modes only", "family")
            self.cylinders = False
            dimension = 1 if family.space == SpaceTag.CIRCLE else 2
            freqs = np.zeros((self.depth, dimension), dtype=np.uint64)
            for k, phi in enumerate(observables):
                assert isinstance(phi, FourierMode)
                for i, f in enumerate(phi.frequency):
                    freqs[k, i] = np.uint64(f & MASK)
            self._freqs = freqs
            self._is_sin = np.array([phi.part == "sin" for phi in observables])  # type: ignore[union-attr]
            self.lookahead = DYADIC_LOOKAHEAD if isinstance(x, SymbolicState) else 0

    @property
    def span_limit(self) -> int:
        limit = max(CHUNK_CELLS // max(self.depth, 1), MIN_CHUNK_POSITIONS)
        return limit if self.cylinders else min(limit, FOURIER_SPAN)

    def last_index(self, m_max: int, n: int) -> int:
        """Largest sequence index read by windows m <= m_max of length n."""
        return m_max + n - 1 + self.lookahead

    def check_horizon(self, m_max: int, n: int) -> None:
        if isinstance(self.x, SymbolicState):
            last = self.x.offset + self.last_index(m_max, n)
            if last > self.x.sequence.horizon:
                raise HorizonExceeded(last, self.x.sequence.horizon)

    def series(self, start: int, count: int) -> np.ndarray:
        """(count, K) integer values of each observable at f^start(x), ..., f^(start+count-1)(x)."""
        if self.cylinders:
            return self._cylinder_series(start, count)
        return self._fourier_series(start, count)

    def _cylinder_series(self, start: int, count: int) -> np.ndarray:
        assert isinstance(self.system, FullShift) and isinstance(self.x, SymbolicState)
        symbols = self.system.symbol_block(self.x, start, start + count + self.lookahead).astype(np.int64)
        codes = []
        for offset, length in self._groups:
            code = np.zeros(count, dtype=np.int64)
            for i in range(length):
                code = code * self.base + symbols[offset + i : offset + i + count]
            codes.append(code)
        out = np.empty((count, self.depth), dtype=np.int64)
        for k, (g, c) in enumerate(zip(self._entry_group, self._entry_code)):
            out[:, k] = codes[g] == c
        return out

    def _fourier_series(self, start: int, count: int) -> np.ndarray:
        coords = self.system.fixed_orbit(self.x, start, count)
        phase = np.zeros((count, self.depth), dtype=np.uint64)
        for i in range(coords.shape[1]):
            phase += coords[:, i : i + 1] * self._freqs[None, :, i]
        angle = 2.0 * np.pi * ((phase >> np.uint64(11)).astype(np.float64) * 2.0**-53)
        values = np.where(self._is_sin[None, :], np.sin(angle), np.cos(angle))
        return np.rint(values * QUANT).astype(np.int64)

    def _scale(self, sums: np.ndarray, n: int) -> np.ndarray:
        if self.cylinders:
            return sums / n
        return sums.astype(np.float64) / (n * QUANT)

    def integrals(self, n: int, ms: Sequence[int] | np.ndarray) -> np.ndarray:
        """(len(ms), K) integrals against sigma_{m,n}(x) for sorted window starts ms."""
        ms = np.asarray(ms, dtype=np.int64)
        if len(ms) == 0:
            return np.zeros((0, self.depth), dtype=np.float64)
        if n < 1:
            raise ValidationFailed("window length n must be at least 1", "n")
        first = int(ms[0])
        span = int(ms[-1]) - first + n
        if span * self.depth > MAX_PREFIX_CELLS or (not self.cylinders and span > FOURIER_SPAN):
            return np.stack([self._single(int(m), n) for m in ms])
        values = self.series(first, span)
        prefix = np.zeros((span + 1, self.depth), dtype=np.int64)
        np.cumsum(values, axis=0, out=prefix[1:])
        local = ms - first
        return self._scale(prefix[local + n] - prefix[local], n)

    def _single(self, m: int, n: int) -> np.ndarray:
        total = [0] * self.depth
        for block in range(m, m + n, BLOCK_POSITIONS):
            count = min(BLOCK_POSITIONS, m + n - block)
            sums = self.series(block, count).sum(axis=0, dtype=np.int64).tolist()
            total = [a + b for a, b in zip(total, sums)]
        if self.cylinders:
            return np.array([t / n for t in total], dtype=np.float64)
        return np.array([t / (n * QUANT) for t in total], dtype=np.float64)

    def split(self, ms: np.ndarray, n: int) -> List[np.ndarray]:
        """Cut sorted window starts into chunks whose position span fits the prefix budget.

        The cut depends only on ms, n and the family, never on the worker count."""
        chunks: List[np.ndarray] = []
        limit = self.span_limit
        i = 0
        while i < len(ms):
            reach = int(ms[i]) + max(limit - n, 0)
            j = max(int(np.searchsorted(ms, reach, side="right")), i + 1)
            chunks.append(ms[i:j])
            i = j
        return chunks


def iter_window_chunks(
    integrator: WindowIntegrator,
    n: int,
    ms: np.ndarray,
    threads: int = 1,
) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Yield (ms_chunk, integrals) in m order, computing up to 2 * threads chunks ahead."""
    chunks = integrator.split(np.asarray(ms, dtype=np.int64), n)
    logger.debug("n=%d: %d windows in %d chunks", n, len(ms), len(chunks))
    if threads <= 1 or len(chunks) <= 1:
        for chunk in chunks:
            yield chunk, integrator.integrals(n, chunk)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        pending: Deque[Tuple[np.ndarray, Future]] = deque()
        position = 0
        while position < len(chunks) or pending:
            while position < len(chunks) and len(pending) < 2 * threads:
                chunk = chunks[position]
                pending.append((chunk, pool.submit(integrator.integrals, n, chunk)))
                position += 1
            chunk, future = pending.popleft()
            yield chunk, future.result()


def window_starts(m_range: int | Tuple[int, int], stride: int = 1) -> np.ndarray:
    """m = lo, lo + stride, ... <= hi, for m_range = hi or (lo, hi), both ends inclusive."""
    if stride < 1:
        raise ValidationFailed("stride must be at least 1", "stride")
    lo, hi = (0, m_range) if isinstance(m_range, int) else m_range
    if lo < 0 or hi < lo:
        raise ValidationFailed(f"invalid m range [{lo}, {hi}]", "m_range")
    return np.arange(lo, hi + 1, stride, dtype=np.int64)


def optional_defect(integrator: Optional[WindowIntegrator], m: int, n: int) -> Optional[float]:
    """max_k |int phi_k d sigma_{m,n} - int phi_k d sigma_{m+1,n}|, or None past the horizon."""
    if integrator is None:
        return None
    try:
        pair = integrator.integrals(n, [m, m + 1])
    except HorizonExceeded:
        return None
    return float(np.max(np.abs(pair[0] - pair[1])))
