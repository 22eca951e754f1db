from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import Callable, Iterator, List, Optional, Sequence, TextIO, Tuple, Union, overload

import numpy as np

from ..errors import ValidationFailed
from ..measures.reference import ReferenceMeasure
from ..models.schemas import DistanceValue, HitRun, HitSet, ScanRecord
from ..systems.dynamics import DynamicalSystem, State
from ..weakstar.family import TestFamily
from ..weakstar.metric import integral_vector
from .windows import WindowIntegrator, iter_window_chunks, window_starts

logger = logging.getLogger(__name__)

ChunkObserver = Callable[[int, np.ndarray, np.ndarray], None]


class ScanResult(Sequence[ScanRecord]):
    """Scan records held column-wise: one row per (n, m), one distance column per target."""

    def __init__(
        self,
        labels: Sequence[str],
        tail_bound: float,
        m: np.ndarray,
        n: np.ndarray,
        values: np.ndarray,
    ) -> None:
        self.labels = tuple(labels)
        self.tail_bound = tail_bound
        self.m = np.asarray(m, dtype=np.int64)
        self.n = np.asarray(n, dtype=np.int64)
        self.values = np.asarray(values, dtype=np.float64).reshape(len(self.m), len(self.labels))

    @classmethod
    def empty(cls, labels: Sequence[str], tail_bound: float) -> "ScanResult":
        return cls(labels, tail_bound, np.zeros(0), np.zeros(0), np.zeros((0, len(labels))))

    @classmethod
    def from_records(cls, records: Sequence[ScanRecord]) -> "ScanResult":
        if not records:
            raise ValidationFailed("no scan records", "records")
        labels = [label for label, _ in records[0].distances]
        tail = records[0].distances[0][1].tail_bound if labels else 0.0
        values = [[r.distance_to(label).value for label in labels] for r in records]
        return cls(labels, tail, [r.m for r in records], [r.n for r in records], values)

    def __len__(self) -> int:
        return len(self.m)

    @overload
    def __getitem__(self, index: int) -> ScanRecord: ...

    @overload
    def __getitem__(self, index: slice) -> List[ScanRecord]: ...

    def __getitem__(self, index: Union[int, slice]) -> Union[ScanRecord, List[ScanRecord]]:
        if isinstance(index, slice):
            return [self[i] for i in range(*index.indices(len(self)))]
        row = self.values[index]
        return ScanRecord(
            m=int(self.m[index]),
            n=int(self.n[index]),
            distances=[
                (label, DistanceValue(value=float(v), tail_bound=self.tail_bound))
                for label, v in zip(self.labels, row)
            ],
        )

    def __iter__(self) -> Iterator[ScanRecord]:
        for i in range(len(self)):
            yield self[i]

    def column(self, label: str) -> np.ndarray:
        try:
            return self.values[:, self.labels.index(label)]
        except ValueError:
            raise ValidationFailed(f"no scanned target named {label!r}", "target") from None

    @property
    def n_values(self) -> List[int]:
        return sorted(set(self.n.tolist()))

    def merge(self, other: "ScanResult") -> "ScanResult":
        """Union ordered by (n, m); on duplicates the row of self wins."""
        if other.labels != self.labels:
            raise ValidationFailed("cannot merge scans of different targets", "targets")
        m = np.concatenate([self.m, other.m])
        n = np.concatenate([self.n, other.n])
        values = np.concatenate([self.values, other.values])
        order = np.lexsort((np.arange(len(m)), m, n))
        m, n, values = m[order], n[order], values[order]
        keep = np.ones(len(m), dtype=bool)
        keep[1:] = (m[1:] != m[:-1]) | (n[1:] != n[:-1])
        return ScanResult(self.labels, self.tail_bound, m[keep], n[keep], values[keep])

    def write_rows(self, handle: TextIO) -> None:
        writer = csv.writer(handle)
        header = ["m", "n"]
        for label in self.labels:
            header += [label, f"{label}_tail"]
        writer.writerow(header)
        tail = repr(self.tail_bound)
        for m, n, row in zip(self.m.tolist(), self.n.tolist(), self.values.tolist()):
            line = [m, n]
            for v in row:
                line += [repr(v), tail]
            writer.writerow(line)

    def write_csv(self, path: Path | str) -> Path:
        path = Path(path)
        with path.open("w", newline="") as handle:
            self.write_rows(handle)
        return path


def target_distances(
    integrals: np.ndarray, references: Sequence[np.ndarray], family: TestFamily
) -> np.ndarray:
    """(windows, targets) weighted gaps, accumulated per entry in family order like distance()."""
    weights = family.weights
    out = np.empty((len(integrals), len(references)), dtype=np.float64)
    for t, ref in enumerate(references):
        acc = np.zeros(len(integrals), dtype=np.float64)
        for k in range(family.depth):
            acc += weights[k] * np.abs(integrals[:, k] - ref[k])
        out[:, t] = acc
    return out


def scan_windows(
    integrator: WindowIntegrator,
    targets: Sequence[ReferenceMeasure],
    n: int,
    ms: np.ndarray,
    *,
    threads: int = 1,
    observer: Optional[ChunkObserver] = None,
) -> ScanResult:
    family = integrator.family
    labels = [t.label for t in targets]
    if len(set(labels)) != len(labels):
        raise ValidationFailed("target labels must be unique", "targets")
    if len(ms) == 0:
        return ScanResult.empty(labels, family.tail_bound)
    integrator.check_horizon(int(ms[-1]), n)
    references = [integral_vector(t, family) for t in targets]
    parts: List[np.ndarray] = []
    for chunk, integrals in iter_window_chunks(integrator, n, ms, threads):
        parts.append(target_distances(integrals, references, family))
        if observer is not None:
            observer(n, chunk, integrals)
    values = np.concatenate(parts) if parts else np.zeros((0, len(labels)))
    return ScanResult(labels, family.tail_bound, ms, np.full(len(ms), n), values)


def scan(
    system: DynamicalSystem,
    x: State,
    targets: Sequence[ReferenceMeasure],
    n: int,
    m_range: int | Tuple[int, int],
    family: TestFamily,
    stride: int = 1,
    *,
    threads: int = 1,
    observer: Optional[ChunkObserver] = None,
) -> ScanResult:
    """Distances from sigma_{m,n}(x) to each target for m = 0, stride, ... <= M.

    sigma_{m,n}(x) = sigma_{0,n}(f^m(x)), so the scan is one pass along a single orbit."""
    if n < 1:
        raise ValidationFailed("window length n must be at least 1", "n")
    integrator = WindowIntegrator(system, x, family)
    ms = window_starts(m_range, stride)
    logger.debug("scanning %s: n=%d, %d windows", system.system_id, n, len(ms))
    return scan_windows(integrator, targets, n, ms, threads=threads, observer=observer)


def near_windows(
    result: ScanResult, epsilon: float, stride: int, m_max: int
) -> np.ndarray:
    """Stride-1 starts within stride - 1 of every coarse record with some distance < 2 * epsilon."""
    if stride <= 1 or len(result) == 0:
        return np.zeros(0, dtype=np.int64)
    near = result.m[(result.values < 2 * epsilon).any(axis=1)]
    if len(near) == 0:
        return np.zeros(0, dtype=np.int64)
    offsets = np.arange(-(stride - 1), stride, dtype=np.int64)
    ms = np.unique((near[:, None] + offsets[None, :]).ravel())
    ms = ms[(ms >= 0) & (ms <= m_max)]
    return np.setdiff1d(ms, result.m)


def refine(
    integrator: WindowIntegrator,
    targets: Sequence[ReferenceMeasure],
    coarse: ScanResult,
    epsilon: float,
    stride: int,
    m_max: int,
    *,
    threads: int = 1,
) -> ScanResult:
    """Re-scan at stride 1 around near-hits and merge; one-step slides move a window by <= 2/n."""
    merged = coarse
    for n in coarse.n_values:
        rows = coarse.n == n
        part = ScanResult(coarse.labels, coarse.tail_bound, coarse.m[rows], coarse.n[rows], coarse.values[rows])
        ms = near_windows(part, epsilon, stride, m_max)
        if len(ms):
            logger.debug("refining n=%d around %d starts", n, len(ms))
            merged = merged.merge(scan_windows(integrator, targets, n, ms, threads=threads))
    return merged


def _runs(ms: List[int]) -> List[Tuple[int, int, int]]:
    runs: List[Tuple[int, int, int]] = []
    i = 0
    while i < len(ms):
        if i + 1 == len(ms):
            runs.append((ms[i], ms[i] + 1, 1))
            break
        step = ms[i + 1] - ms[i]
        j = i + 1
        while j + 1 < len(ms) and ms[j + 1] - ms[j] == step:
            j += 1
        runs.append((ms[i], ms[j] + step, step))
        i = j + 1
    return runs


def find_hits(
    records: Union[ScanResult, Sequence[ScanRecord]], target: str, epsilon: float
) -> HitSet:
    """Records whose distance plus tail bound is below epsilon."""
    result = records if isinstance(records, ScanResult) else ScanResult.from_records(records)
    if len(result) == 0:
        raise ValidationFailed("no scan records", "records")
    column = result.column(target)
    mask = column + result.tail_bound < epsilon
    runs: List[HitRun] = []
    for n in result.n_values:
        rows = mask & (result.n == n)
        ms = sorted(result.m[rows].tolist())
        runs.extend(HitRun(n=n, start=a, stop=b, stride=s) for a, b, s in _runs(ms))
    return HitSet(
        target=target,
        epsilon=epsilon,
        m_max=int(result.m.max()),
        n_values=result.n_values,
        count=int(mask.sum()),
        runs=runs,
    )


def best_distance(result: ScanResult, target: str) -> Optional[DistanceValue]:
    if len(result) == 0:
        return None
    return DistanceValue(value=float(result.column(target).min()), tail_bound=result.tail_bound)
