"""Greedy radius-nets over the window measures sigma_{m,n}(x), streamed in m order.

A window joins the first center (in creation order) within `radius`; otherwise it
becomes a new center. Chunks are processed so that the result is the same as feeding
windows one at a time.
"""

from __future__ import annotations

import logging
from typing import Iterable, List, Optional, Sequence

import numpy as np

from ..errors import ValidationFailed
from ..measures.empirical import EmpiricalMeasure
from ..measures.integration import Measure
from ..measures.reference import ReferenceMeasure
from ..models.schemas import DistanceValue, Hull, HullCenter
from ..weakstar.family import TestFamily
from ..weakstar.metric import integral_vector, weighted_gap
from .windows import WindowIntegrator, iter_window_chunks, optional_defect

logger = logging.getLogger(__name__)

# leading entries used for the cheap lower bound that prunes center comparisons
COARSE_ENTRIES = 20
# slack for rounding differences between the lower bound and the exact sum
BOUND_SLACK = 1e-12


class HullBuilder:
    def __init__(
        self,
        family: TestFamily,
        radius: float,
        n: int,
        targets: Sequence[ReferenceMeasure] = (),
    ) -> None:
        if radius <= 2 * family.tail_bound:
            raise ValidationFailed(
                f"hull radius {radius} must exceed twice the tail bound {family.tail_bound:.3g}",
                "hull_radius",
            )
        self.family = family
        self.radius = radius
        self.n = n
        self.targets = list(targets)
        self._weights = family.weights
        self._coarse = min(COARSE_ENTRIES, family.depth)
        self._centers: List[np.ndarray] = []
        self._center_m: List[int] = []
        self._counts: List[int] = []
        self._lo: Optional[np.ndarray] = None
        self._hi: Optional[np.ndarray] = None
        self.windows = 0

    def _exact(self, rows: np.ndarray, center: np.ndarray) -> np.ndarray:
        acc = np.zeros(len(rows), dtype=np.float64)
        for k in range(self.family.depth):
            acc += self._weights[k] * np.abs(rows[:, k] - center[k])
        return acc

    def _lower(self, rows: np.ndarray, center: np.ndarray) -> np.ndarray:
        c = self._coarse
        return np.abs(rows[:, :c] - center[:c]) @ self._weights[:c]

    def _claim(self, integrals: np.ndarray, unassigned: np.ndarray, j: int, assigned: np.ndarray) -> None:
        """Assign every still-unassigned row within radius of center j to it."""
        idx = np.flatnonzero(unassigned)
        if len(idx) == 0:
            return
        center = self._centers[j]
        rows = integrals[idx]
        candidates = self._lower(rows, center) <= self.radius + BOUND_SLACK
        if not candidates.any():
            return
        cand_idx = idx[candidates]
        close = self._exact(integrals[cand_idx], center) <= self.radius
        won = cand_idx[close]
        assigned[won] = j
        unassigned[won] = False
        self._counts[j] += len(won)

    def add(self, ms: np.ndarray, integrals: np.ndarray) -> None:
        if len(ms) == 0:
            return
        assigned = np.full(len(ms), -1, dtype=np.int64)
        unassigned = np.ones(len(ms), dtype=bool)
        for j in range(len(self._centers)):
            self._claim(integrals, unassigned, j, assigned)
        while unassigned.any():
            first = int(np.flatnonzero(unassigned)[0])
            self._centers.append(integrals[first].copy())
            self._center_m.append(int(ms[first]))
            self._counts.append(1)
            j = len(self._centers) - 1
            assigned[first] = j
            unassigned[first] = False
            self._claim(integrals, unassigned, j, assigned)
        self.windows += len(ms)
        lo, hi = integrals.min(axis=0), integrals.max(axis=0)
        self._lo = lo if self._lo is None else np.minimum(self._lo, lo)
        self._hi = hi if self._hi is None else np.maximum(self._hi, hi)

    def observe(self, n: int, ms: np.ndarray, integrals: np.ndarray) -> None:
        """Chunk observer hook for scan(); ignores other window lengths."""
        if n == self.n:
            self.add(ms, integrals)

    @property
    def center_count(self) -> int:
        return len(self._centers)

    def diameter(self) -> float:
        best = 0.0
        for j in range(len(self._centers) - 1):
            rest = np.stack(self._centers[j + 1 :])
            best = max(best, float(self._exact(rest, self._centers[j]).max()))
        return best

    def extent(self) -> float:
        if self._lo is None or self._hi is None:
            return 0.0
        return weighted_gap(self._hi, self._lo, self.family)

    def finish(self, integrator: Optional[WindowIntegrator] = None) -> Hull:
        references = [(t.label, integral_vector(t, self.family)) for t in self.targets]
        centers = []
        for vector, m, count in zip(self._centers, self._center_m, self._counts):
            centers.append(
                HullCenter(
                    m=m,
                    n=self.n,
                    window_count=count,
                    target_distances=[
                        (
                            label,
                            DistanceValue(
                                value=weighted_gap(vector, ref, self.family),
                                tail_bound=self.family.tail_bound,
                            ),
                        )
                        for label, ref in references
                    ],
                    invariance_defect=optional_defect(integrator, m, self.n),
                )
            )
        assigned = sum(self._counts)
        hull = Hull(
            n=self.n,
            radius=self.radius,
            tail_bound=self.family.tail_bound,
            windows=self.windows,
            coverage=assigned / self.windows if self.windows else 0.0,
            diameter=self.diameter(),
            extent=self.extent(),
            centers=centers,
        )
        logger.debug("hull n=%d: %d centers over %d windows", self.n, len(centers), self.windows)
        return hull


def estimate_hull(
    measures: Iterable[Measure],
    family: TestFamily,
    radius: float,
    targets: Sequence[ReferenceMeasure] = (),
) -> Hull:
    """Greedy net over explicitly given measures, in iteration order."""
    builder: Optional[HullBuilder] = None
    for index, mu in enumerate(measures):
        n = mu.n if isinstance(mu, EmpiricalMeasure) else 1
        m = mu.provenance.m if isinstance(mu, EmpiricalMeasure) else index
        if builder is None:
            builder = HullBuilder(family, radius, n, targets)
        builder.add(np.array([m], dtype=np.int64), integral_vector(mu, family)[None, :])
    if builder is None:
        return Hull(n=1, radius=radius, tail_bound=family.tail_bound)
    return builder.finish()


def estimate_orbit_hull(
    integrator: WindowIntegrator,
    n: int,
    ms: np.ndarray,
    radius: float,
    targets: Sequence[ReferenceMeasure] = (),
    *,
    threads: int = 1,
) -> Hull:
    """Greedy net over sigma_{m,n}(x) for the given window starts of one orbit."""
    builder = HullBuilder(integrator.family, radius, n, targets)
    integrator.check_horizon(int(ms[-1]), n)
    for chunk, integrals in iter_window_chunks(integrator, n, ms, threads):
        builder.add(chunk, integrals)
    return builder.finish(integrator)
