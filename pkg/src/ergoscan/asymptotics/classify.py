from __future__ import annotations

from typing import Dict, List, Sequence

import numpy as np

from ..errors import ValidationFailed
from ..measures.reference import ReferenceMeasure
from ..models.schemas import Classification, CoveringNet, DistanceValue, HitSet, Hull
from ..systems.dynamics import DynamicalSystem, State
from ..weakstar.family import TestFamily
from .scanner import scan_windows
from .windows import WindowIntegrator


def classify(
    hull: Hull,
    catalog: Sequence[ReferenceMeasure],
    covering: CoveringNet,
    epsilon: float,
) -> Classification:
    """Convergent with one hull center; extremely oscillating when every covering center
    has a hull center within epsilon; oscillating otherwise."""
    if not hull.is_complete or not hull.centers:
        raise ValidationFailed("hull is not complete", "hull")
    if epsilon <= 2 * covering.radius:
        raise ValidationFailed(
            f"epsilon {epsilon} must exceed twice the covering radius {covering.radius:.3g}",
            "classify_epsilon",
        )
    labels = {mu.label for mu in catalog}
    missing = [c for c in covering.centers if c not in labels]
    if missing:
        raise ValidationFailed(f"covering centers {missing} are not in the catalog", "covering")
    if len(hull.centers) == 1:
        return Classification.CONVERGENT
    if len(catalog) > 1 and all(_reached(hull, label, epsilon) for label in covering.centers):
        return Classification.EXTREMELY_OSCILLATING
    return Classification.OSCILLATING


def _reached(hull: Hull, label: str, epsilon: float) -> bool:
    for center in hull.centers:
        try:
            d = center.distance_to(label)
        except KeyError:
            raise ValidationFailed(
                f"hull centers carry no distance to {label!r}", "hull"
            ) from None
        if d.upper < epsilon:
            return True
    return False


def forward_statistics(
    system: DynamicalSystem,
    x: State,
    targets: Sequence[ReferenceMeasure],
    family: TestFamily,
    n_values: Sequence[int],
) -> Dict[str, List[DistanceValue]]:
    """Distances of the forward averages sigma_{0,n}(x) to each target along the n grid."""
    integrator = WindowIntegrator(system, x, family)
    out: Dict[str, List[DistanceValue]] = {t.label: [] for t in targets}
    for n in sorted(n_values):
        result = scan_windows(integrator, targets, n, np.zeros(1, dtype=np.int64))
        for record_label, value in result[0].distances:
            out[record_label].append(value)
    return out


def witness_table(hitsets: Sequence[HitSet]) -> List[dict]:
    """For each target and epsilon, the grid scales N having some hit with n >= N."""
    rows = []
    for hits in hitsets:
        hit_ns = {run.n for run in hits.runs}
        scales = [N for N in hits.n_values if any(n >= N for n in hit_ns)]
        rows.append({"target": hits.target, "epsilon": hits.epsilon, "scales": scales})
    return rows
