from __future__ import annotations

from typing import List, Sequence, Tuple

from ..errors import ValidationFailed
from ..measures.reference import ReferenceMeasure
from ..models.schemas import CoveringNet
from ..weakstar.family import TestFamily
from ..weakstar.metric import distance


def build_covering(
    catalog: Sequence[ReferenceMeasure], k: int, family: TestFamily
) -> CoveringNet:
    """Greedy 1/k-net whose centers are catalog members, taken in catalog order."""
    if not catalog:
        raise ValidationFailed("catalog must be nonempty", "targets")
    if k < 1:
        raise ValidationFailed("covering k must be at least 1", "covering_k")
    radius = 1.0 / k
    centers: List[ReferenceMeasure] = []
    assignments: List[Tuple[str, str]] = []
    for mu in catalog:
        home = next((c for c in centers if distance(mu, c, family).value <= radius), None)
        if home is None:
            centers.append(mu)
            home = mu
        assignments.append((mu.label, home.label))
    return CoveringNet(k=k, radius=radius, centers=[c.label for c in centers], assignments=assignments)
