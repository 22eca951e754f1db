from __future__ import annotations

from typing import TYPE_CHECKING, Sequence, Union

import numpy as np

from ..errors import ValidationFailed
from ..measures.empirical import EmpiricalMeasure
from ..measures.integration import Measure, integrate
from ..measures.observables import CylinderIndicator
from ..models.schemas import DistanceValue
from ..systems.sequences import SymbolicState

if TYPE_CHECKING:
    from .family import TestFamily


def integral_vector(mu: Measure, family: "TestFamily") -> np.ndarray:
    """(int phi_1 dmu, ..., int phi_K dmu); reference integrals are cached on the family."""
    if isinstance(mu, EmpiricalMeasure):
        return _empirical_vector(mu, family)
    cached = family._integrals.get(mu)
    if cached is None:
        cached = np.array([integrate(mu, phi) for phi in family.observables], dtype=np.float64)
        cached.setflags(write=False)
        family._integrals[mu] = cached
    return cached


def _empirical_vector(mu: EmpiricalMeasure, family: "TestFamily") -> np.ndarray:
    observables = family.observables
    atom = mu.atoms[0]
    if not (
        isinstance(atom, SymbolicState)
        and all(isinstance(phi, CylinderIndicator) and phi.offset == 0 for phi in observables)
    ):
        return np.array([integrate(mu, phi) for phi in observables], dtype=np.float64)
    # one pass over the atoms: counts of every word code up to the family's reach
    base = atom.sequence.alphabet_size
    reach = family.reach
    words = np.array([a.symbols(0, reach) for a in mu.atoms], dtype=np.int64)  # type: ignore[union-attr]
    counts = {}
    code = np.zeros(len(words), dtype=np.int64)
    for length in range(1, reach + 1):
        code = code * base + words[:, length - 1]
        counts[length] = np.bincount(code, minlength=base**length)
    out = np.empty(len(observables), dtype=np.float64)
    for k, phi in enumerate(observables):
        assert isinstance(phi, CylinderIndicator)
        if max(phi.word) >= base:
            out[k] = 0.0
            continue
        c = 0
        for s in phi.word:
            c = c * base + s
        out[k] = int(counts[len(phi.word)][c]) / mu.n
    return out


def weighted_gap(a: np.ndarray, b: np.ndarray, family: "TestFamily") -> float:
    """sum_k w_k |a_k - b_k|, accumulated in family order."""
    total = 0.0
    for w, x, y in zip(family.weights.tolist(), a.tolist(), b.tolist()):
        total += w * abs(x - y)
    return total


def distance(mu: Measure, nu: Measure, family: "TestFamily") -> DistanceValue:
    value = weighted_gap(integral_vector(mu, family), integral_vector(nu, family), family)
    return DistanceValue(value=value, tail_bound=family.tail_bound)


def detect_convergence(
    seq: Sequence[Union[DistanceValue, float]], window: int, tol: float
) -> bool:
    """True iff the last `window` distances are all below tol."""
    if not seq:
        raise ValidationFailed("distance sequence is empty", "seq")
    if window < 1 or window > len(seq):
        raise ValidationFailed(
            f"window {window} does not fit a sequence of length {len(seq)}", "window"
        )
    values = [d.value if isinstance(d, DistanceValue) else float(d) for d in seq[-window:]]
    return all(v < tol for v in values)


def catalog_diameter(catalog: Sequence[Measure], family: "TestFamily") -> float:
    best = 0.0
    for i, mu in enumerate(catalog):
        for nu in catalog[i + 1 :]:
            best = max(best, distance(mu, nu, family).value)
    return best
