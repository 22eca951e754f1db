from __future__ import annotations

import cmath
import math
from typing import Iterable, Protocol, Sequence, Union

from ..errors import ValidationFailed
from ..models.schemas import ReferenceKind, SpaceTag
from ..systems.dynamics import DynamicalSystem, State
from ..systems.fixedpoint import TorusPoint
from ..systems.sequences import SymbolicState
from .empirical import EmpiricalMeasure, empirical
from .observables import (
    AnyObservable,
    ConstantObservable,
    CylinderIndicator,
    FourierMode,
    ObservableCombination,
)
from .reference import ReferenceMeasure

Measure = Union[EmpiricalMeasure, ReferenceMeasure]

# binary digits that matter for a 64-bit fixed-point circle
DYADIC_DIGITS = 64


class HasObservables(Protocol):
    @property
    def observables(self) -> Sequence[AnyObservable]: ...


def integrate(mu: Measure, phi: AnyObservable) -> float:
    """Integral of phi against mu: an exact atom average, or a closed form for reference measures."""
    if isinstance(phi, ObservableCombination):
        if isinstance(mu, EmpiricalMeasure) or mu.kind == ReferenceKind.PERIODIC_ATOMIC:
            return _atom_average(mu.atoms, phi)
        return math.fsum(c * integrate(mu, inner) for c, inner in phi.terms)
    if isinstance(phi, ConstantObservable):
        return phi.value
    if isinstance(mu, EmpiricalMeasure):
        return _atom_average(mu.atoms, phi)
    if mu.kind == ReferenceKind.PERIODIC_ATOMIC:
        return _atom_average(mu.atoms, phi)
    if mu.kind == ReferenceKind.BERNOULLI:
        return _bernoulli(mu.p, phi)
    return _lebesgue(mu, phi)


def _atom_average(atoms: Sequence[object], phi: AnyObservable) -> float:
    if not atoms:
        raise ValidationFailed("measure has no atoms", "measure")
    _check_space(atoms[0], phi)
    return math.fsum(phi.evaluate(a) for a in atoms) / len(atoms)


def _check_space(atom: object, phi: AnyObservable) -> None:
    space = phi.space
    if space is None:
        return
    if space == SpaceTag.SHIFT and not isinstance(atom, SymbolicState):
        raise ValidationFailed(f"{phi.code} lives on shift spaces; the measure does not", "observable")
    if space in (SpaceTag.CIRCLE, SpaceTag.TORUS) and isinstance(atom, SymbolicState):
        if space == SpaceTag.TORUS or atom.sequence.alphabet_size != 2:
            raise ValidationFailed(f"{phi.code} needs circle coordinates", "observable")
    if isinstance(atom, TorusPoint):
        expected = SpaceTag.CIRCLE if atom.dimension == 1 else SpaceTag.TORUS
        if space != expected:
            raise ValidationFailed(f"{phi.code} does not live on the {expected.value}", "observable")


def _bernoulli(p: Sequence[float], phi: AnyObservable) -> float:
    if isinstance(phi, CylinderIndicator):
        if max(phi.word) >= len(p):
            return 0.0
        return math.prod(p[s] for s in phi.word)
    assert isinstance(phi, FourierMode)
    if phi.dimension != 1 or len(p) != 2:
        raise ValidationFailed(
            f"{phi.code} against a Bernoulli measure needs the binary circle", "observable"
        )
    # x = sum x_j 2^-j with independent digits: E e(kx) = prod_j (p0 + p1 e(k 2^-j))
    k = phi.frequency[0]
    value = complex(1.0)
    for j in range(1, DYADIC_DIGITS + 1):
        value *= p[0] + p[1] * cmath.exp(2j * math.pi * math.ldexp(k % (1 << j), -j))
    return value.real if phi.part == "cos" else value.imag


def _lebesgue(mu: ReferenceMeasure, phi: AnyObservable) -> float:
    if isinstance(phi, CylinderIndicator):
        # Lebesgue on the doubling map is the uniform Bernoulli measure on binary expansions
        return math.ldexp(1.0, -len(phi.word)) if max(phi.word) < 2 else 0.0
    assert isinstance(phi, FourierMode)
    if phi.dimension != mu.dimension:
        raise ValidationFailed(
            f"{phi.code} does not match the {mu.space.value} of {mu.label}", "observable"
        )
    if phi.is_constant:
        return 1.0 if phi.part == "cos" else 0.0
    return 0.0


def birkhoff_average(
    system: DynamicalSystem, x: State, m: int, n: int, phi: AnyObservable
) -> float:
    """(1/n) * sum of phi(f^j(x)) for j in [m, m + n)."""
    return integrate(empirical(system, x, m, n), phi)


def invariance_defect(
    mu: EmpiricalMeasure,
    system: DynamicalSystem,
    family: Union[Iterable[AnyObservable], "HasObservables"],
) -> float:
    """max over the family of |integral of phi - integral of phi o f| against mu."""
    observables = list(getattr(family, "observables", family))
    if not observables:
        raise ValidationFailed("family has no observables", "family")
    images = [system.step(a) for a in mu.atoms]
    worst = 0.0
    for phi in observables:
        _check_space(mu.atoms[0], phi)
        # one fsum over both lists keeps the telescoping cancellation exact
        terms = [phi.evaluate(b) for b in images] + [-phi.evaluate(a) for a in mu.atoms]
        worst = max(worst, abs(math.fsum(terms)) / mu.n)
    return worst
