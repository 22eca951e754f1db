import json
import math

import pytest

from src.ergoscan.errors import ValidationFailed
from src.ergoscan.measures import (
    ConstantObservable,
    CylinderIndicator,
    FourierMode,
    ReferenceMeasure,
    birkhoff_average,
    combine,
    empirical,
    integrate,
    invariance_defect,
)
from src.ergoscan.systems import (
    CatMap,
    DoublingMap,
    FullShift,
    Rotation,
    SymbolicState,
    SymbolSequence,
    TorusPoint,
    golden_angle,
    to_fixed,
)
from src.ergoscan.systems.fixedpoint import MASK, ONE


@pytest.fixture
def alternating():
    return SymbolicState(SymbolSequence.periodic("01"))


@pytest.fixture
def quarter_rotation():
    return Rotation(to_fixed("1/4"))


def test_cylinder_indicator(alternating):
    phi = CylinderIndicator(word="01")
    assert phi.evaluate(alternating) == 1.0
    assert phi.evaluate(alternating.shifted(1)) == 0.0
    assert phi.code == "[01]"
    assert CylinderIndicator(word="1", offset=2).code == "[1]@2"
    assert CylinderIndicator(word="1", offset=2).evaluate(alternating) == 0.0


def test_cylinder_indicator_needs_symbols():
    with pytest.raises(ValidationFailed):
        CylinderIndicator(word="0").evaluate(TorusPoint((0,)))


def test_fourier_modes():
    assert FourierMode(frequency=(1,), part="cos").evaluate(TorusPoint((0,))) == 1.0
    assert FourierMode(frequency=(1,), part="sin").evaluate(TorusPoint((to_fixed("1/4"),))) == 1.0
    quarter = to_fixed("1/4")
    assert FourierMode(frequency=(1, 1)).evaluate(TorusPoint((quarter, quarter))) == -1.0
    assert FourierMode(frequency=(2,)).code == "cos(2)"
    assert FourierMode(frequency=(0,)).is_constant


def test_fourier_mode_reads_binary_sequences_as_dyadics():
    almost_half = SymbolicState(SymbolSequence.periodic("1", preamble="0"))
    assert FourierMode(frequency=(1,)).evaluate(almost_half) == pytest.approx(-1.0)
    with pytest.raises(ValidationFailed):
        FourierMode(frequency=(1, 1)).evaluate(almost_half)


def test_combinations(alternating):
    phi = combine((2.0, CylinderIndicator(word="0")), (-1.0, ConstantObservable()))
    assert phi.evaluate(alternating) == 1.0
    assert phi.sup_bound == 3.0
    nested = combine((0.5, phi))
    assert nested.evaluate(alternating) == 0.5
    mixed = combine((1.0, CylinderIndicator(word="0")), (1.0, FourierMode(frequency=(1,))))
    with pytest.raises(ValidationFailed):
        mixed.space


def test_reference_integrals():
    bernoulli = ReferenceMeasure.bernoulli((0.3, 0.7))
    assert integrate(bernoulli, CylinderIndicator(word="01")) == pytest.approx(0.21)
    assert integrate(bernoulli, CylinderIndicator(word="2")) == 0.0

    orbit = ReferenceMeasure.periodic_word("01")
    assert integrate(orbit, CylinderIndicator(word="0")) == 0.5
    assert integrate(orbit, CylinderIndicator(word="00")) == 0.0

    lebesgue = ReferenceMeasure.lebesgue()
    assert integrate(lebesgue, CylinderIndicator(word="01")) == 0.25
    assert integrate(lebesgue, FourierMode(frequency=(3,))) == 0.0
    assert integrate(lebesgue, ConstantObservable(value=2.0)) == 2.0


def test_bernoulli_fourier_integrals():
    uniform = ReferenceMeasure.bernoulli((0.5, 0.5))
    assert abs(integrate(uniform, FourierMode(frequency=(1,)))) < 1e-12
    zeros = ReferenceMeasure.bernoulli((1.0, 0.0))
    assert integrate(zeros, FourierMode(frequency=(3,))) == 1.0


def test_lebesgue_dimension_must_match():
    with pytest.raises(ValidationFailed):
        integrate(ReferenceMeasure.lebesgue(2), FourierMode(frequency=(1,)))


def test_reference_constructors_validate():
    with pytest.raises(ValidationFailed):
        ReferenceMeasure.bernoulli((0.5, 0.6))
    with pytest.raises(ValidationFailed):
        ReferenceMeasure.lebesgue(3)
    assert ReferenceMeasure.dirac(1).label == "delta(1)"
    assert ReferenceMeasure.periodic_word("01").describe() == {
        "label": "orbit(01)",
        "kind": "periodic-atomic",
        "space": "shift",
        "cycle": [0, 1],
    }


def test_periodic_orbit_checks_return(quarter_rotation):
    mu = ReferenceMeasure.periodic_orbit(quarter_rotation, TorusPoint((0,)), 4)
    assert len(mu.atoms) == 4
    assert integrate(mu, FourierMode(frequency=(1,))) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValidationFailed):
        ReferenceMeasure.periodic_orbit(quarter_rotation, TorusPoint((0,)), 3)


def test_symbolic_periodic_orbit_needs_periodic_sequence():
    iid = SymbolicState(SymbolSequence.iid((0.5, 0.5), seed=1))
    with pytest.raises(ValidationFailed):
        ReferenceMeasure.periodic_orbit(FullShift(2), iid, 2)
    periodic = SymbolicState(SymbolSequence.periodic("011"))
    assert len(ReferenceMeasure.periodic_orbit(FullShift(2), periodic, 3).atoms) == 3


def test_empirical_shift_identity():
    shift = FullShift(2)
    x = SymbolicState(SymbolSequence.iid((0.5, 0.5), seed=11))
    assert empirical(shift, x, 7, 5).atoms == empirical(shift, shift.iterate(x, 7), 0, 5).atoms

    cat = CatMap()
    y = TorusPoint.from_values(["1/5", "2/7"])
    assert empirical(cat, y, 9, 6).atoms == empirical(cat, cat.iterate(y, 9), 0, 6).atoms


def test_empirical_provenance_and_validation(quarter_rotation):
    mu = empirical(quarter_rotation, TorusPoint((0,)), 3, 8, point_id="origin")
    assert mu.provenance.m == 3
    assert mu.provenance.point_id == "origin"
    assert mu.n == 8
    with pytest.raises(ValidationFailed):
        empirical(quarter_rotation, TorusPoint((0,)), 0, 0)
    with pytest.raises(ValidationFailed):
        empirical(quarter_rotation, TorusPoint((0,)), -1, 3)


def test_histograms(alternating, quarter_rotation):
    shift_mu = empirical(FullShift(2), alternating, 0, 4)
    assert shift_mu.histogram(word_length=1) == [(0, 0.5), (1, 0.5)]
    assert shift_mu.histogram(word_length=2) == [(0, 0.0), (1, 0.5), (2, 0.5), (3, 0.0)]

    circle_mu = empirical(quarter_rotation, TorusPoint((0,)), 0, 4)
    assert circle_mu.histogram(bins=4) == [(0, 0.25), (1, 0.25), (2, 0.25), (3, 0.25)]


def test_empirical_exports(tmp_path, alternating):
    mu = empirical(FullShift(2), alternating, 0, 3)
    path = mu.write_json(tmp_path / "mu.json", precision=4)
    data = json.loads(path.read_text())
    assert data["encoding"] == "symbols"
    assert data["atoms"] == [[0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, 1]]

    csv_path = mu.write_histogram_csv(tmp_path / "hist.csv", word_length=1)
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "bin,mass"
    assert len(lines) == 3


def test_invariance_defect_reaches_its_bound(alternating):
    half = Rotation(1 << 63)
    mu = empirical(half, TorusPoint((0,)), 0, 1)
    assert invariance_defect(mu, half, [FourierMode(frequency=(1,))]) == 2.0

    shift = FullShift(2)
    nu = empirical(shift, alternating, 0, 1)
    assert invariance_defect(nu, shift, [CylinderIndicator(word="0")]) == 1.0


def test_invariance_defect_shrinks_with_n():
    rotation = Rotation(golden_angle())
    family = [FourierMode(frequency=(k,), part=p) for k in (1, 2, 3) for p in ("cos", "sin")]
    for n in (1, 10, 100):
        mu = empirical(rotation, TorusPoint((0,)), 5, n)
        assert invariance_defect(mu, rotation, family) <= 2.0 / n


def test_invariance_defect_needs_observables(quarter_rotation):
    mu = empirical(quarter_rotation, TorusPoint((0,)), 0, 2)
    with pytest.raises(ValidationFailed):
        invariance_defect(mu, quarter_rotation, [])


def test_birkhoff_average(quarter_rotation):
    value = birkhoff_average(quarter_rotation, TorusPoint((0,)), 0, 4, FourierMode(frequency=(1,)))
    assert math.isclose(value, 0.0, abs_tol=1e-15)


def test_doubling_map_orbit_of_one_third(alternating):
    mu = empirical(DoublingMap(), alternating, 0, 2)
    assert [atom.dyadic() for atom in mu.atoms] == [to_fixed("1/3"), to_fixed("2/3")]
    assert integrate(mu, FourierMode(frequency=(1,))) == pytest.approx(-0.5, abs=1e-12)
    assert integrate(mu, FourierMode(frequency=(1,), part="sin")) == pytest.approx(0.0, abs=1e-12)
    later = empirical(DoublingMap(), alternating, 10, 2)
    assert invariance_defect(later, DoublingMap(), [FourierMode(frequency=(1,))]) == 0.0


def test_windows_splice_into_longer_windows():
    shift = FullShift(2)
    x = SymbolicState(SymbolSequence.iid((0.4, 0.6), seed=21))
    rotation = Rotation(golden_angle())
    y = TorusPoint((to_fixed("1/5"),))
    cases = [
        (shift, x, [CylinderIndicator(word="1"), CylinderIndicator(word="011")]),
        (rotation, y, [FourierMode(frequency=(1,)), FourierMode(frequency=(3,), part="sin")]),
    ]
    for system, point, observables in cases:
        for m, n1, n2 in ((0, 1, 1), (5, 10, 30), (100, 37, 3)):
            whole = empirical(system, point, m, n1 + n2)
            head = empirical(system, point, m, n1)
            tail = empirical(system, point, m + n1, n2)
            assert whole.atoms == head.atoms + tail.atoms
            for phi in observables:
                spliced = (n1 * integrate(head, phi) + n2 * integrate(tail, phi)) / (n1 + n2)
                assert integrate(whole, phi) == pytest.approx(spliced, abs=1e-12)


def test_fourier_modes_respect_their_lipschitz_bound():
    for frequency in ((1,), (3,), (1, -2), (2, 2)):
        for part in ("cos", "sin"):
            phi = FourierMode(frequency=frequency, part=part)
            for start in ("0", "1/7", "2/3", "0.9"):
                base = tuple(to_fixed(start) for _ in frequency)
                for step in (1 << 40, 1 << 52, 1 << 58):
                    moved = tuple((c + step) & MASK for c in base)
                    gap = abs(phi.evaluate(TorusPoint(base)) - phi.evaluate(TorusPoint(moved)))
                    assert gap <= phi.lipschitz * step / ONE + 1e-12

    assert CylinderIndicator(word="0").lipschitz is None
    constant = ConstantObservable(value=0.5)
    assert constant.lipschitz == 0.0
    assert constant.evaluate(TorusPoint((0,))) == constant.evaluate(TorusPoint((1 << 63,)))
