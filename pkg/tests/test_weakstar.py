import itertools

import numpy as np
import pytest

from src.ergoscan.errors import ValidationFailed
from src.ergoscan.measures import ReferenceMeasure, empirical, integrate
from src.ergoscan.models import DistanceValue
from src.ergoscan.systems import CatMap, FullShift, Rotation, SymbolicState, SymbolSequence, TorusPoint, to_fixed
from src.ergoscan.weakstar import (
    MAX_ENTRIES,
    build_family,
    catalog_diameter,
    detect_convergence,
    distance,
    integral_vector,
    weighted_gap,
)
from src.ergoscan.weakstar.family import torus_frequencies


@pytest.fixture
def two_entry_family():
    return build_family("shift", max_word_length=1)


@pytest.fixture
def delta0():
    return ReferenceMeasure.dirac(0)


def test_shift_family_order_and_weights(two_entry_family):
    assert [phi.code for phi in two_entry_family.observables] == ["[0]", "[1]"]
    assert two_entry_family.weights.tolist() == [0.5, 0.25]
    assert two_entry_family.depth == 2
    assert two_entry_family.tail_bound == 0.25

    ternary = build_family("shift", max_word_length=2, alphabet_size=3)
    codes = [phi.code for phi in ternary.observables]
    assert codes[:5] == ["[0]", "[1]", "[2]", "[00]", "[01]"]
    assert codes[-1] == "[22]"
    assert ternary.depth == 12


def test_weights_are_powers_of_two():
    family = build_family("shift", max_word_length=2)
    assert family.depth == 6
    assert family.weights.sum() == 1 - 2.0**-6


def test_default_shift_family_fits_the_entry_cap():
    family = build_family("shift")
    assert family.depth == 510
    with pytest.raises(ValidationFailed):
        build_family("shift", max_word_length=9)
    assert MAX_ENTRIES == 1000


def test_circle_family():
    family = build_family("circle", max_frequency=2)
    assert [phi.code for phi in family.observables] == ["cos(1)", "sin(1)", "cos(2)", "sin(2)"]
    assert family.weights.tolist() == [0.25, 0.125, 0.0625, 0.03125]
    assert family.tail_bound == 2.0**-4


def test_fourier_distances_stay_below_one():
    half = Rotation(1 << 63)
    at_zero = empirical(half, TorusPoint((0,)), 0, 1)
    at_half = empirical(half, TorusPoint((0,)), 1, 1)
    family = build_family("circle")
    d = distance(at_zero, at_half, family)
    # odd cosines swing from 1 to -1
    assert d.value == pytest.approx(sum(2.0 ** -(2 * k - 1) for k in range(1, 17, 2)))
    assert 0.5 < d.value < 1.0
    assert d.upper <= 1.0

    torus = build_family("torus")
    quarter = to_fixed("1/4")
    corner = empirical(CatMap(), TorusPoint((0, 0)), 0, 1)
    opposite = ReferenceMeasure.periodic_orbit(Rotation(0), TorusPoint((1 << 63,)), 1)
    assert distance(corner, empirical(CatMap(), TorusPoint((quarter, 1 << 63)), 0, 1), torus).upper <= 1.0
    assert distance(at_zero, opposite, family).value == d.value


def test_torus_family_shells():
    assert torus_frequencies(1) == [(0, 1), (1, -1), (1, 0), (1, 1)]
    assert len(torus_frequencies(2)) == 4 + 8
    family = build_family("torus", max_frequency=1)
    assert family.depth == 8
    assert family.observables[0].code == "cos(0,1)"


def test_build_family_rejects_bad_input():
    with pytest.raises(ValidationFailed):
        build_family("sphere")
    with pytest.raises(ValidationFailed):
        build_family("shift", max_word_length=0)
    with pytest.raises(ValidationFailed):
        build_family("circle", max_frequency=0)


def test_distance_between_fixed_points(two_entry_family, delta0):
    d = distance(delta0, ReferenceMeasure.dirac(1), two_entry_family)
    assert d.value == 0.75
    assert d.tail_bound == 0.25
    assert d.upper == 1.0


def test_distance_to_bernoulli(two_entry_family, delta0):
    d = distance(ReferenceMeasure.bernoulli((0.5, 0.5)), delta0, two_entry_family)
    assert d.value == 0.375
    assert distance(delta0, delta0, two_entry_family).value == 0.0


def test_deeper_families_refine_the_distance():
    mu = ReferenceMeasure.bernoulli((0.3, 0.7))
    nu = ReferenceMeasure.periodic_word("01")
    short = build_family("shift", max_word_length=1)
    longer = build_family("shift", max_word_length=2)
    d1 = distance(mu, nu, short).value
    d2 = distance(mu, nu, longer).value
    assert d1 <= d2 <= d1 + short.tail_bound


def test_metric_axioms_on_small_catalog():
    family = build_family("shift", max_word_length=3)
    shift = FullShift(2)
    x = SymbolicState(SymbolSequence.iid((0.5, 0.5), seed=5))
    measures = [
        ReferenceMeasure.dirac(0),
        ReferenceMeasure.periodic_word("011"),
        ReferenceMeasure.bernoulli((0.2, 0.8)),
        ReferenceMeasure.lebesgue(),
        empirical(shift, x, 0, 40),
        empirical(shift, x, 100, 7),
    ]
    for a, b in itertools.product(measures, repeat=2):
        assert distance(a, b, family).value == distance(b, a, family).value
    for a, b, c in itertools.product(measures, repeat=3):
        ac = distance(a, c, family).value
        assert ac <= distance(a, b, family).value + distance(b, c, family).value + 1e-12


def test_empirical_integral_vector_matches_integrate():
    family = build_family("shift", max_word_length=3)
    x = SymbolicState(SymbolSequence.iid((0.5, 0.5), seed=9))
    mu = empirical(FullShift(2), x, 13, 200)
    expected = [integrate(mu, phi) for phi in family.observables]
    assert integral_vector(mu, family).tolist() == expected


def test_family_separation(two_entry_family):
    catalog = [ReferenceMeasure.bernoulli((0.5, 0.5)), ReferenceMeasure.periodic_word("01")]
    with pytest.raises(ValidationFailed, match="does not separate"):
        build_family("shift", max_word_length=1, catalog=catalog)
    build_family("shift", max_word_length=3, catalog=catalog)


def test_catalog_diameter(two_entry_family, delta0):
    catalog = [delta0, ReferenceMeasure.dirac(1), ReferenceMeasure.bernoulli((0.5, 0.5))]
    assert catalog_diameter(catalog, two_entry_family) == 0.75


def test_weighted_gap(two_entry_family):
    gap = weighted_gap(np.array([1.0, 0.0]), np.array([0.5, 0.5]), two_entry_family)
    assert gap == 0.375


def test_detect_convergence():
    assert detect_convergence([0.5, 0.01, 0.02], 2, 0.05) is True
    assert detect_convergence([0.5, 0.01, 0.02], 3, 0.05) is False
    values = [DistanceValue(value=0.3, tail_bound=0.0), DistanceValue(value=0.01, tail_bound=0.0)]
    assert detect_convergence(values, 1, 0.05) is True
    with pytest.raises(ValidationFailed):
        detect_convergence([], 1, 0.05)
    with pytest.raises(ValidationFailed):
        detect_convergence([0.1], 2, 0.05)
    with pytest.raises(ValidationFailed):
        detect_convergence([0.1], 0, 0.05)


def test_family_descriptor(two_entry_family):
    descriptor = two_entry_family.descriptor()
    assert descriptor["space"] == "shift"
    assert descriptor["depth"] == 2
    assert descriptor["codes"] == ["[0]", "[1]"]
    assert build_family("circle", max_frequency=3).descriptor()["max_frequency"] == 3
