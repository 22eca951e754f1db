import dataclasses

import numpy as np
import pytest

from src.ergoscan.asymptotics import (
    HullBuilder,
    ScanResult,
    WindowIntegrator,
    best_distance,
    build_covering,
    classify,
    estimate_hull,
    estimate_orbit_hull,
    find_hits,
    forward_statistics,
    refine,
    scan,
    window_starts,
    witness_table,
)
from src.ergoscan.errors import HorizonExceeded, ValidationFailed
from src.ergoscan.measures import ReferenceMeasure, empirical, integrate
from src.ergoscan.models import (
    Classification,
    CoveringNet,
    DistanceValue,
    HitRun,
    HitSet,
    Hull,
    HullCenter,
)
from src.ergoscan.systems import (
    DoublingMap,
    FullShift,
    Rotation,
    SymbolicState,
    SymbolSequence,
    TorusPoint,
    TypicalBlock,
    design_transitive_point,
    golden_angle,
)
from src.ergoscan.systems.fixedpoint import MASK, ONE
from src.ergoscan.weakstar import build_family, distance, integral_vector


@pytest.fixture
def shift():
    return FullShift(2)


@pytest.fixture
def iid_point():
    return SymbolicState(SymbolSequence.iid((0.5, 0.5), seed=3))


@pytest.fixture
def zeros():
    return SymbolicState(SymbolSequence.periodic("0"))


@pytest.fixture
def family():
    return build_family("shift", max_word_length=3)


@pytest.fixture
def targets():
    return [ReferenceMeasure.dirac(0), ReferenceMeasure.bernoulli((0.5, 0.5))]


def _zero_block_point(length=300):
    return design_transitive_point(
        2, [TypicalBlock(label="delta(0)", length=length, cycle=(0,))], max_word_length=3
    )


def test_window_integrals_match_empirical_measures(shift, iid_point, family):
    integrator = WindowIntegrator(shift, iid_point, family)
    ms = [0, 1, 17, 400]
    values = integrator.integrals(25, ms)
    for row, m in zip(values, ms):
        expected = integral_vector(empirical(shift, iid_point, m, 25), family)
        assert row.tolist() == expected.tolist()


def test_window_integrals_do_not_depend_on_chunking(shift, iid_point, family):
    integrator = WindowIntegrator(shift, iid_point, family)
    ms = np.arange(0, 300, dtype=np.int64)
    whole = integrator.integrals(40, ms)
    parts = np.concatenate([integrator.integrals(40, ms[:123]), integrator.integrals(40, ms[123:])])
    assert np.array_equal(whole, parts)


def test_fourier_window_integrals_are_quantized_closely():
    rotation = Rotation(golden_angle())
    x = TorusPoint((0,))
    circle = build_family("circle", max_frequency=4)
    integrator = WindowIntegrator(rotation, x, circle)
    values = integrator.integrals(30, [0, 5, 99])
    for row, m in zip(values, [0, 5, 99]):
        mu = empirical(rotation, x, m, 30)
        for value, phi in zip(row, circle.observables):
            assert abs(value - integrate(mu, phi)) <= 2.0**-40


def test_doubling_map_fourier_integrals(iid_point):
    doubling = DoublingMap()
    circle = build_family("circle", max_frequency=2)
    integrator = WindowIntegrator(doubling, iid_point, circle)
    assert integrator.lookahead == 63
    row = integrator.integrals(20, [7])[0]
    mu = empirical(doubling, iid_point, 7, 20)
    for value, phi in zip(row, circle.observables):
        assert abs(value - integrate(mu, phi)) <= 2.0**-40


def test_integrator_checks_the_family_space(shift, iid_point, family):
    with pytest.raises(ValidationFailed):
        WindowIntegrator(Rotation(golden_angle()), TorusPoint((0,)), family)
    with pytest.raises(ValidationFailed):
        WindowIntegrator(shift, iid_point, build_family("circle", max_frequency=2))


def test_scan_distances_equal_direct_distances(shift, iid_point, family, targets):
    result = scan(shift, iid_point, targets, 30, (10, 60), family, stride=5)
    assert len(result) == 11
    for record in result:
        mu = empirical(shift, iid_point, record.m, record.n)
        for target in targets:
            assert record.distance_to(target.label).value == distance(mu, target, family).value


def test_scan_is_identical_across_thread_counts(shift, iid_point, targets):
    deep = build_family("shift")
    one = scan(shift, iid_point, targets, 50, 20000, deep, threads=1)
    four = scan(shift, iid_point, targets, 50, 20000, deep, threads=4)
    assert np.array_equal(one.values, four.values)
    assert np.array_equal(one.m, four.m)


def test_scan_respects_the_horizon(shift, family):
    x = SymbolicState(SymbolSequence.iid((0.5, 0.5), seed=1, horizon=100))
    target = [ReferenceMeasure.dirac(0)]
    assert len(scan(shift, x, target, 10, 89, family)) == 90
    with pytest.raises(HorizonExceeded):
        scan(shift, x, target, 10, 90, family)


def test_window_starts():
    assert window_starts(20, 5).tolist() == [0, 5, 10, 15, 20]
    assert window_starts((5, 20), 5).tolist() == [5, 10, 15, 20]
    with pytest.raises(ValidationFailed):
        window_starts(10, 0)
    with pytest.raises(ValidationFailed):
        window_starts((5, 3))


def test_find_hits_on_a_fixed_point(shift, zeros, family):
    result = scan(shift, zeros, [ReferenceMeasure.dirac(0)], 10, 100, family)
    hits = find_hits(result, "delta(0)", 0.05)
    assert hits.count == 101
    assert hits.runs == [HitRun(n=10, start=0, stop=101, stride=1)]
    assert hits.m_max == 100
    assert find_hits(result, "delta(0)", 2.0**-20).is_empty


def test_find_hits_with_stride(shift, zeros, family):
    result = scan(shift, zeros, [ReferenceMeasure.dirac(0)], 10, 100, family, stride=5)
    hits = find_hits(result, "delta(0)", 0.05)
    assert hits.count == 21
    assert hits.runs[0].stride == 5
    assert hits.hits[:3] == [(0, 10), (5, 10), (10, 10)]


def test_find_hits_errors(shift, zeros, family):
    result = scan(shift, zeros, [ReferenceMeasure.dirac(0)], 10, 20, family)
    with pytest.raises(ValidationFailed):
        find_hits(result, "orbit(01)", 0.05)
    with pytest.raises(ValidationFailed):
        find_hits(ScanResult.empty(["delta(0)"], 0.0), "delta(0)", 0.05)


def test_scan_result_merge_and_records(shift, iid_point, family, targets):
    a = scan(shift, iid_point, targets, 10, (0, 4), family)
    b = scan(shift, iid_point, targets, 5, (2, 6), family)
    c = scan(shift, iid_point, targets, 10, (3, 8), family)
    merged = a.merge(b).merge(c)
    assert merged.n_values == [5, 10]
    assert list(zip(merged.n.tolist(), merged.m.tolist()))[:5] == [(5, m) for m in range(2, 7)]
    assert len(merged) == 5 + 9
    rebuilt = ScanResult.from_records(list(merged))
    assert np.array_equal(rebuilt.values, merged.values)
    assert merged[0].distance_to("delta(0)").tail_bound == family.tail_bound


def test_scan_result_csv(tmp_path, shift, zeros, family):
    result = scan(shift, zeros, [ReferenceMeasure.dirac(0)], 4, 2, family)
    lines = result.write_csv(tmp_path / "scan.csv").read_text().splitlines()
    assert lines[0] == "m,n,delta(0),delta(0)_tail"
    assert lines[1] == f"0,4,0.0,{family.tail_bound!r}"
    assert len(lines) == 4


def test_refine_fills_in_near_hits(shift, family):
    designed = _zero_block_point()
    target = [ReferenceMeasure.dirac(0)]
    integrator = WindowIntegrator(shift, designed.state, family)
    coarse = scan(shift, designed.state, target, 50, 500, family, stride=7)
    refined = refine(integrator, target, coarse, 0.05, 7, 500)
    coarse_hits = {m for m, _ in find_hits(coarse, "delta(0)", 0.05).hits}
    refined_hits = {m for m, _ in find_hits(refined, "delta(0)", 0.05).hits}
    assert coarse_hits < refined_hits
    assert set(range(0, 251)) <= refined_hits


def test_best_distance(shift, iid_point, family, targets):
    result = scan(shift, iid_point, targets, 30, 40, family)
    best = best_distance(result, "bernoulli(0.5,0.5)")
    assert best.value == float(result.column("bernoulli(0.5,0.5)").min())
    assert best_distance(ScanResult.empty(["x"], 0.0), "x") is None


def test_hull_of_a_fixed_point(shift, zeros, family):
    integrator = WindowIntegrator(shift, zeros, family)
    hull = estimate_orbit_hull(
        integrator, 20, window_starts(200), 0.02, [ReferenceMeasure.dirac(0)]
    )
    assert len(hull.centers) == 1
    assert hull.coverage == 1.0
    assert hull.is_complete
    assert hull.extent == 0.0
    center = hull.centers[0]
    assert center.window_count == 201
    assert center.invariance_defect == 0.0
    assert center.nearest_target == "delta(0)"


def test_hull_sees_every_typical_block(shift):
    designed = design_transitive_point(
        2,
        [
            TypicalBlock(label="delta(0)", length=400, cycle=(0,)),
            TypicalBlock(label="orbit(01)", length=400, cycle=(0, 1)),
        ],
        max_word_length=3,
    )
    deep = build_family("shift", max_word_length=4)
    targets = [ReferenceMeasure.dirac(0), ReferenceMeasure.periodic_word("01")]
    integrator = WindowIntegrator(shift, designed.state, deep)
    hull = estimate_orbit_hull(integrator, 100, window_starts(800), 0.02, targets)
    assert len(hull.centers) >= 2
    for target in targets:
        assert any(c.distance_to(target.label).value <= 0.02 + 1e-12 for c in hull.centers)
    assert hull.centers[0].distance_to("delta(0)").value == 0.0
    assert hull.diameter >= distance(targets[0], targets[1], deep).value - 0.04


def test_hull_builder_streams_chunks_like_single_windows(shift, iid_point, family):
    integrator = WindowIntegrator(shift, iid_point, family)
    ms = window_starts(600)
    integrals = integrator.integrals(30, ms)

    whole = HullBuilder(family, 0.03, 30)
    whole.add(ms, integrals)
    pieces = HullBuilder(family, 0.03, 30)
    for lo, hi in ((0, 1), (1, 250), (250, 601)):
        pieces.add(ms[lo:hi], integrals[lo:hi])

    a, b = whole.finish(), pieces.finish()
    assert [c.m for c in a.centers] == [c.m for c in b.centers]
    assert [c.window_count for c in a.centers] == [c.window_count for c in b.centers]
    assert a.extent == b.extent


def test_hull_radius_must_exceed_twice_the_tail():
    with pytest.raises(ValidationFailed):
        HullBuilder(build_family("shift", max_word_length=1), 0.5, 10)


def test_estimate_hull_over_reference_measures():
    family = build_family("shift", max_word_length=1)
    measures = [
        ReferenceMeasure.dirac(0),
        ReferenceMeasure.dirac(1),
        ReferenceMeasure.bernoulli((0.5, 0.5)),
    ]
    hull = estimate_hull(measures, family, 0.6)
    assert [c.m for c in hull.centers] == [0, 1]
    assert [c.window_count for c in hull.centers] == [2, 1]


def test_covering_net():
    family = build_family("shift", max_word_length=1)
    delta0, delta1 = ReferenceMeasure.dirac(0), ReferenceMeasure.dirac(1)
    bernoulli = ReferenceMeasure.bernoulli((0.5, 0.5))
    assert build_covering([delta0, delta1], 10, family).centers == ["delta(0)", "delta(1)"]

    coarse = build_covering([delta0, delta1, bernoulli], 2, family)
    assert coarse.centers == ["delta(0)", "delta(1)"]
    assert ("bernoulli(0.5,0.5)", "delta(0)") in coarse.assignments
    assert coarse.radius == 0.5

    with pytest.raises(ValidationFailed):
        build_covering([], 10, family)
    with pytest.raises(ValidationFailed):
        build_covering([delta0], 0, family)


def _center(m, a, b):
    return HullCenter(
        m=m,
        n=10,
        window_count=1,
        target_distances=[
            ("a", DistanceValue(value=a, tail_bound=0.0)),
            ("b", DistanceValue(value=b, tail_bound=0.0)),
        ],
    )


def _hull(*centers, coverage=1.0):
    return Hull(n=10, radius=0.02, tail_bound=0.0, windows=5, coverage=coverage, centers=list(centers))


@pytest.fixture
def catalog():
    return [ReferenceMeasure.dirac(0, label="a"), ReferenceMeasure.dirac(1, label="b")]


@pytest.fixture
def covering():
    return CoveringNet(k=50, radius=1 / 50, centers=["a", "b"])


def test_classify(catalog, covering):
    assert classify(_hull(_center(0, 0.01, 0.7)), catalog, covering, 0.05) == Classification.CONVERGENT
    both = _hull(_center(0, 0.01, 0.5), _center(3, 0.4, 0.01))
    assert classify(both, catalog, covering, 0.05) == Classification.EXTREMELY_OSCILLATING
    one = _hull(_center(0, 0.01, 0.5), _center(3, 0.4, 0.3))
    assert classify(one, catalog, covering, 0.05) == Classification.OSCILLATING


def test_classify_preconditions(catalog, covering):
    hull = _hull(_center(0, 0.01, 0.5), _center(3, 0.4, 0.01))
    with pytest.raises(ValidationFailed):
        classify(hull, catalog, covering, 0.04)
    with pytest.raises(ValidationFailed):
        classify(_hull(_center(0, 0.01, 0.5), coverage=0.5), catalog, covering, 0.05)
    with pytest.raises(ValidationFailed):
        classify(hull, catalog, CoveringNet(k=50, radius=1 / 50, centers=["c"]), 0.05)


def test_forward_statistics(shift, zeros, family):
    forward = forward_statistics(shift, zeros, [ReferenceMeasure.dirac(0)], family, [100, 10])
    assert [d.value for d in forward["delta(0)"]] == [0.0, 0.0]


def test_witness_table():
    hits = HitSet(
        target="delta(0)",
        epsilon=0.05,
        m_max=100,
        n_values=[10, 100, 1000],
        count=3,
        runs=[HitRun(n=100, start=0, stop=3)],
    )
    assert witness_table([hits]) == [{"target": "delta(0)", "epsilon": 0.05, "scales": [10, 100]}]


def test_iid_window_frequencies_match_the_bernoulli_measure():
    p = (0.3, 0.7)
    x = SymbolicState(SymbolSequence.iid(p, seed=2024))
    family = build_family("shift", max_word_length=3)
    integrator = WindowIntegrator(FullShift(2), x, family)
    window = integrator.integrals(100_000, [0])[0]
    expected = integral_vector(ReferenceMeasure.bernoulli(p), family)
    assert np.max(np.abs(window - expected)) < 0.02


def test_hits_grow_with_epsilon_and_range(shift, iid_point, family, targets):
    wide = scan(shift, iid_point, targets, 20, 2000, family)
    narrow = scan(shift, iid_point, targets, 20, 800, family)
    for target in targets:
        previous = set()
        for epsilon in (0.02, 0.05, 0.1, 0.2, 0.5, 1.0):
            current = set(find_hits(wide, target.label, epsilon).hits)
            assert previous <= current
            previous = current
        inner = set(find_hits(narrow, target.label, 0.2).hits)
        outer = set(find_hits(wide, target.label, 0.2).hits)
        assert inner <= outer
        assert inner == {(m, n) for m, n in outer if m <= 800}
    assert find_hits(wide, "bernoulli(0.5,0.5)", 1.0).count == len(wide)


def test_sliding_by_one_moves_shift_distances_by_at_most_one_over_n(shift, iid_point, family, targets):
    for n in (5, 40, 200):
        result = scan(shift, iid_point, targets, n, 300, family)
        for target in targets:
            assert np.max(np.abs(np.diff(result.column(target.label)))) <= 1.0 / n + 1e-12


def test_moving_one_atom_moves_circle_distances_within_the_lipschitz_bound():
    rotation = Rotation(golden_angle())
    circle = build_family("circle", max_frequency=4)
    lebesgue = ReferenceMeasure.lebesgue()
    mu = empirical(rotation, TorusPoint((0,)), 0, 30)
    slope = sum(e.weight * e.observable.lipschitz for e in circle.entries)
    for index in (0, 17, 29):
        for step in (1 << 44, 1 << 54):
            atoms = list(mu.atoms)
            atoms[index] = TorusPoint(((atoms[index].coords[0] + step) & MASK,))
            moved = dataclasses.replace(mu, atoms=tuple(atoms))
            bound = slope * step / ONE / mu.n + 1e-12
            assert distance(mu, moved, circle).value <= bound
            before = distance(mu, lebesgue, circle).value
            after = distance(moved, lebesgue, circle).value
            assert abs(after - before) <= bound


def test_every_circle_window_lies_within_one_of_every_target():
    rotation = Rotation(golden_angle())
    circle = build_family("circle")
    targets = [
        ReferenceMeasure.lebesgue(),
        ReferenceMeasure.periodic_orbit(Rotation(1 << 63), TorusPoint((0,)), 2, label="orbit(0,1/2)"),
    ]
    for n in (1, 2, 50):
        result = scan(rotation, TorusPoint((0,)), targets, n, 500, circle)
        for target in targets:
            assert find_hits(result, target.label, 1.01).count == len(result)
