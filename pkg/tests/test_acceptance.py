"""End-to-end experiments. Run with `pytest -m slow`."""

import itertools
import json
from pathlib import Path

import numpy as np
import pytest

from src.ergoscan.asymptotics import find_hits, scan_windows
from src.ergoscan.asymptotics.windows import WindowIntegrator
from src.ergoscan.errors import ValidationFailed
from src.ergoscan.harness import materialize, run_experiment, validate_config
from src.ergoscan.harness import runner
from src.ergoscan.measures import (
    CylinderIndicator,
    FourierMode,
    ReferenceMeasure,
    empirical,
    invariance_defect,
)
from src.ergoscan.models import Classification
from src.ergoscan.systems import (
    CatMap,
    DoublingMap,
    FullShift,
    Rotation,
    SubshiftOfFiniteType,
    SymbolicState,
    SymbolSequence,
    TorusPoint,
    check_transitive,
    golden_angle,
    validate_adjacency,
)
from src.ergoscan.weakstar import build_family, distance

pytestmark = pytest.mark.slow

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _load(name, **overrides):
    data = json.loads((CONFIGS / name).read_text())
    data.update(overrides)
    return validate_config(data)


def _random_torus_point(rng, dimension):
    return TorusPoint(tuple(int(v) for v in rng.integers(0, 2**64, size=dimension, dtype=np.uint64)))


@pytest.fixture(scope="module")
def rng_cases():
    rng = np.random.default_rng(20240611)
    golden_mean = SubshiftOfFiniteType([[1, 1], [1, 0]])
    return rng, [
        (FullShift(2), lambda: SymbolicState(SymbolSequence.iid((0.5, 0.5), int(rng.integers(1 << 32))))),
        (FullShift(3), lambda: SymbolicState(SymbolSequence.iid((0.2, 0.3, 0.5), int(rng.integers(1 << 32))))),
        (golden_mean, lambda: SymbolicState(SymbolSequence.periodic("001", preamble="10"))),
        (DoublingMap(), lambda: SymbolicState(SymbolSequence.iid((0.5, 0.5), int(rng.integers(1 << 32))))),
        (CatMap(), lambda: _random_torus_point(rng, 2)),
        (Rotation(golden_angle()), lambda: _random_torus_point(rng, 1)),
    ]


def test_windows_are_forward_averages_of_shifted_points(rng_cases):
    rng, cases = rng_cases
    for _ in range(10_000):
        system, make_point = cases[int(rng.integers(len(cases)))]
        x = make_point()
        m = int(rng.integers(0, 10_000))
        n = int(rng.integers(1, 17))
        assert empirical(system, x, m, n).atoms == empirical(system, system.iterate(x, m), 0, n).atoms


def test_invariance_defect_never_exceeds_two_over_n(rng_cases):
    rng, cases = rng_cases
    cylinders = [CylinderIndicator(word=w) for k in (1, 2, 3) for w in itertools.product(range(2), repeat=k)]
    ternary = [CylinderIndicator(word=w) for k in (1, 2) for w in itertools.product(range(3), repeat=k)]
    circle = [FourierMode(frequency=(k,), part=p) for k in (1, 2, 3) for p in ("cos", "sin")]
    torus = [FourierMode(frequency=f, part=p) for f in ((0, 1), (1, 0), (1, 1), (2, -1)) for p in ("cos", "sin")]
    families = [cylinders, ternary, cylinders, circle, torus, circle]
    for _ in range(1_000):
        index = int(rng.integers(len(cases)))
        system, make_point = cases[index]
        n = int(rng.integers(1, 21))
        mu = empirical(system, make_point(), int(rng.integers(0, 1_000)), n)
        assert invariance_defect(mu, system, families[index]) <= 2.0 / n


def test_invariance_defect_bound_is_attained():
    # n = 1 and an observable taking opposite extremes at x and f(x)
    half = Rotation(1 << 63)
    mu = empirical(half, TorusPoint((0,)), 0, 1)
    assert invariance_defect(mu, half, [FourierMode(frequency=(1,))]) == 2.0


def test_weak_star_distance_is_a_metric():
    rng = np.random.default_rng(7)
    family = build_family("shift", max_word_length=4)
    shift = FullShift(2)
    pool = [
        ReferenceMeasure.dirac(0),
        ReferenceMeasure.dirac(1),
        ReferenceMeasure.periodic_word("01"),
        ReferenceMeasure.periodic_word("001"),
        ReferenceMeasure.periodic_word("0111"),
        ReferenceMeasure.lebesgue(),
    ]
    for _ in range(8):
        q = float(rng.uniform(0.05, 0.95))
        pool.append(ReferenceMeasure.bernoulli((q, 1.0 - q)))
    for seed in range(8):
        x = SymbolicState(SymbolSequence.iid((0.5, 0.5), seed))
        pool.append(empirical(shift, x, int(rng.integers(0, 500)), int(rng.integers(1, 200))))

    size = len(pool)
    table = np.empty((size, size))
    for i, j in itertools.product(range(size), repeat=2):
        table[i, j] = distance(pool[i], pool[j], family).value

    assert np.array_equal(table, table.T)
    assert np.all(np.diag(table) == 0.0)
    for _ in range(10_000):
        a, b, c = (int(v) for v in rng.integers(0, size, size=3))
        assert table[a, c] <= table[a, b] + table[b, c] + 1e-12

    two_entries = build_family("shift", max_word_length=1)
    assert distance(ReferenceMeasure.dirac(0), ReferenceMeasure.dirac(1), two_entries).value == 0.75


@pytest.fixture(scope="module")
def designed_run(tmp_path_factory):
    config = _load("designed_full_shift.json")
    out = tmp_path_factory.mktemp("designed-1")
    return config, out, run_experiment(config, threads=1, output_dir=out)


def test_transitive_point_is_extremely_oscillating(designed_run):
    config, _, report = designed_run
    n = config.n_values[0]
    blocks = {b.target: b for b in report.designed_blocks}
    assert set(blocks) == {t.label for t in config.targets}

    for label, block in blocks.items():
        hits = report.hitset(label, 0.05)
        assert not hits.is_empty
        assert any(block.contains_window(m, k) for m, k in hits.hits)
    # the word listing and the periodic tail also pass near orbit(01) and bernoulli
    block = blocks["delta(0)"]
    assert all(block.start - n < m < block.stop for m, _ in report.hitset("delta(0)", 0.05).hits)

    assert report.classification == Classification.EXTREMELY_OSCILLATING
    assert len(report.hull.centers) >= 3


def test_runs_do_not_depend_on_thread_count(designed_run, tmp_path):
    config, first, _ = designed_run
    run_experiment(config, threads=8, output_dir=tmp_path)
    for name in (runner.SCAN_FILE, runner.REPORT_FILE):
        assert (first / name).read_bytes() == (tmp_path / name).read_bytes()


def test_typical_point_hits_bernoulli_but_not_the_fixed_point(tmp_path):
    config = _load("iid_doubling_map.json")
    report = run_experiment(config, output_dir=tmp_path)
    windows = config.m_horizon + 1
    assert report.hitset("delta(0)", 0.1).is_empty
    assert report.hitset("bernoulli(0.5,0.5)", 0.1).count >= 0.99 * windows


def test_typical_point_reaches_the_fixed_point_at_small_scale():
    # a delta(0) hit needs a near-run of n zeros, about 2^-n per position
    config = _load("iid_doubling_map.json", n_values=[16], m_horizon=10_000_000, epsilons=[0.4])
    experiment = materialize(config)
    integrator = WindowIntegrator(experiment.system, experiment.state, experiment.family)
    block = 1_000_000
    found = None
    for lo in range(0, config.m_horizon, block):
        ms = np.arange(lo, min(lo + block, config.m_horizon + 1), dtype=np.int64)
        hits = find_hits(scan_windows(integrator, experiment.targets, 16, ms), "delta(0)", 0.4)
        if not hits.is_empty:
            found = hits.hits[0]
            break
    assert found is not None


def test_rotation_hull_shrinks_to_a_point(tmp_path):
    config = _load("rotation_control.json")
    report = run_experiment(config, output_dir=tmp_path)
    extents = [h.extent for h in sorted(report.hulls, key=lambda h: h.n)]
    assert extents[0] > extents[1] > extents[2]
    assert extents[2] < 0.05
    assert report.classification == Classification.CONVERGENT
    assert report.targets[0].forward_converges


def _reachable_everywhere(matrix):
    size = len(matrix)
    for start in range(size):
        seen = set()
        frontier = [j for j in range(size) if matrix[start][j]]
        while frontier:
            node = frontier.pop()
            if node in seen:
                continue
            seen.add(node)
            frontier.extend(j for j in range(size) if matrix[node][j])
        if len(seen) != size:
            return False
    return True


def test_transitivity_matches_brute_force_reachability():
    checked = 0
    for bits in itertools.product((0, 1), repeat=9):
        matrix = [list(bits[0:3]), list(bits[3:6]), list(bits[6:9])]
        try:
            validate_adjacency(matrix)
        except ValidationFailed:
            continue
        checked += 1
        assert check_transitive(matrix) == _reachable_everywhere(matrix)
    assert checked > 0
