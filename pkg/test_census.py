"""
Tests for sphere and ball counts, samplers, and pA proportion measurements
"""
import math
import random
from collections import Counter
from fractions import Fraction

import pytest

from braid_core import NormalForm, SimpleBraid, is_rigid, x_A, x_B
from census import (
    CensusError,
    PathSampler,
    PatternSampler,
    RigidSampler,
    ball_count,
    ball_rigid_bound,
    brute_force_sphere,
    exact_pa_bound,
    measure_pa_proportion,
    normal_sequence_counts,
    proportion_table,
    rigid_sphere_bounds,
    sample_with_patterns,
    sphere_count,
    sphere_shape,
    sphere_table,
    word_length,
)
from lw_graph import build_graph, count_loops, count_paths
from pa_certifier import contains_subword

G3 = build_graph(3)
G4 = build_graph(4)


def s(n, *word):
    return SimpleBraid.from_word(n, word)


def _all_paths(g, vertex_count):
    """Every path with the given number of vertices, by plain recursion"""
    found = []

    def extend(path):
        if len(path) == vertex_count:
            found.append(tuple(path))
            return
        for t in g.adjacency[path[-1]]:
            extend(path + [t])

    for v in range(g.size):
        extend([v])
    return found


def _factors(g, path):
    return tuple(g.vertices[v] for v in path)


def _chi_square_critical(df, z=3.090):
    """Upper 0.1% point of chi-square with df degrees of freedom (Wilson-Hilferty)"""
    h = 2 / (9 * df)
    return df * (1 - h + z * math.sqrt(h)) ** 3


def _passes_chi_square(counts, support, draws):
    expected = draws / len(support)
    stat = sum((counts.get(key, 0) - expected) ** 2 / expected for key in support)
    return stat < _chi_square_critical(len(support) - 1)


def test_word_length():
    assert word_length(NormalForm(3, -4)) == 4
    assert word_length(NormalForm(3, 2, (s(3, 1), s(3, 1)))) == 4
    assert word_length(NormalForm(3, -1, (s(3, 2), s(3, 2, 1)))) == 2
    assert word_length(NormalForm(3, -3, (s(3, 1),))) == 3
    assert word_length(NormalForm.identity(3)) == 0


def test_sphere_shape():
    assert sphere_shape(NormalForm(3, -4)) == 'i'
    assert sphere_shape(NormalForm(3, -3, (s(3, 1),))) == 'i'
    assert sphere_shape(NormalForm(3, -1, (s(3, 2), s(3, 2, 1)))) == 'ii'
    assert sphere_shape(NormalForm(3, 0, (s(3, 1),))) == 'ii'
    assert sphere_shape(NormalForm(3, 2, (s(3, 1), s(3, 1)))) == 'iii'
    assert sphere_shape(NormalForm.identity(3)) is None


def test_normal_sequence_counts():
    assert normal_sequence_counts(G3, 0) == [1]
    assert normal_sequence_counts(G3, 4) == [1, 4, 8, 16, 32]
    assert normal_sequence_counts(G4, 2) == [1, 22, count_paths(G4, 1)]


def test_sphere_counts_n3():
    first = sphere_count(G3, 1)
    assert (first.shape_i, first.shape_ii, first.shape_iii) == (1, 8, 1)
    assert [row.total for row in sphere_table(G3, 4)] == [10, 34, 90, 218]
    assert sphere_count(G3, 2).row() == {'l': '2', 'shape_i': '5', 'shape_ii': '24', 'shape_iii': '5', 'total': '34'}
    with pytest.raises(CensusError):
        sphere_count(G3, 0)


def test_spheres_match_breadth_first_search():
    assert brute_force_sphere(3, 4) == [1, 10, 34, 90, 218]
    bfs = brute_force_sphere(4, 2)
    assert bfs[1:] == [row.total for row in sphere_table(G4, 2)]


def test_breadth_first_search_guard():
    with pytest.raises(CensusError):
        brute_force_sphere(4, 3, max_nodes=100)


def test_ball_count():
    assert ball_count(G3, 0) == 1
    assert ball_count(G3, 2) == 45
    assert ball_count(G3, 4) == sum(brute_force_sphere(3, 4))
    with pytest.raises(CensusError):
        ball_count(G3, -1)


def test_path_sampler_uniform():
    sampler = PathSampler(G3, 2)
    assert sampler.total == 8
    rng = random.Random(53)
    counts = Counter(sampler.sample(rng).factors for _ in range(8000))
    assert len(counts) == 8
    assert all(abs(c - 1000) < 150 for c in counts.values())


def test_rigid_sampler_uniform():
    sampler = RigidSampler(G3, 2)
    assert sampler.total == count_loops(G3, 1) == 4
    rng = random.Random(59)
    drawn = [sampler.sample(rng) for _ in range(4000)]
    assert all(is_rigid(x) for x in drawn)
    counts = Counter(x.factors for x in drawn)
    assert len(counts) == 4
    assert all(abs(c - 1000) < 140 for c in counts.values())


def test_path_sampler_chi_square():
    rng = random.Random(131)
    for r in (1, 2, 3, 4):
        support = [_factors(G3, p) for p in _all_paths(G3, r)]
        draws = 20_000
        sampler = PathSampler(G3, r)
        counts = Counter(sampler.sample(rng).factors for _ in range(draws))
        assert set(counts) == set(support)
        assert _passes_chi_square(counts, support, draws)


def test_rigid_sampler_chi_square():
    rng = random.Random(137)
    for r in (1, 2, 3, 4):
        support = [_factors(G3, p) for p in _all_paths(G3, r) if G3.has_edge(p[-1], p[0])]
        assert len(support) == 2 ** r
        draws = 20_000
        sampler = RigidSampler(G3, r)
        counts = Counter(sampler.sample(rng).factors for _ in range(draws))
        assert set(counts) == set(support)
        assert _passes_chi_square(counts, support, draws)


def test_sampler_totals_match_counts():
    for r in (1, 3, 6):
        assert PathSampler(G4, r).total == count_paths(G4, r - 1)
        assert RigidSampler(G4, r).total == count_loops(G4, r - 1)
        assert RigidSampler(G4, r, p=1).total == count_loops(G4, r - 1, twisted=True)


def test_twisted_sampler_gives_rigid_odd_infimum():
    rng = random.Random(61)
    sampler = RigidSampler(G4, 5, p=-1)
    for _ in range(50):
        x = sampler.sample(rng)
        assert x.p == -1
        assert is_rigid(x)


def test_samplers_are_deterministic():
    a = [PathSampler(G4, 6).sample(random.Random(5)) for _ in range(3)]
    assert a[0] == a[1] == a[2]
    rng1, rng2 = random.Random(9), random.Random(9)
    sampler = RigidSampler(G4, 6)
    assert [sampler.sample(rng1) for _ in range(20)] == [sampler.sample(rng2) for _ in range(20)]


def _holding_patterns(g, r, patterns, rigid, p=0):
    """Factor tuples of every braid with r factors containing all patterns, by enumeration"""
    flip = g.tau_index()
    found = []
    for path in _all_paths(g, r):
        if rigid and not g.has_edge(path[-1], flip[path[0]] if p % 2 else path[0]):
            continue
        factors = _factors(g, path)
        if all(contains_subword(factors, pat.factors) is not None for pat in patterns):
            found.append(factors)
    return found


def test_pattern_sampler_totals_match_enumeration():
    both = [x_A(3), x_B(3)]
    for r in (4, 5, 6, 7):
        assert PatternSampler(G3, r, both).total == len(_holding_patterns(G3, r, both, rigid=True))
        assert PatternSampler(G3, r, both, rigid=False).total == len(_holding_patterns(G3, r, both, rigid=False))
        assert PatternSampler(G3, r, both, p=1).total == len(_holding_patterns(G3, r, both, rigid=True, p=1))
    for r in (2, 3, 4):
        found = _holding_patterns(G4, r, [x_A(4)], rigid=True)
        assert PatternSampler(G4, r, [x_A(4)]).total == len(found)


def test_pattern_sampler_without_patterns_is_the_rigid_sampler():
    for r in (1, 3, 5):
        assert PatternSampler(G4, r, []).total == RigidSampler(G4, r).total
        assert PatternSampler(G4, r, [], rigid=False).total == PathSampler(G4, r).total


def test_pattern_sampler_chi_square():
    both = [x_A(3), x_B(3)]
    support = _holding_patterns(G3, 7, both, rigid=True)
    sampler = PatternSampler(G3, 7, both)
    assert sampler.total == len(support) > 1
    rng = random.Random(139)
    draws = 400 * len(support)
    counts = Counter(sampler.sample(rng).factors for _ in range(draws))
    assert set(counts) == set(support)
    assert _passes_chi_square(counts, support, draws)


def test_pattern_sampler_draws():
    rng = random.Random(71)
    sampler = PatternSampler(G3, 20, [x_A(3), x_B(3)])
    for _ in range(20):
        x = sampler.sample(rng)
        assert len(x.factors) == 20
        assert is_rigid(x)
        assert contains_subword(x, x_A(3).factors) is not None
        assert contains_subword(x, x_B(3).factors) is not None
    twisted = PatternSampler(G4, 9, [x_B(4)], p=1)
    for _ in range(10):
        x = twisted.sample(rng)
        assert x.p == 1
        assert is_rigid(x)
        assert contains_subword(x, x_B(4).factors) is not None
    path = sample_with_patterns(G4, 15, [x_B(4)], rng, rigid=False)
    assert contains_subword(path, x_B(4).factors) is not None


def test_pattern_sampler_errors():
    rng = random.Random(73)
    with pytest.raises(CensusError):
        PatternSampler(G3, 3, [x_B(3)])
    with pytest.raises(CensusError):
        PatternSampler(G3, 0, [x_A(3)])
    # sigma_1 sigma_2 has no edge to itself, so no rigid braid is that one factor
    with pytest.raises(CensusError):
        sample_with_patterns(G3, 1, [NormalForm(3, 0, (s(3, 1, 2),))], rng)


def test_exact_pa_bound():
    small = exact_pa_bound(G3, 20)
    large = exact_pa_bound(G3, 120)
    assert isinstance(small, Fraction)
    assert 0 < small <= 1
    assert small < large <= 1
    with pytest.raises(CensusError):
        exact_pa_bound(G3, 0)


def test_measure_without_samples():
    report = measure_pa_proportion(G3, 10, 0, seed=1)
    assert report.error == "no samples requested"
    assert not report.dominates_bound()
    assert report.to_dict()['exact_bound_num'] is None


def test_measured_proportion_dominates_bound():
    report = measure_pa_proportion(G3, 40, 1000, seed=3, check_soundness=True)
    assert report.certified + report.witness + report.inconclusive == 1000
    assert report.soundness_violations == 0
    assert report.dominates_bound()
    payload = report.to_dict()
    assert payload['l'] == 39
    assert Fraction(int(payload['exact_bound_num']), int(payload['exact_bound_den'])) == report.exact_bound


def test_measurement_independent_of_workers():
    one = measure_pa_proportion(G3, 30, 300, seed=11, workers=1, chunk_size=100)
    three = measure_pa_proportion(G3, 30, 300, seed=11, workers=3, chunk_size=100)
    assert (one.certified, one.witness, one.inconclusive) == (three.certified, three.witness, three.inconclusive)


def test_rigid_sphere_bounds():
    bounds = rigid_sphere_bounds(G3, 6)
    assert [b.l for b in bounds] == list(range(1, 7))
    for b in bounds:
        assert 0 <= b.even_k <= b.all_k <= b.sphere_total
        assert 0 <= b.proportion_even <= b.proportion_all <= 1
    certified, size = ball_rigid_bound(bounds, 6)
    assert size == ball_count(G3, 6)
    assert 0 <= certified <= size
    with pytest.raises(CensusError):
        ball_rigid_bound(bounds[:3], 6)


def test_proportion_table():
    rows = proportion_table(G3, [20, 40], samples=0, seed=0)
    assert [row.r for row in rows] == [20, 40]
    assert rows[0].row()['sampled'] == ''
    assert rows[0].row()['l'] == '19'
    assert Fraction(int(rows[1].row()['exact_bound_num']), int(rows[1].row()['exact_bound_den'])) == exact_pa_bound(G3, 40)


if __name__ == "__main__":
    print("Testing census...\n")
    results = {}
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
                results[name] = True
            except AssertionError:
                results[name] = False

    print("\n=== Results ===")
    for name, success in results.items():
        status = "✓" if success else "✗"
        print(f"{status} {name}")
