"""
Tests for round curves, their transport, and strand crossing profiles
"""
import random

import pytest

from braid_core import (
    NormalForm,
    NotRigidError,
    SimpleBraid,
    delta,
    multiply,
    normal_form,
    power,
    random_word,
    simple_braids,
    x_A,
    x_B,
)
from census import RigidSampler
from curves import (
    CurveError,
    RoundCurve,
    all_round_curves,
    always_crossing_pairs,
    crossing_profile,
    image_round,
    never_crossing_pairs,
    preserved_round_curve_power,
    transport_round,
)
from lw_graph import build_graph


def s(n, *word):
    return SimpleBraid.from_word(n, word)


def c(n, lo, hi):
    return RoundCurve(n, lo, hi)


def _transport_by_hand(x, curve):
    """Image of the puncture set under Delta^p then each factor, round or not"""
    points = set(curve.punctures())
    if x.p % 2:
        points = {x.n + 1 - i for i in points}
    for f in x.factors:
        points = {f.perm(i) for i in points}
        if max(points) - min(points) != len(points) - 1:
            return None
    return RoundCurve(x.n, min(points), max(points))


def test_round_curve_validation():
    assert str(c(4, 2, 3)) == "[2,3]"
    assert c(4, 2, 3).to_json() == [2, 3]
    with pytest.raises(CurveError):
        c(4, 1, 4)
    with pytest.raises(CurveError):
        c(4, 3, 3)
    with pytest.raises(CurveError):
        c(4, 0, 2)


def test_all_round_curves():
    assert all_round_curves(3) == [c(3, 1, 2), c(3, 2, 3)]
    assert len(all_round_curves(4)) == 5
    assert len(all_round_curves(6)) == 14


def test_image_round_n3():
    table = {
        (1, 2): {(1,): (1, 2), (2,): None, (1, 2): None, (2, 1): (2, 3)},
        (2, 3): {(1,): None, (2,): (2, 3), (1, 2): (1, 2), (2, 1): None},
    }
    for (lo, hi), images in table.items():
        for word, expected in images.items():
            result = image_round(s(3, *word), c(3, lo, hi))
            assert result == (c(3, *expected) if expected else None)


def test_identity_and_delta():
    for n in (3, 4, 5):
        for curve in all_round_curves(n):
            assert image_round(SimpleBraid.identity(n), curve) == curve
            assert image_round(delta(n), curve) == c(n, n + 1 - curve.hi, n + 1 - curve.lo)
    assert image_round(delta(5), c(5, 2, 3)) == c(5, 3, 4)


def test_image_round_rejects_other_strand_count():
    with pytest.raises(CurveError):
        image_round(s(4, 1), c(3, 1, 2))


def test_transport_matches_composition():
    rng = random.Random(41)
    for n in (3, 4, 5):
        g = build_graph(n)
        for p in (0, 1, -1, 2):
            sampler = RigidSampler(g, 4, p)
            for _ in range(20):
                x = sampler.sample(rng)
                for curve in all_round_curves(n):
                    assert transport_round(x, curve) == _transport_by_hand(x, curve)


def test_transport_through_negative_infimum():
    x = NormalForm(3, -1, (s(3, 2), s(3, 2, 1)))
    assert transport_round(x, c(3, 2, 3)) is None
    assert transport_round(NormalForm(3, 1), c(3, 1, 2)) == c(3, 2, 3)
    assert transport_round(NormalForm(3, 2), c(3, 1, 2)) == c(3, 1, 2)


def test_delta_squared_invariance():
    rng = random.Random(43)
    g = build_graph(4)
    sampler = RigidSampler(g, 5)
    for _ in range(20):
        x = sampler.sample(rng)
        for curve in all_round_curves(4):
            assert transport_round(NormalForm(4, x.p + 2, x.factors), curve) == transport_round(x, curve)


def test_x_A_breaks_every_round_curve():
    for n in (3, 4, 5, 6):
        for curve in all_round_curves(n):
            assert transport_round(x_A(n), curve) is None


def test_preserved_round_curve_power():
    assert preserved_round_curve_power(NormalForm(3, 0, (s(3, 1), s(3, 1)))) == (1, c(3, 1, 2))
    assert preserved_round_curve_power(NormalForm(3, 0, (s(3, 2),) * 3)) == (1, c(3, 2, 3))
    loop_with_x_A = NormalForm(3, 0, (s(3, 1), s(3, 1, 2), s(3, 2, 1)))
    assert preserved_round_curve_power(loop_with_x_A) is None


def test_preserved_round_curve_power_needs_rigid():
    with pytest.raises(NotRigidError):
        preserved_round_curve_power(NormalForm(3, 0, (s(3, 1, 2),)))
    with pytest.raises(NotRigidError):
        preserved_round_curve_power(NormalForm(3, 1))


def test_preserved_curve_really_preserved():
    rng = random.Random(47)
    g = build_graph(4)
    for r in (1, 2, 3):
        sampler = RigidSampler(g, r)
        for _ in range(20):
            x = sampler.sample(rng)
            found = preserved_round_curve_power(x)
            if found is not None:
                k, curve = found
                assert transport_round(power(x, k), curve) == curve


def test_crossing_profile_single_generator():
    profile = crossing_profile((s(3, 1),))
    assert never_crossing_pairs(profile) == {(1, 3), (2, 3)}
    assert always_crossing_pairs(profile) == {(1, 2)}
    assert profile.crossing_count(2, 1) == 1


def test_crossing_profile_x_B():
    profile = crossing_profile(x_B(3).factors)
    assert never_crossing_pairs(profile) == set()
    assert always_crossing_pairs(profile) == set()
    assert profile.cross[(1, 3)] == frozenset({1, 2, 3})


def test_crossing_profile_deltas():
    profile = crossing_profile((delta(4), delta(4)))
    assert always_crossing_pairs(profile) == set(profile.cross)
    assert never_crossing_pairs(profile) == set()


def test_crossing_profile_errors():
    with pytest.raises(CurveError):
        crossing_profile(())
    with pytest.raises(CurveError):
        crossing_profile((s(3, 1), s(4, 1)))


def test_every_simple_braid_maps_round_to_round_or_none():
    for b in simple_braids(4):
        for curve in all_round_curves(4):
            image = image_round(b, curve)
            if image is not None:
                assert image.hi - image.lo == curve.hi - curve.lo


def test_transport_is_functorial():
    rng = random.Random(53)
    compared = 0
    for _ in range(1000):
        n = rng.randint(3, 5)
        x = normal_form(random_word(n, rng.randint(0, 8), rng))
        y = normal_form(random_word(n, rng.randint(0, 8), rng))
        curve = rng.choice(all_round_curves(n))
        middle = transport_round(x, curve)
        if middle is None:
            continue
        compared += 1
        assert transport_round(multiply(x, y), curve) == transport_round(y, middle)
        assert transport_round(multiply(x, y), curve) == _transport_by_hand(y, middle)
    assert compared > 50


def test_crossings_account_for_every_letter():
    rng = random.Random(59)
    for n in (3, 4, 5):
        sampler = RigidSampler(build_graph(n), 6)
        for _ in range(30):
            factors = sampler.sample(rng).factors
            profile = crossing_profile(factors)
            for index, f in enumerate(factors, start=1):
                hits = sum(1 for pair in profile.cross.values() if index in pair)
                assert hits == len(f.word())
            position = list(range(1, n + 1))
            for f in factors:
                position = [f.perm(pos) for pos in position]
            for a, b in profile.cross:
                swapped = position[a - 1] > position[b - 1]
                assert profile.crossing_count(a, b) % 2 == swapped


if __name__ == "__main__":
    print("Testing curves...\n")
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
