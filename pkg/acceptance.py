"""
Acceptance checks run by `braid_lab.py verify`.

Each check prints its own section and returns True/False; checks that do not
apply at the requested strand count are skipped (None).
"""
import itertools
import logging
import random
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from braid_core import (
    NormalForm,
    Permutation,
    SimpleBraid,
    is_left_weighted,
    simple_braids,
    x_A,
    x_B,
)
from census import (
    PathSampler,
    PatternSampler,
    brute_force_sphere,
    ball_count,
    measure_pa_proportion,
    sphere_shape,
    sphere_table,
    word_length,
)
from curves import RoundCurve, all_round_curves, image_round, preserved_round_curve_power, transport_round
from lw_graph import (
    DEFAULT_LIFT_CAP,
    LWGraph,
    avoiding_series,
    build_graph,
    check_connectivity,
    check_length5,
    first_generic_length,
    forbidden_lift,
    loop_series,
    path_series,
    spectral_radius,
    witness_path,
)
from pa_certifier import VerdictKind, certify, contains_subword

logger = logging.getLogger(__name__)

# strand counts each check is stated for
APPLIES_TO = {
    'left-weighting oracle': {3, 4},
    'length-5 connectivity': {3, 4, 5, 6},
    'exact counts': {3},
    'Perron-Frobenius ratios': {3, 4, 5},
    'strict spectral gap': {3, 4, 5},
    'avoidance oracle': {3},
    'rigid genericity': {3, 4},
    'sphere and ball': {3, 4, 5},
    'certifier soundness': {4},
    'round-curve transport': {3, 4, 6},
}


def raw_left_weighted(a: SimpleBraid, b: SimpleBraid) -> bool:
    """No sigma_i with a.sigma_i and sigma_i^-1.b both simple, tested through inversion counts"""
    n = a.n
    for i in range(1, n):
        t = Permutation.transposition(n, i)
        grows = a.perm.then(t).inversions() == a.perm.inversions() + 1
        splits = t.then(b.perm).inversions() == b.perm.inversions() - 1
        if grows and splits:
            return False
    return True


def check_left_weighting_oracle(g: LWGraph, **_) -> bool:
    """is_left_weighted agrees with the inversion-count definition on every ordered pair"""
    print("\n=== Left-weighting oracle ===")
    simples = list(simple_braids(g.n))
    mismatches = [(a, b) for a in simples for b in simples if is_left_weighted(a, b) != raw_left_weighted(a, b)]
    print(f"{len(simples) ** 2} ordered pairs, {len(mismatches)} mismatches")
    return not mismatches


def check_connectivity_five(g: LWGraph, seed: int = 0, **_) -> bool:
    """A^5 is positive, A is not, and the explicit witness path checks out"""
    print("\n=== Length-5 connectivity ===")
    cert = check_length5(g)
    print(f"A^5 positive: {cert.holds}")
    if not cert.holds:
        print(f"  zero entry at {cert.violating_pair}")
        return False
    if check_connectivity(g, 1).holds:
        print("  A^1 unexpectedly positive")
        return False

    vertices = g.vertices
    if g.n <= 5:
        pairs = itertools.product(vertices, vertices)
        label = "all"
    else:
        rng = random.Random(seed)
        pairs = [(rng.choice(vertices), rng.choice(vertices)) for _ in range(1000)]
        label = "1000 random"
    checked = 0
    for s1, s2 in pairs:
        witness_path(g, s1, s2)
        checked += 1
    print(f"witness paths verified for {label} pairs ({checked})")
    return True


def check_exact_counts(g: LWGraph, **_) -> bool:
    """Closed forms N(l) = 4*2^l and N°(l) = 2^(l+1) at n=3"""
    print("\n=== Exact counts at n=3 ===")
    paths = path_series(g, 30)
    loops = loop_series(g, 30)
    ok = all(paths[l] == 4 * 2 ** l and loops[l] == 2 ** (l + 1) for l in range(31))
    ok = ok and all(Fraction(loops[l], paths[l]) == Fraction(1, 2) for l in range(1, 31))
    print(f"N(l) = 4*2^l, N°(l) = 2^(l+1), ratio 1/2 for l <= 30: {ok}")
    return ok


def check_perron_frobenius(g: LWGraph, **_) -> bool:
    """Successive loop ratios settle on the power-iteration gamma"""
    print("\n=== Perron-Frobenius ratios ===")
    loops = loop_series(g, 201)
    ratio_200 = loops[201] / loops[200]
    ratio_199 = loops[200] / loops[199]
    report = spectral_radius(g)
    print(f"ratio(199) = {ratio_199:.12f}, ratio(200) = {ratio_200:.12f}")
    print(f"power iteration gamma = {report.gamma:.12f} (residual {report.residual:.2e})")
    return abs(ratio_200 - ratio_199) < 1e-8 and abs(report.gamma - ratio_200) < 1e-6


def check_spectral_gap(g: LWGraph, lift_cap: int = DEFAULT_LIFT_CAP, **_) -> bool:
    """
    Avoiding either pattern lowers gamma by more than 1e-6. At n=5 the x_B
    margin is about 1.6e-8, so this check fails there.
    """
    print("\n=== Strict spectral gap ===")
    gamma = spectral_radius(g).gamma
    ok = True
    for name, pattern in (('x_A', x_A(g.n)), ('x_B', x_B(g.n))):
        gk = forbidden_lift(g, [pattern], lift_cap)
        gamma_w = spectral_radius(gk).gamma
        margin = gamma - gamma_w
        print(f"gamma = {gamma:.10f}, gamma_w({name}) = {gamma_w:.10f}, margin {margin:.3e} "
              f"(lift of order {gk.k}, {gk.size} vertices)")
        if margin <= 1e-6:
            print(f"⚠ margin for {name} is below 1e-6")
            ok = False
    return ok


def _brute_counts(g: LWGraph, pattern: NormalForm, l: int) -> Tuple[int, int]:
    """Avoiding paths and loops by enumerating factor words directly"""
    paths = loops = 0
    stack = [[v] for v in g.vertices]
    while stack:
        word = stack.pop()
        if len(word) < l + 1:
            stack.extend(word + [t] for t in g.vertices if is_left_weighted(word[-1], t))
            continue
        if contains_subword(word, pattern.factors) is not None:
            continue
        paths += 1
        if is_left_weighted(word[-1], word[0]):
            loops += 1
    return paths, loops


def check_avoidance_oracle(g: LWGraph, lift_cap: int = DEFAULT_LIFT_CAP, **_) -> bool:
    """Lifted avoidance counts match enumeration for l <= 12"""
    print("\n=== Avoidance counts against enumeration ===")
    ok = True
    for name, pattern in (('x_A', x_A(g.n)), ('x_B', x_B(g.n))):
        paths_w, loops_w = avoiding_series(g, [pattern], 12, cap=lift_cap)
        for l in range(13):
            if (paths_w[l], loops_w[l]) != _brute_counts(g, pattern, l):
                print(f"  {name} l={l}: mismatch")
                ok = False
        print(f"{name}: l <= 12 {'agree' if ok else 'DISAGREE'}")
    return ok


def check_genericity(g: LWGraph, samples: int = 10_000, seed: int = 0, workers: int = 1,
                     lift_cap: int = DEFAULT_LIFT_CAP, cache_dir: Optional[str] = None, **_) -> bool:
    """First length where the exact bound passes 95%, then sampling at that length must reach it"""
    print("\n=== Genericity among rigid braids ===")
    l = first_generic_length(g, 0.05, 200, cap=lift_cap)
    if l is None:
        print("⚠ bound N°_xA + N°_xB < 0.05 N° not reached for l <= 200")
        return False
    report = measure_pa_proportion(g, l, samples, seed, workers, cap=lift_cap, cache_dir=cache_dir)
    lo, hi = report.ci
    print(f"first generic length l = {l}; exact bound {float(report.exact_bound):.6f}")
    print(f"sampled certified {report.proportion_certified:.6f} (3 sigma [{lo:.6f}, {hi:.6f}], {samples} samples)")
    return report.dominates_bound()


def _random_shape(samplers: Dict[int, PathSampler], g: LWGraph, rng: random.Random) -> Tuple[NormalForm, int, str]:
    """A braid built to have one of the three sphere shapes at a random radius l <= 8"""
    l = rng.randint(1, 8)
    shape = rng.choice(('i', 'ii', 'iii'))
    if shape == 'i':
        p, r = -l, rng.randrange(l)
    elif shape == 'ii':
        p, r = -rng.randint(0, l), l
    else:
        p = rng.randint(1, l)
        r = l - p
    if r == 0:
        return NormalForm(g.n, p), l, shape
    if r not in samplers:
        samplers[r] = PathSampler(g, r)
    return NormalForm(g.n, p, samplers[r].sample(rng).factors), l, shape


def check_sphere_and_ball(g: LWGraph, samples: int = 10_000, seed: int = 0, **_) -> bool:
    """Counted spheres match BFS at n=3, and built shapes have the intended length and shape"""
    print("\n=== Spheres and balls ===")
    ok = True
    if g.n == 3:
        bfs = brute_force_sphere(3, 4)
        exact = [1] + [s.total for s in sphere_table(g, 4)]
        balls = [ball_count(g, l) for l in range(5)]
        ok = bfs == exact and balls == [sum(bfs[:l + 1]) for l in range(5)]
        print(f"BFS spheres {bfs}, counted {exact}: {'agree' if ok else 'DISAGREE'}")
    rng = random.Random(seed)
    samplers: Dict[int, PathSampler] = {}
    bad = 0
    for _ in range(samples):
        x, l, shape = _random_shape(samplers, g, rng)
        if word_length(x) != l or sphere_shape(x) != shape:
            bad += 1
    print(f"{samples} random shaped braids, {bad} with wrong length or shape")
    return ok and bad == 0


def check_certifier(g: LWGraph, samples: int = 1000, seed: int = 0, lift_cap: int = DEFAULT_LIFT_CAP, **_) -> bool:
    """Uniform rigid braids holding both patterns certify, and sigma_1 powers give witnesses"""
    print("\n=== Certifier soundness ===")
    rng = random.Random(seed)
    count = min(samples, 1000)
    sampler = PatternSampler(g, 60, [x_A(g.n), x_B(g.n)], cap=lift_cap)
    failures = 0
    for _ in range(count):
        x = sampler.sample(rng)
        verdict = certify(x)
        if not verdict.certified or preserved_round_curve_power(x) is not None:
            failures += 1
    print(f"{count} of {sampler.total} rigid braids with both patterns, {failures} failures")

    sigma1 = SimpleBraid.generator(g.n, 1)
    powers_ok = all(
        certify(NormalForm(g.n, 0, (sigma1,) * l)).kind is VerdictKind.REDUCIBILITY_WITNESS
        for l in range(1, 8)
    )
    print(f"sigma_1 powers give reducibility witnesses: {powers_ok}")
    return failures == 0 and powers_ok


ROUND_IMAGES_N3 = {
    ((2, 1, 3), (1, 2)): (1, 2),
    ((2, 1, 3), (2, 3)): None,
    ((1, 3, 2), (1, 2)): None,
    ((1, 3, 2), (2, 3)): (2, 3),
    ((3, 1, 2), (1, 2)): None,
    ((3, 1, 2), (2, 3)): (1, 2),
    ((2, 3, 1), (1, 2)): (2, 3),
    ((2, 3, 1), (2, 3)): None,
}


def check_round_transport(g: LWGraph, samples: int = 1000, seed: int = 0, lift_cap: int = DEFAULT_LIFT_CAP, **_) -> bool:
    """Single-factor images at n=3, and no round image for braids containing x_A"""
    print("\n=== Round-curve transport ===")
    ok = True
    if g.n == 3:
        for (image, (lo, hi)), expected in ROUND_IMAGES_N3.items():
            got = image_round(SimpleBraid.from_image(image), RoundCurve(3, lo, hi))
            interval = (got.lo, got.hi) if got is not None else None
            if interval != expected:
                ok = False
        print(f"single-factor images at n=3: {'match' if ok else 'MISMATCH'}")
    rng = random.Random(seed)
    curves = all_round_curves(g.n)
    count = min(samples, 1000)
    sampler = PatternSampler(g, 12, [x_A(g.n)], rigid=False, cap=lift_cap)
    round_images = 0
    for _ in range(count):
        x = sampler.sample(rng)
        x = NormalForm(g.n, rng.randint(-3, 3), x.factors)
        round_images += sum(transport_round(x, c) is not None for c in curves)
    print(f"{count} braids containing x_A, {round_images} round images")
    return ok and round_images == 0


CHECKS: List[Tuple[str, Callable[..., bool]]] = [
    ('left-weighting oracle', check_left_weighting_oracle),
    ('length-5 connectivity', check_connectivity_five),
    ('exact counts', check_exact_counts),
    ('Perron-Frobenius ratios', check_perron_frobenius),
    ('strict spectral gap', check_spectral_gap),
    ('avoidance oracle', check_avoidance_oracle),
    ('rigid genericity', check_genericity),
    ('sphere and ball', check_sphere_and_ball),
    ('certifier soundness', check_certifier),
    ('round-curve transport', check_round_transport),
]


def run_acceptance(g: LWGraph, samples: int = 10_000, seed: int = 0, workers: int = 1,
                   lift_cap: int = DEFAULT_LIFT_CAP, cache_dir: Optional[str] = None) -> Dict[str, Optional[bool]]:
    """Run every check that applies at g.n; skipped checks map to None"""
    results: Dict[str, Optional[bool]] = {}
    for name, check in CHECKS:
        if g.n not in APPLIES_TO[name]:
            results[name] = None
            continue
        logger.info(f"acceptance check '{name}' at n={g.n}")
        results[name] = check(g, samples=samples, seed=seed, workers=workers, lift_cap=lift_cap, cache_dir=cache_dir)

    print("\n=== Results ===")
    for name, success in results.items():
        status = "-" if success is None else "✓" if success else "✗"
        print(f"{status} {name}")
    return results


if __name__ == "__main__":
    run_acceptance(build_graph(3), samples=1000)
