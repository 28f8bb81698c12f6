"""
Spheres and balls of the Cayley graph over simple braids, uniform samplers,
and the rigid pseudo-Anosov proportion measurements.

Conventions shared with lw_graph: P(r) is the number of r-factor normal
sequences (P(0) = 1, P(r) = N(r-1)); a rigid braid with r factors is a loop
counted by N°(r-1).
"""
import logging
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from braid_core import NormalForm, invert, multiply, simple_braids
from curves import preserved_round_curve_power
from lw_graph import (
    DEFAULT_LIFT_CAP,
    GraphError,
    LWGraph,
    cached_graph,
    closing_matrix,
    count_loops,
    lift,
    path_series,
    pattern_indices,
    pull,
    rigid_pa_lower_count,
    rigid_pa_series,
)
from pa_certifier import VerdictKind, certify, contains_subword

logger = logging.getLogger(__name__)

CONVENTION_NOTE = "P(r) counts r-factor normal sequences; rigid braids with r factors are loops N°(r-1)"


class CensusError(ValueError):
    """Census request out of range or over a size guard"""


def word_length(x: NormalForm) -> int:
    """Distance to the identity in the Cayley graph over simple braids and their inverses"""
    low = x.p
    high = x.p + len(x.factors)
    if low >= 0:
        return high
    if high <= 0:
        return -low
    return high - low


def sphere_shape(x: NormalForm) -> Optional[str]:
    """Which normal-form shape ('i', 'ii', 'iii') x has at its own distance; None for the identity"""
    l = word_length(x)
    p, r = x.p, len(x.factors)
    if l == 0:
        return None
    if p == -l and r < l:
        return 'i'
    if r == l and -l <= p <= 0:
        return 'ii'
    if 1 <= p <= l and r == l - p:
        return 'iii'
    raise CensusError(f"normal form with inf {p} and {r} factors fits no sphere shape")


@dataclass
class SphereShapeCounts:
    """Sizes of the three normal-form shapes making up the l-sphere"""
    l: int
    shape_i: int
    shape_ii: int
    shape_iii: int

    @property
    def total(self) -> int:
        return self.shape_i + self.shape_ii + self.shape_iii

    def row(self) -> Dict[str, str]:
        return {
            'l': str(self.l),
            'shape_i': str(self.shape_i),
            'shape_ii': str(self.shape_ii),
            'shape_iii': str(self.shape_iii),
            'total': str(self.total),
        }


def normal_sequence_counts(g: LWGraph, r_max: int) -> List[int]:
    """[P(0), ..., P(r_max)]"""
    if r_max == 0:
        return [1]
    return [1] + path_series(g, r_max - 1)


def _shapes(l: int, P: Sequence[int]) -> SphereShapeCounts:
    # shape (i): Delta^-l times r < l factors; (ii): l factors after Delta^p, -l <= p <= 0; (iii): Delta^p with l - p factors
    return SphereShapeCounts(
        l,
        shape_i=sum(P[k] for k in range(l)),
        shape_ii=(l + 1) * P[l],
        shape_iii=sum(P[l - k] for k in range(1, l + 1)),
    )


def sphere_count(g: LWGraph, l: int) -> SphereShapeCounts:
    """Size of the sphere of radius l, split by normal-form shape"""
    if l < 1:
        raise CensusError(f"sphere radius must be at least 1, got {l}")
    return _shapes(l, normal_sequence_counts(g, l))


def sphere_table(g: LWGraph, l_max: int) -> List[SphereShapeCounts]:
    """sphere_count for l = 1..l_max from one series of path counts"""
    P = normal_sequence_counts(g, l_max)
    return [_shapes(l, P) for l in range(1, l_max + 1)]


def ball_count(g: LWGraph, l: int) -> int:
    """Braids within distance l of the identity"""
    if l < 0:
        raise CensusError(f"ball radius must be non-negative, got {l}")
    return 1 + sum(s.total for s in sphere_table(g, l))


def _generators(n: int) -> List[NormalForm]:
    """Every nontrivial simple braid, Delta included, and its inverse"""
    gens = []
    for s in simple_braids(n):
        if s.is_identity():
            continue
        x = NormalForm(n, 1) if s.is_delta() else NormalForm(n, 0, (s,))
        gens.append(x)
        gens.append(invert(x))
    return gens


def brute_force_sphere(n: int, l_max: int, max_nodes: int = 200_000) -> List[int]:
    """Sphere sizes for radius 0..l_max by breadth-first search"""
    gens = _generators(n)
    seen = {NormalForm.identity(n)}
    frontier = [NormalForm.identity(n)]
    sizes = [1]
    for radius in range(1, l_max + 1):
        nxt = []
        for x in frontier:
            for gen in gens:
                y = multiply(x, gen)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
                    if len(seen) > max_nodes:
                        raise CensusError(f"breadth-first search passed {max_nodes} braids at radius {radius}")
        sizes.append(len(nxt))
        frontier = nxt
        logger.debug(f"BFS n={n} radius {radius}: {len(nxt)} braids")
    return sizes


# ---------------------------------------------------------------- samplers

def _weighted_choice(rng: random.Random, options: Sequence[int], weights: Sequence[int]) -> int:
    """An option drawn with probability weight / total, exact for big integer weights"""
    total = sum(weights)
    if total <= 0:
        raise CensusError("no completion to sample from")
    ticket = rng.randrange(total)
    for option, weight in zip(options, weights):
        if ticket < weight:
            return option
        ticket -= weight
    raise CensusError("weighted choice fell off the end")


class PathSampler:
    """Uniform normal forms Delta^p s_1 ... s_r, weighted by exact completion counts"""

    def __init__(self, g: LWGraph, r: int, p: int = 0):
        if r < 1:
            raise CensusError(f"need at least one factor, got r={r}")
        self.g, self.r, self.p = g, r, p
        indptr, indices = g.csr()
        # completions[m][v]: paths with m vertices starting at v
        self.completions = [None, np.ones(g.size, dtype=object)]
        for _ in range(r - 1):
            self.completions.append(pull(indptr, indices, self.completions[-1]))

    @property
    def total(self) -> int:
        """Number of normal forms the sampler draws from"""
        return int(self.completions[self.r].sum())

    def sample(self, rng: random.Random) -> NormalForm:
        """Draw one normal form; each step is weighted by the completions left after it"""
        g = self.g
        v = _weighted_choice(rng, range(g.size), list(self.completions[self.r]))
        path = [v]
        for remaining in range(self.r - 1, 0, -1):
            row = g.adjacency[v]
            v = _weighted_choice(rng, row, [self.completions[remaining][u] for u in row])
            path.append(v)
        return NormalForm(g.n, self.p, tuple(g.vertices[u] for u in path))


class RigidSampler:
    """
    Uniform rigid braids Delta^p s_1 ... s_r. The closing edge runs from s_r
    to s_1, or to tau(s_1) when p is odd.
    """

    def __init__(self, g: LWGraph, r: int, p: int = 0):
        if r < 1:
            raise CensusError(f"need at least one factor, got r={r}")
        self.g, self.r, self.p = g, r, p
        flip = g.tau_index()
        self.target = [flip[v] for v in range(g.size)] if p % 2 else list(range(g.size))
        indptr, indices = g.csr()
        # ends[m][v, a]: paths with m vertices from v whose last vertex has an edge to a
        first = np.zeros((g.size, g.size), dtype=object)
        for v, row in enumerate(g.adjacency):
            first[v, row] = 1
        self.ends = [None, first]
        for _ in range(r - 1):
            self.ends.append(pull(indptr, indices, self.ends[-1]))

    def start_weights(self) -> List[int]:
        """Rigid braids starting at each vertex"""
        table = self.ends[self.r]
        return [table[v, self.target[v]] for v in range(self.g.size)]

    @property
    def total(self) -> int:
        return sum(self.start_weights())

    def sample(self, rng: random.Random) -> NormalForm:
        """Draw the first vertex by loop count, then each next vertex by completions that still close"""
        g = self.g
        v = _weighted_choice(rng, range(g.size), self.start_weights())
        goal = self.target[v]
        path = [v]
        for remaining in range(self.r - 1, 0, -1):
            row = g.adjacency[v]
            v = _weighted_choice(rng, row, [self.ends[remaining][u, goal] for u in row])
            path.append(v)
        return NormalForm(g.n, self.p, tuple(g.vertices[u] for u in path))


def sample_uniform_path(g: LWGraph, r: int, rng: random.Random) -> NormalForm:
    """One uniform normal form with infimum 0 and r factors"""
    return PathSampler(g, r).sample(rng)


def sample_uniform_rigid(g: LWGraph, r: int, rng: random.Random, p: int = 0) -> NormalForm:
    """One uniform rigid braid with infimum p and r factors"""
    return RigidSampler(g, r, p).sample(rng)


def _pull_flagged(indptr: np.ndarray, indices: np.ndarray, gains: np.ndarray, table: np.ndarray) -> np.ndarray:
    """out[f, u] = sum of table[f | gains[e], w] over the edges e = u -> w"""
    out = np.zeros_like(table)
    rows = np.flatnonzero(indptr[1:] > indptr[:-1])
    if rows.size:
        for flags in range(table.shape[0]):
            out[flags, rows] = np.add.reduceat(table[flags | gains, indices], indptr[rows], axis=0)
    return out


class PatternSampler:
    """
    Uniform normal forms Delta^p s_1 ... s_r whose factors contain every
    pattern as a run of consecutive factors, rigid or not.

    The walk runs on the lift that sees the longest pattern and carries one
    bit per pattern already seen. Completion counts are conditioned on ending
    with every bit set (and, for rigid braids, on the closing edge), so each
    qualifying braid is drawn with the same probability.
    """

    def __init__(self, g: LWGraph, r: int, patterns: Sequence[NormalForm], rigid: bool = True, p: int = 0,
                 cap: int = DEFAULT_LIFT_CAP):
        if r < 1:
            raise CensusError(f"need at least one factor, got r={r}")
        idx = [pattern_indices(g, pat) for pat in patterns]
        longest = max((len(pat) for pat in idx), default=1)
        if longest > r:
            raise CensusError(f"a pattern of {longest} factors does not fit in {r} factors")
        self.g, self.r, self.p, self.rigid = g, r, p, rigid
        self.gk = gk = lift(g, max(1, longest - 1), cap)
        full = (1 << len(idx)) - 1
        indptr, indices = gk.csr()

        # flags[u]: patterns inside the first lifted vertex; gains[e]: patterns ending on edge e
        self.flags = [self._seen(path, idx) for path in gk.paths]
        sources = np.repeat(np.arange(gk.size), np.diff(indptr))
        self.gains = np.array([self._ending(gk.window(int(u), int(v)), idx) for u, v in zip(sources, indices)],
                              dtype=np.int64)

        if rigid:
            close, firsts = closing_matrix(gk, twisted=bool(p % 2))
            self.firsts = [int(a) for a in firsts]
            end = np.zeros((full + 1, gk.size, g.size), dtype=object)
            end[full] = close
        else:
            self.firsts = [0] * gk.size
            end = np.zeros((full + 1, gk.size), dtype=object)
            end[full] = 1
        # completions[t][f, u]: ways to take t more lifted steps from u holding flags f
        self.completions = [end]
        for _ in range(r - gk.k):
            self.completions.append(_pull_flagged(indptr, indices, self.gains, self.completions[-1]))

    @staticmethod
    def _seen(path: Tuple[int, ...], patterns: Sequence[Tuple[int, ...]]) -> int:
        return sum(1 << i for i, pat in enumerate(patterns) if contains_subword(path, pat) is not None)

    @staticmethod
    def _ending(window: Tuple[int, ...], patterns: Sequence[Tuple[int, ...]]) -> int:
        return sum(1 << i for i, pat in enumerate(patterns) if window[-len(pat):] == pat)

    def _count(self, table: np.ndarray, flags: int, u: int, goal: int) -> int:
        return table[flags, u, goal] if self.rigid else table[flags, u]

    def start_weights(self) -> List[int]:
        """Qualifying braids whose first lifted vertex is u, for each u"""
        table = self.completions[-1]
        return [self._count(table, self.flags[u], u, self.firsts[u]) for u in range(self.gk.size)]

    @property
    def total(self) -> int:
        """Number of braids the sampler draws from"""
        return sum(self.start_weights())

    def sample(self, rng: random.Random) -> NormalForm:
        """Draw one braid; the flags decide which completions still count"""
        gk = self.gk
        indptr, indices = gk.csr()
        u = _weighted_choice(rng, range(gk.size), self.start_weights())
        flags, goal = self.flags[u], self.firsts[u]
        path = list(gk.paths[u])
        for t in range(len(self.completions) - 1, 0, -1):
            table = self.completions[t - 1]
            edges = range(int(indptr[u]), int(indptr[u + 1]))
            weights = [self._count(table, flags | int(self.gains[e]), int(indices[e]), goal) for e in edges]
            e = _weighted_choice(rng, edges, weights)
            flags |= int(self.gains[e])
            u = int(indices[e])
            path.append(gk.paths[u][-1])
        return NormalForm(self.g.n, self.p, tuple(self.g.vertices[v] for v in path))


def sample_with_patterns(g: LWGraph, r: int, patterns: Sequence[NormalForm], rng: random.Random,
                         rigid: bool = True, cap: int = DEFAULT_LIFT_CAP) -> NormalForm:
    """
    One uniform braid with r factors containing every pattern. Build a
    PatternSampler directly when drawing many.
    """
    sampler = PatternSampler(g, r, patterns, rigid=rigid, cap=cap)
    if sampler.total == 0:
        raise CensusError(f"no braid with {r} factors contains every pattern")
    return sampler.sample(rng)


# ---------------------------------------------------------------- proportions

@dataclass
class SampleReport:
    """Verdict tallies for one sampled length, with the exact bound to compare against"""
    n: int
    r: int
    sample_count: int
    seed: int
    certified: int = 0
    witness: int = 0
    inconclusive: int = 0
    soundness_violations: int = 0
    exact_bound: Optional[Fraction] = None
    error: Optional[str] = None
    convention: str = CONVENTION_NOTE

    @property
    def l(self) -> int:
        return self.r - 1

    @property
    def proportion_certified(self) -> float:
        return self.certified / self.sample_count if self.sample_count else 0.0

    @property
    def sigma(self) -> float:
        """Binomial standard error of the certified fraction"""
        if not self.sample_count:
            return 0.0
        q = self.proportion_certified
        return math.sqrt(q * (1 - q) / self.sample_count)

    @property
    def ci(self) -> Tuple[float, float]:
        """Three-sigma interval around the certified fraction, clipped to [0, 1]"""
        q, s = self.proportion_certified, self.sigma
        return max(0.0, q - 3 * s), min(1.0, q + 3 * s)

    def dominates_bound(self) -> bool:
        """Sampled certified fraction is at least the exact bound, up to 3 sigma"""
        if self.exact_bound is None or self.error:
            return False
        return self.ci[1] >= float(self.exact_bound)

    def to_dict(self) -> Dict:
        lo, hi = self.ci
        return {
            'n': self.n,
            'r': self.r,
            'l': self.l,
            'sample_count': self.sample_count,
            'seed': self.seed,
            'certified': self.certified,
            'witness': self.witness,
            'inconclusive': self.inconclusive,
            'soundness_violations': self.soundness_violations,
            'proportion_certified': self.proportion_certified,
            'ci_lo': lo,
            'ci_hi': hi,
            'exact_bound_num': str(self.exact_bound.numerator) if self.exact_bound is not None else None,
            'exact_bound_den': str(self.exact_bound.denominator) if self.exact_bound is not None else None,
            'error': self.error,
            'convention': self.convention,
        }


def _chunk_seed(seed: int, chunk: int) -> int:
    return seed * 1_000_003 + chunk


def _run_chunk(sampler: RigidSampler, seed: int, chunk: int, count: int, check_soundness: bool) -> Tuple[int, int, int, int]:
    """(certified, witness, inconclusive, soundness violations) for one seeded chunk"""
    rng = random.Random(_chunk_seed(seed, chunk))
    certified = witness = inconclusive = violations = 0
    for _ in range(count):
        x = sampler.sample(rng)
        verdict = certify(x)
        if verdict.kind is VerdictKind.CERTIFIED_PSEUDO_ANOSOV:
            certified += 1
            if check_soundness and preserved_round_curve_power(x) is not None:
                violations += 1
        elif verdict.kind is VerdictKind.REDUCIBILITY_WITNESS:
            witness += 1
        else:
            inconclusive += 1
    return certified, witness, inconclusive, violations


_worker_sampler: Optional[RigidSampler] = None


def _init_worker(n: int, r: int, cache_dir: Optional[str]):
    """Builds this worker process's sampler from the graph cache"""
    global _worker_sampler
    _worker_sampler = RigidSampler(cached_graph(n, cache_dir), r)


def _worker_chunk(job: Tuple[int, int, int, bool]) -> Tuple[int, int, int, int]:
    seed, chunk, count, check_soundness = job
    return _run_chunk(_worker_sampler, seed, chunk, count, check_soundness)


def measure_pa_proportion(g: LWGraph, r: int, samples: int, seed: int, workers: int = 1,
                          chunk_size: int = 500, check_soundness: bool = False,
                          cap: int = DEFAULT_LIFT_CAP, cache_dir: Optional[str] = None) -> SampleReport:
    """
    Certify uniform rigid braids with r factors and compare with the exact bound.

    Samples are drawn in fixed chunks, each from its own seeded stream, so the
    report does not depend on the worker count. With workers > 1 the chunks
    run in separate processes, each rebuilding Gamma_n (through cache_dir
    when given) and its own sampler.
    """
    report = SampleReport(g.n, r, samples, seed)
    if samples <= 0:
        report.error = "no samples requested"
        return report
    report.exact_bound = exact_pa_bound(g, r, cap)
    chunks = [(i, min(chunk_size, samples - i * chunk_size)) for i in range((samples + chunk_size - 1) // chunk_size)]
    jobs = [(seed, chunk, count, check_soundness) for chunk, count in chunks]

    if workers > 1 and len(jobs) > 1:
        logger.debug(f"sampling {len(jobs)} chunks on {workers} worker processes")
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(g.n, r, cache_dir)) as pool:
            results = list(pool.map(_worker_chunk, jobs))
    else:
        sampler = RigidSampler(g, r)
        results = [_run_chunk(sampler, *job) for job in jobs]
    for certified, witness, inconclusive, violations in results:
        report.certified += certified
        report.witness += witness
        report.inconclusive += inconclusive
        report.soundness_violations += violations
    logger.info(f"n={g.n} r={r}: {report.certified}/{samples} certified "
                f"(exact bound {float(report.exact_bound):.4f})")
    return report


def exact_pa_bound(g: LWGraph, r: int, cap: int = DEFAULT_LIFT_CAP) -> Fraction:
    """Exact lower bound on the certified fraction of rigid braids with r factors"""
    if r < 1:
        raise CensusError(f"need at least one factor, got r={r}")
    loops = count_loops(g, r - 1)
    if loops == 0:
        raise GraphError(f"no rigid braids with {r} factors")
    return Fraction(rigid_pa_lower_count(g, r - 1, cap=cap), loops)


@dataclass
class RigidSphereBound:
    """Certified rigid pseudo-Anosov braids among shape (ii) of the l-sphere"""
    l: int
    sphere_total: int
    even_k: int
    all_k: int

    @property
    def proportion_even(self) -> Fraction:
        return Fraction(self.even_k, self.sphere_total)

    @property
    def proportion_all(self) -> Fraction:
        return Fraction(self.all_k, self.sphere_total)


def rigid_sphere_bounds(g: LWGraph, l_max: int, cap: int = DEFAULT_LIFT_CAP) -> List[RigidSphereBound]:
    """
    For each radius l, count braids Delta^-k s_1 ... s_l (0 <= k <= l) that
    are rigid and contain both patterns: even k uses plain loops, odd k
    twisted loops. The even-k figure is the one reported as the ball bound.
    """
    if l_max < 1:
        raise CensusError(f"sphere radius must be at least 1, got {l_max}")
    plain = rigid_pa_series(g, l_max - 1, cap=cap)
    twisted = rigid_pa_series(g, l_max - 1, twisted=True, cap=cap)
    bounds = []
    for sphere in sphere_table(g, l_max):
        l = sphere.l
        evens, odds = l // 2 + 1, (l + 1) // 2
        even = evens * plain.lower_bound(l - 1)
        bounds.append(RigidSphereBound(l, sphere.total, even, even + odds * twisted.lower_bound(l - 1)))
    return bounds


def ball_rigid_bound(bounds: Sequence[RigidSphereBound], l: int) -> Tuple[int, int]:
    """(certified rigid pA lower bound, ball size) for the l-ball from per-sphere bounds"""
    inside = [b for b in bounds if b.l <= l]
    if len(inside) != l:
        raise CensusError(f"need sphere bounds for every radius up to {l}")
    return sum(b.even_k for b in inside), 1 + sum(b.sphere_total for b in inside)


@dataclass
class ProportionRow:
    """One line of the proportions table"""
    r: int
    exact_bound: Fraction
    report: Optional[SampleReport] = None

    def row(self) -> Dict[str, str]:
        lo, hi = self.report.ci if self.report else (None, None)
        return {
            'l': str(self.r - 1),
            'exact_bound_num': str(self.exact_bound.numerator),
            'exact_bound_den': str(self.exact_bound.denominator),
            'sampled': f"{self.report.proportion_certified:.6f}" if self.report else '',
            'ci_lo': f"{lo:.6f}" if self.report else '',
            'ci_hi': f"{hi:.6f}" if self.report else '',
        }


def proportion_table(g: LWGraph, r_values: Sequence[int], samples: int, seed: int, workers: int = 1,
                     cap: int = DEFAULT_LIFT_CAP, cache_dir: Optional[str] = None,
                     check_soundness: bool = False) -> List[ProportionRow]:
    """Exact bound for each r, with a sampled measurement alongside when samples > 0"""
    rows = []
    for r in r_values:
        bound = exact_pa_bound(g, r, cap)
        report = (measure_pa_proportion(g, r, samples, seed, workers, check_soundness=check_soundness, cap=cap,
                                        cache_dir=cache_dir) if samples > 0 else None)
        rows.append(ProportionRow(r, bound, report))
    return rows
