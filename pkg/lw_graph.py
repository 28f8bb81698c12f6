"""
The left-weighting graph, its lifts, and exact path counting

Vertices of the graph are the simple braids other than 1 and Delta; there is
an edge u -> v when (u, v) is left-weighted. Normal forms of infimum 0 with r
factors are exactly the r-vertex paths, and rigid ones are the paths that
close up with an edge from the last vertex back to the first.

Counts are exact: vectors of Python integers held in numpy object arrays and
pushed through the sparse adjacency with one reduceat per step. Spectral radii
are estimated in double precision on the same sparse structure.

Conventions (fixed throughout):
    N(l)   paths with l edges (l+1 vertices)          = |A^l|_1
    N°(l)  such paths with an edge last -> first      = tr(A^{l+1})
    a braid with inf 0 and r factors is a path of r vertices: N(r-1), N°(r-1)
"""
import itertools
import json
import logging
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from braid_core import (
    NormalForm,
    Permutation,
    SimpleBraid,
    finishing_set,
    is_left_weighted,
    left_complement,
    simple_braids,
    starting_set,
    tau,
    x_A,
    x_B,
)

logger = logging.getLogger(__name__)

DEFAULT_LIFT_CAP = 5_000_000


class GraphError(ValueError):
    """Invalid graph request or a failed construction check"""


class PatternError(GraphError):
    """Forbidden pattern is not a path of the graph"""


class LiftCapExceeded(RuntimeError):
    """Lifted graph would exceed the configured vertex cap"""


def _csr(adjacency: List[List[int]]) -> Tuple[np.ndarray, np.ndarray]:
    lengths = np.fromiter((len(row) for row in adjacency), dtype=np.int64, count=len(adjacency))
    indptr = np.zeros(len(adjacency) + 1, dtype=np.int64)
    np.cumsum(lengths, out=indptr[1:])
    indices = np.fromiter(itertools.chain.from_iterable(adjacency), dtype=np.int64, count=int(indptr[-1]))
    return indptr, indices


def pull(indptr: np.ndarray, indices: np.ndarray, x: np.ndarray) -> np.ndarray:
    """y[v] = sum of x[u] over the successors u of v (row-wise for 2-d x)"""
    y = np.zeros_like(x)
    rows = np.flatnonzero(indptr[1:] > indptr[:-1])
    if rows.size:
        y[rows] = np.add.reduceat(x[indices], indptr[rows], axis=0)
    return y


class _SparseAdjacency:
    """Row-indexed adjacency lists with a cached CSR view"""
    adjacency: List[List[int]]

    @property
    def size(self) -> int:
        return len(self.adjacency)

    @property
    def edge_count(self) -> int:
        return sum(len(row) for row in self.adjacency)

    def has_edge(self, u: int, v: int) -> bool:
        """Edge u -> v; linear in the out-degree of u"""
        return v in self.adjacency[u]

    def csr(self) -> Tuple[np.ndarray, np.ndarray]:
        """(indptr, indices) of the adjacency, built once"""
        cached = self.__dict__.get("_csr")
        if cached is None:
            cached = _csr(self.adjacency)
            self.__dict__["_csr"] = cached
        return cached


@dataclass(eq=False)
class LWGraph(_SparseAdjacency):
    """Left-weighting graph of B_n"""
    n: int
    vertices: List[SimpleBraid]
    adjacency: List[List[int]]
    index: Dict[Tuple[int, ...], int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.index:
            self.index = {v.perm.image: i for i, v in enumerate(self.vertices)}

    def vertex_index(self, s: SimpleBraid) -> int:
        """Index of s among the vertices; GraphError for 1, Delta or another strand count"""
        if s.n != self.n:
            raise GraphError(f"simple braid on {s.n} strands, graph is for n={self.n}")
        try:
            return self.index[s.perm.image]
        except KeyError:
            raise GraphError(f"'{s}' is not a vertex (identity and Delta are excluded)") from None

    def tau_index(self) -> List[int]:
        """tau acting on vertex indices"""
        cached = self.__dict__.get("_tau")
        if cached is None:
            cached = [self.index[tau(v).perm.image] for v in self.vertices]
            self.__dict__["_tau"] = cached
        return cached


@dataclass(eq=False)
class LiftedGraph(_SparseAdjacency):
    """
    Gamma_(k): vertices are k-vertex paths of the base graph, with an edge
    (s_1..s_k) -> (t_1..t_k) when s_2..s_k = t_1..t_{k-1}. Edges are the
    (k+1)-vertex paths of the base; removed edges are forbidden windows.
    """
    k: int
    base: LWGraph
    paths: List[Tuple[int, ...]]
    adjacency: List[List[int]]
    removed: FrozenSet[Tuple[int, int]] = frozenset()
    patterns: Tuple[str, ...] = ()
    index: Dict[Tuple[int, ...], int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.index:
            self.index = {p: i for i, p in enumerate(self.paths)}

    @property
    def n(self) -> int:
        return self.base.n

    def window(self, u: int, v: int) -> Tuple[int, ...]:
        """The k+1 base vertices spelled by the lifted edge u -> v"""
        return self.paths[u] + (self.paths[v][-1],)


Graph = Union[LWGraph, LiftedGraph]


def build_graph(n: int) -> LWGraph:
    """
    Gamma_n. Vertices follow simple_braids(n) order; u -> v is an edge when
    the starting set of v lies inside the finishing set of u.
    """
    vertices = [s for s in simple_braids(n) if not s.is_identity() and not s.is_delta()]
    starts = [starting_set(v) for v in vertices]
    finals = [finishing_set(v) for v in vertices]

    by_start: Dict[FrozenSet[int], List[int]] = {}
    for i, st in enumerate(starts):
        by_start.setdefault(st, []).append(i)

    adjacency = []
    for fin in finals:
        targets: List[int] = []
        for st, members in by_start.items():
            if st <= fin:
                targets.extend(members)
        adjacency.append(sorted(targets))

    g = LWGraph(n, vertices, adjacency)
    logger.info(f"Left-weighting graph n={n}: {g.size} vertices, {g.edge_count} edges")
    return g


def _as_factors(pattern: Union[NormalForm, Sequence[SimpleBraid]]) -> Sequence[SimpleBraid]:
    return pattern.factors if isinstance(pattern, NormalForm) else pattern


def pattern_indices(g: LWGraph, pattern: Union[NormalForm, Sequence[SimpleBraid]]) -> Tuple[int, ...]:
    """Vertex indices of a pattern; raises PatternError unless it is a path of g"""
    factors = _as_factors(pattern)
    if not factors:
        raise PatternError("empty pattern")
    try:
        idx = tuple(g.vertex_index(s) for s in factors)
    except GraphError as e:
        raise PatternError(str(e)) from None
    for u, v in zip(idx, idx[1:]):
        if not g.has_edge(u, v):
            raise PatternError(f"({g.vertices[u]}) -> ({g.vertices[v]}) is not an edge")
    return idx


def pattern_label(pattern: Union[NormalForm, Sequence[SimpleBraid]]) -> str:
    """Factors joined with ' . ', as written in reports"""
    return " . ".join(str(s) for s in _as_factors(pattern))


# ---------------------------------------------------------------- exact counts

def path_series(g: Graph, l_max: int) -> List[int]:
    """[N(0), ..., N(l_max)] at the level of g itself"""
    indptr, indices = g.csr()
    x = np.ones(g.size, dtype=object)
    series = [int(x.sum())]
    for _ in range(l_max):
        x = pull(indptr, indices, x)
        series.append(int(x.sum()))
    return series


def count_paths(g: Graph, l: int) -> int:
    """N(l)"""
    if l < 0:
        raise GraphError(f"path length must be non-negative, got {l}")
    return path_series(g, l)[-1]


def closing_matrix(g: Graph, twisted: bool) -> Tuple[np.ndarray, np.ndarray]:
    """
    Y[v, a] = 1 when the base vertex a (or tau(a)) follows the last base
    vertex of v; firsts[u] is the first base vertex of u.
    """
    base = g.base if isinstance(g, LiftedGraph) else g
    lasts = [p[-1] for p in g.paths] if isinstance(g, LiftedGraph) else range(g.size)
    firsts = np.array([p[0] for p in g.paths] if isinstance(g, LiftedGraph) else range(g.size), dtype=np.int64)
    flip = base.tau_index()
    y = np.zeros((g.size, base.size), dtype=object)
    for v, last in enumerate(lasts):
        for b in base.adjacency[last]:
            y[v, flip[b] if twisted else b] = 1
    return y, firsts


def loop_series(g: Graph, l_max: int, twisted: bool = False) -> List[int]:
    """
    [N°(0), ..., N°(l_max)] counted in base-path terms.

    For a lift of order k, entry l is the number of base paths with l edges
    carried by g (forbidden windows removed) that close up; entries l < k-1
    are zero there and callers handle short lengths separately.
    """
    k = g.k if isinstance(g, LiftedGraph) else 1
    indptr, indices = g.csr()
    y, firsts = closing_matrix(g, twisted)
    rows = np.arange(g.size)
    series = [0] * (k - 1)
    series.append(int(y[rows, firsts].sum()))
    for _ in range(l_max - k + 1):
        y = pull(indptr, indices, y)
        series.append(int(y[rows, firsts].sum()))
    return series[:l_max + 1]


def count_loops(g: LWGraph, l: int, twisted: bool = False) -> int:
    """
    N°(l) = tr(A^{l+1}). With twisted=True the closing edge goes to tau of
    the first vertex, which counts rigid braids of odd infimum.
    """
    if l < 0:
        raise GraphError(f"loop length must be non-negative, got {l}")
    return loop_series(g, l, twisted)[-1]


@dataclass
class ConnectivityCertificate:
    """Outcome of a positivity check on A^length"""
    holds: bool
    length: int
    violating_pair: Optional[Tuple[int, int]] = None


def check_connectivity(g: Graph, length: int) -> ConnectivityCertificate:
    """Is every entry of A^length positive? Reports the first zero entry if not."""
    size = g.size
    a = np.zeros((size, size), dtype=np.float64)
    for u, row in enumerate(g.adjacency):
        a[u, row] = 1.0
    reach = np.eye(size)
    for _ in range(length):
        reach = np.minimum(reach @ a, 1.0)
    zeros = np.argwhere(reach == 0)
    if zeros.size:
        u, v = zeros[0]
        return ConnectivityCertificate(False, length, (int(u), int(v)))
    return ConnectivityCertificate(True, length)


def check_length5(g: Graph) -> ConnectivityCertificate:
    """Every ordered vertex pair is joined by a path of exactly five edges"""
    return check_connectivity(g, 5)


def _run(a: int, b: int) -> List[int]:
    return list(range(a, b + 1)) if a <= b else list(range(a, b - 1, -1))


def witness_path(g: LWGraph, s1: SimpleBraid, s2: SimpleBraid) -> Tuple[SimpleBraid, SimpleBraid, SimpleBraid, SimpleBraid]:
    """
    Four simple braids x1..x4 with s1 -> x1 -> x2 -> x3 -> x4 -> s2 a path.

    x1 = sigma_{i1} ... sigma_{n//2}, x2 interleaves the two halves, x3
    undoes x2 and reverses both halves, x4 is the left complement of
    sigma_{i2} ... sigma_{ceil(n/2)}.
    """
    n = g.n
    g.vertex_index(s1)
    g.vertex_index(s2)
    m, half_up = n // 2, (n + 1) // 2
    everything = frozenset(range(1, n))
    odd = frozenset(range(1, 2 * m, 2))
    i1 = min(finishing_set(s1))
    i2 = min(everything - starting_set(s2))

    x1 = SimpleBraid.from_word(n, _run(i1, m))
    x2 = SimpleBraid.from_image(list(range(2, 2 * m + 1, 2)) + list(range(1, 2 * half_up, 2)))
    halves = Permutation(n, tuple(m + 1 - i if i <= m else n + m + 1 - i for i in range(1, n + 1)))
    x3 = SimpleBraid(x2.perm.inverse().then(halves))
    x4 = left_complement(SimpleBraid.from_word(n, _run(i2, half_up)))

    conditions = [
        ("init(x1) = {i1}", starting_set(x1) == {i1}),
        ("final(x1) = init(x2) = {n//2}", finishing_set(x1) == starting_set(x2) == {m}),
        ("final(x2) = init(x3) = odd indices", finishing_set(x2) == starting_set(x3) == odd),
        ("final(x3) = init(x4) = all but n//2", finishing_set(x3) == starting_set(x4) == everything - {m}),
        ("final(x4) = all but i2", finishing_set(x4) == everything - {i2}),
    ]
    for name, ok in conditions:
        if not ok:
            raise GraphError(f"witness path construction failed: {name} (s1={s1}, s2={s2})")
    chain = [s1, x1, x2, x3, x4, s2]
    for a, b in zip(chain, chain[1:]):
        g.vertex_index(a)
        if not is_left_weighted(a, b):
            raise GraphError(f"witness path construction failed: ({a}) -> ({b}) is not an edge")
    return x1, x2, x3, x4


# ---------------------------------------------------------------- lifts

def lift(g: LWGraph, k: int, cap: int = DEFAULT_LIFT_CAP) -> LiftedGraph:
    """Gamma_(k). k = 1 gives a lift with the same vertices and edges as g."""
    if k < 1:
        raise GraphError(f"lift order must be at least 1, got {k}")
    paths: List[Tuple[int, ...]] = [(v,) for v in range(g.size)]
    for _ in range(k - 1):
        extended = []
        for p in paths:
            extended.extend(p + (t,) for t in g.adjacency[p[-1]])
            if len(extended) > cap:
                raise LiftCapExceeded(f"lift of order {k} for n={g.n} exceeds the cap of {cap} vertices")
        paths = extended
    index = {p: i for i, p in enumerate(paths)}
    adjacency = [[index[p[1:] + (t,)] for t in g.adjacency[p[-1]]] for p in paths]
    gk = LiftedGraph(k, g, paths, adjacency, index=index)
    logger.info(f"Lift of order {k} for n={g.n}: {gk.size} vertices, {gk.edge_count} edges")
    return gk


def _contains(seq: Sequence[int], pattern: Sequence[int]) -> bool:
    j = len(pattern)
    return any(tuple(seq[i:i + j]) == tuple(pattern) for i in range(len(seq) - j + 1))


def forbid(gk: LiftedGraph, pattern: Union[NormalForm, Sequence[SimpleBraid]], strict: bool = True) -> LiftedGraph:
    """
    Remove every lifted edge whose (k+1)-vertex window contains the pattern.
    A pattern with exactly k edges removes the single edge it spells.

    With strict=False a pattern that is not a path of the base graph (so can
    never occur) leaves the graph unchanged instead of raising.
    """
    try:
        idx = pattern_indices(gk.base, pattern)
    except PatternError:
        if strict:
            raise
        logger.debug(f"pattern '{pattern_label(pattern)}' is not a path; nothing to forbid")
        return gk
    edges = len(idx) - 1
    if edges > gk.k:
        raise PatternError(f"pattern with {edges} edges needs a lift of order at least {edges}, have {gk.k}")

    removed = set(gk.removed)
    if edges == gk.k:
        removed.add((gk.index[idx[:-1]], gk.index[idx[1:]]))
    else:
        for u, row in enumerate(gk.adjacency):
            for v in row:
                if _contains(gk.window(u, v), idx):
                    removed.add((u, v))
    adjacency = [[v for v in row if (u, v) not in removed] for u, row in enumerate(gk.adjacency)]
    logger.debug(f"forbid '{pattern_label(pattern)}': {len(removed) - len(gk.removed)} edges removed")
    return LiftedGraph(gk.k, gk.base, gk.paths, adjacency, frozenset(removed),
                       gk.patterns + (pattern_label(pattern),), gk.index)


def forbidden_lift(g: LWGraph, patterns: Sequence[Union[NormalForm, Sequence[SimpleBraid]]],
                   cap: int = DEFAULT_LIFT_CAP) -> LiftedGraph:
    """Lift of the smallest order that can see every pattern, with all of them forbidden"""
    idx = [pattern_indices(g, p) for p in patterns]
    k = max([1] + [len(p) - 1 for p in idx])
    gk = lift(g, k, cap)
    for p in patterns:
        gk = forbid(gk, p)
    return gk


def _enumerate_paths(g: LWGraph, vertex_count: int) -> Iterator[Tuple[int, ...]]:
    """Paths with the given number of vertices in lexicographic order"""
    stack: List[Tuple[int, ...]] = [(v,) for v in reversed(range(g.size))]
    while stack:
        p = stack.pop()
        if len(p) == vertex_count:
            yield p
            continue
        stack.extend(p + (t,) for t in reversed(g.adjacency[p[-1]]))


def _wrap_avoids(tail: Sequence[int], head: Sequence[int], patterns: Sequence[Tuple[int, ...]]) -> bool:
    """No pattern occurrence crossing the join of tail|head"""
    seq = tuple(tail) + tuple(head)
    cut = len(tail)
    for pat in patterns:
        j = len(pat)
        for start in range(max(0, cut - j + 1), cut):
            if seq[start:start + j] == pat:
                return False
    return True


def _brute_avoiding(g: LWGraph, patterns: Sequence[Tuple[int, ...]], l: int,
                    cyclic: bool, twisted: bool) -> Tuple[int, int]:
    flip = g.tau_index()
    paths = loops = 0
    for p in _enumerate_paths(g, l + 1):
        if any(_contains(p, pat) for pat in patterns):
            continue
        paths += 1
        head = flip[p[0]] if twisted else p[0]
        if not g.has_edge(p[-1], head):
            continue
        if cyclic:
            wrapped = tuple(flip[v] for v in p) if twisted else p
            if not _wrap_avoids(p, wrapped, patterns):
                continue
        loops += 1
    return paths, loops


def _cyclic_loop_series(gk: LiftedGraph, patterns: Sequence[Tuple[int, ...]], l_max: int, twisted: bool,
                        cap: int = DEFAULT_LIFT_CAP) -> List[int]:
    # columns are whole starting lift vertices so wrap windows can be checked
    if gk.size * gk.size > cap:
        raise LiftCapExceeded(f"cyclic counting on a lift of {gk.size} vertices needs a {gk.size} x {gk.size} "
                              f"table, over the cap of {cap} entries")
    base = gk.base
    flip = base.tau_index()
    indptr, indices = gk.csr()
    y = np.zeros((gk.size, gk.size), dtype=object)
    heads = [tuple(flip[v] for v in p) if twisted else p for p in gk.paths]
    for v, tail in enumerate(gk.paths):
        for u0, head in enumerate(heads):
            if base.has_edge(tail[-1], head[0]) and _wrap_avoids(tail, head, patterns):
                y[v, u0] = 1
    diag = np.arange(gk.size)
    series = [0] * (gk.k - 1)
    series.append(int(y[diag, diag].sum()))
    for _ in range(l_max - gk.k + 1):
        y = pull(indptr, indices, y)
        series.append(int(y[diag, diag].sum()))
    return series[:l_max + 1]


def avoiding_series(g: LWGraph, patterns: Sequence[Union[NormalForm, Sequence[SimpleBraid]]], l_max: int,
                    cyclic: bool = False, twisted: bool = False,
                    cap: int = DEFAULT_LIFT_CAP) -> Tuple[List[int], List[int]]:
    """
    ([N_w(0..l_max)], [N°_w(0..l_max)]) for paths and loops avoiding every
    pattern as a consecutive subpath.

    Loops read the pattern linearly along x_1 .. x_{l+1}; cyclic=True also
    forbids occurrences straddling the closing edge. Cyclic counting keeps a
    table with one column per lift vertex and raises LiftCapExceeded when
    that table would pass the cap.
    """
    if not patterns:
        return path_series(g, l_max), loop_series(g, l_max, twisted)
    idx = [pattern_indices(g, p) for p in patterns]
    gk = forbidden_lift(g, patterns, cap)
    k = gk.k

    # below k edges a path sits inside a single lifted vertex, which may hold a shorter pattern
    paths_w: List[int] = []
    loops_w: List[int] = []
    for l in range(min(k, l_max + 1)):
        a, b = _brute_avoiding(g, idx, l, cyclic, twisted)
        paths_w.append(a)
        loops_w.append(b)
    if l_max >= k:
        paths_w.extend(path_series(gk, l_max - k + 1)[1:])
        if cyclic:
            lifted_loops = _cyclic_loop_series(gk, idx, l_max, twisted, cap)
        else:
            lifted_loops = loop_series(gk, l_max, twisted)
        loops_w.extend(lifted_loops[k:l_max + 1])
    return paths_w, loops_w


def count_avoiding(g: LWGraph, patterns: Sequence[Union[NormalForm, Sequence[SimpleBraid]]], l: int,
                   cyclic: bool = False, twisted: bool = False,
                   cap: int = DEFAULT_LIFT_CAP) -> Tuple[int, int]:
    """(N_w(l), N°_w(l))"""
    if l < 0:
        raise GraphError(f"path length must be non-negative, got {l}")
    paths_w, loops_w = avoiding_series(g, patterns, l, cyclic, twisted, cap)
    return paths_w[l], loops_w[l]


# ---------------------------------------------------------------- spectra

@dataclass
class SpectrumReport:
    """A spectral radius estimate with the evidence behind it"""
    gamma: float
    method: str
    residual: float
    l_used: int
    converged: bool = True
    vertex_count: int = 0
    ratios: List[float] = field(default_factory=list)
    spread: float = 0.0

    def to_dict(self) -> Dict:
        return {
            'gamma': self.gamma,
            'method': self.method,
            'residual': self.residual,
            'l_used': self.l_used,
            'converged': self.converged,
            'vertex_count': self.vertex_count,
            'ratios': self.ratios,
            'spread': self.spread,
        }


def spectral_radius(g: Graph, tol: float = 1e-10, max_iter: int = 100_000, shift: float = 1.0) -> SpectrumReport:
    """
    Dominant eigenvalue by power iteration from the all-ones vector.

    Iterates A + shift*I so that periodic graphs still converge; the residual
    is |A x - gamma x|_1 with |x|_1 = 1.
    """
    if g.size == 0:
        raise GraphError("spectral radius of an empty graph")
    indptr, indices = g.csr()
    x = np.full(g.size, 1.0 / g.size)
    gamma = 0.0
    residual = float("inf")
    for iteration in range(1, max_iter + 1):
        y = pull(indptr, indices, x) + shift * x
        lam = float(y.sum())
        residual = float(np.abs(y - lam * x).sum())
        gamma = lam - shift
        if residual < tol or lam == 0.0:
            logger.debug(f"power iteration converged after {iteration} steps: gamma={gamma:.12f}")
            return SpectrumReport(gamma, "power-iteration", residual, iteration, True, g.size)
        x = y / lam
    logger.warning(f"power iteration did not converge in {max_iter} steps (residual {residual:.3e})")
    return SpectrumReport(gamma, "power-iteration", residual, max_iter, False, g.size)


def ratio_spectrum(g: LWGraph, l: int = 200, loops: bool = True, window: int = 5) -> SpectrumReport:
    """gamma from exact successive ratios N°(l+1)/N°(l) (or N(l+1)/N(l))"""
    series = loop_series(g, l + 1) if loops else path_series(g, l + 1)
    ratios = [series[i + 1] / series[i] for i in range(l + 1 - window, l + 1) if series[i]]
    if not ratios:
        raise GraphError("no non-zero counts to take ratios of")
    spread = max(ratios) - min(ratios)
    residual = abs(ratios[-1] - ratios[-2]) if len(ratios) > 1 else float("inf")
    return SpectrumReport(ratios[-1], "ratio-of-counts", residual, l, True, g.size, ratios, spread)


# ---------------------------------------------------------------- rigid pA counts

@dataclass
class RigidPaSeries:
    """Loop counts and pattern-avoiding loop counts, indexed by l"""
    loops: List[int]
    avoid_a: List[int]
    avoid_b: List[int]

    def lower_bound(self, l: int) -> int:
        """N°(l) - N°_{x_A}(l) - N°_{x_B}(l), floored at zero"""
        return max(0, self.loops[l] - self.avoid_a[l] - self.avoid_b[l])


def rigid_pa_series(g: LWGraph, l_max: int, twisted: bool = False, cap: int = DEFAULT_LIFT_CAP) -> RigidPaSeries:
    """Loop counts with and without each distinguished pattern for l = 0..l_max"""
    loops = loop_series(g, l_max, twisted)
    _, avoid_a = avoiding_series(g, [x_A(g.n)], l_max, twisted=twisted, cap=cap)
    _, avoid_b = avoiding_series(g, [x_B(g.n)], l_max, twisted=twisted, cap=cap)
    return RigidPaSeries(loops, avoid_a, avoid_b)


def rigid_pa_lower_count(g: LWGraph, l: int, twisted: bool = False, cap: int = DEFAULT_LIFT_CAP) -> int:
    """
    Rigid braids with l+1 factors (infimum 0, or odd infimum when twisted)
    containing both x_A and x_B: at least N°(l) - N°_{x_A}(l) - N°_{x_B}(l).
    """
    return rigid_pa_series(g, l, twisted, cap).lower_bound(l)


def first_generic_length(g: LWGraph, threshold: float = 0.05, l_max: int = 200,
                         cap: int = DEFAULT_LIFT_CAP) -> Optional[int]:
    """Smallest l <= l_max with N°_{x_A}(l-1) + N°_{x_B}(l-1) < threshold * N°(l-1)"""
    limit = Fraction(str(threshold))
    series = rigid_pa_series(g, l_max - 1, cap=cap)
    for l in range(1, l_max + 1):
        bad = series.avoid_a[l - 1] + series.avoid_b[l - 1]
        if bad * limit.denominator < limit.numerator * series.loops[l - 1]:
            return l
    return None


# ---------------------------------------------------------------- tables and cache

@dataclass
class CountTable:
    """Exact count columns for l = 0..l_max; N_w columns only when patterns were given"""
    n: int
    N: List[int]
    N_loop: List[int]
    N_w: Optional[List[int]] = None
    N_loop_w: Optional[List[int]] = None
    patterns: List[str] = field(default_factory=list)

    def rows(self) -> List[Dict[str, str]]:
        rows = []
        for l in range(len(self.N)):
            rows.append({
                'l': str(l),
                'N': str(self.N[l]),
                'N°': str(self.N_loop[l]),
                'N_w': str(self.N_w[l]) if self.N_w is not None else '',
                'N°_w': str(self.N_loop_w[l]) if self.N_loop_w is not None else '',
            })
        return rows


def count_table(g: LWGraph, l_max: int, patterns: Sequence[Union[NormalForm, Sequence[SimpleBraid]]] = (),
                cap: int = DEFAULT_LIFT_CAP) -> CountTable:
    table = CountTable(g.n, path_series(g, l_max), loop_series(g, l_max))
    if patterns:
        table.N_w, table.N_loop_w = avoiding_series(g, patterns, l_max, cap=cap)
        table.patterns = [pattern_label(p) for p in patterns]
    return table


def graph_cache_payload(g: Graph) -> Dict:
    """Header plus edge list, the on-disk form of a graph"""
    header = {
        'n': g.n,
        'k': g.k if isinstance(g, LiftedGraph) else 1,
        'removed_patterns': list(g.patterns) if isinstance(g, LiftedGraph) else [],
        'vertex_count': g.size,
    }
    edges = [[u, v] for u, row in enumerate(g.adjacency) for v in row]
    return {'header': header, 'edges': edges}


def save_graph_cache(g: Graph, filename: str):
    """Write graph_cache_payload(g) as JSON"""
    with open(filename, 'w') as f:
        json.dump(graph_cache_payload(g), f)


def load_graph_cache(filename: str) -> LWGraph:
    """
    Rebuild a base graph from its cache file. Vertices are regenerated from n
    and must match the stored count; lifted graphs are refused.
    """
    with open(filename, 'r') as f:
        data = json.load(f)
    header = data['header']
    if header.get('k', 1) != 1 or header.get('removed_patterns'):
        raise GraphError(f"{filename} holds a lifted graph; only base graphs are reloaded")
    n = header['n']
    vertices = [s for s in simple_braids(n) if not s.is_identity() and not s.is_delta()]
    if header['vertex_count'] != len(vertices):
        raise GraphError(f"{filename}: vertex count {header['vertex_count']} does not match n={n}")
    adjacency: List[List[int]] = [[] for _ in vertices]
    for u, v in data['edges']:
        adjacency[u].append(v)
    return LWGraph(n, vertices, [sorted(row) for row in adjacency])


def cached_graph(n: int, cache_dir: Optional[str] = None) -> LWGraph:
    """Build the graph, going through a JSON cache file when a directory is given"""
    if not cache_dir:
        return build_graph(n)
    filename = os.path.join(cache_dir, f"lw_graph_n{n}.json")
    try:
        g = load_graph_cache(filename)
        logger.info(f"Loaded graph n={n} from {filename}")
        return g
    except FileNotFoundError:
        pass
    except (GraphError, KeyError, ValueError) as e:
        logger.warning(f"Ignoring unreadable graph cache {filename}: {e}")
    g = build_graph(n)
    os.makedirs(cache_dir, exist_ok=True)
    save_graph_cache(g, filename)
    logger.info(f"Cached graph n={n} to {filename}")
    return g
