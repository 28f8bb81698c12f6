"""
Round curves in the punctured disk and their transport under braids

A round curve is the circle around a proper interval [lo, hi] of at least two
punctures. A simple braid sends it to a round curve exactly when the image of
the interval under its permutation is again an interval: drawn with straight
strands, an outside strand crosses the band around the interval at most once,
so the tube stays a tube unless an outside strand ends up inside it.

Transport through a normal form checks each factor in turn; a curve whose
final image under a normal form is round is round after every prefix, so the
factor-wise test decides roundness of the whole image.
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from braid_core import NormalForm, NotRigidError, SimpleBraid, canonical_length, is_rigid, power

logger = logging.getLogger(__name__)


class CurveError(ValueError):
    """Degenerate curve or strand count mismatch"""


@dataclass(frozen=True, order=True)
class RoundCurve:
    """Circle enclosing punctures lo..hi"""
    n: int
    lo: int
    hi: int

    def __post_init__(self):
        if not 1 <= self.lo < self.hi <= self.n:
            raise CurveError(f"need 1 <= lo < hi <= n, got [{self.lo},{self.hi}] for n={self.n}")
        if (self.lo, self.hi) == (1, self.n):
            raise CurveError("the curve around every puncture is the boundary, not a round curve")

    def punctures(self) -> range:
        """Puncture positions inside the curve"""
        return range(self.lo, self.hi + 1)

    def to_json(self) -> List[int]:
        return [self.lo, self.hi]

    def __str__(self):
        return f"[{self.lo},{self.hi}]"


def all_round_curves(n: int) -> List[RoundCurve]:
    """Every round curve in D_n, ordered by (lo, hi)"""
    return [
        RoundCurve(n, lo, hi)
        for lo in range(1, n)
        for hi in range(lo + 1, n + 1)
        if (lo, hi) != (1, n)
    ]


def _check_strands(n: int, c: RoundCurve):
    if c.n != n:
        raise CurveError(f"curve lives in D_{c.n}, braid has {n} strands")


def image_round(s: SimpleBraid, c: RoundCurve) -> Optional[RoundCurve]:
    """Image of c under the simple braid s, or None if it is not round"""
    _check_strands(s.n, c)
    image = [s.perm(i) for i in c.punctures()]
    lo, hi = min(image), max(image)
    if hi - lo != c.hi - c.lo:
        return None
    return RoundCurve(c.n, lo, hi)


def _reverse(c: RoundCurve) -> RoundCurve:
    """Image under Delta, which reverses the puncture order"""
    return RoundCurve(c.n, c.n + 1 - c.hi, c.n + 1 - c.lo)


def transport_round(x: NormalForm, c: RoundCurve) -> Optional[RoundCurve]:
    """
    Push c through Delta^p, then through each factor. Returns None at the
    first factor that breaks roundness.
    """
    _check_strands(x.n, c)
    current = _reverse(c) if x.p % 2 else c
    for f in x.factors:
        current = image_round(f, current)
        if current is None:
            return None
    return current


def preserved_round_curve_power(x: NormalForm, k_max: Optional[int] = None) -> Optional[Tuple[int, RoundCurve]]:
    """
    Smallest k <= k_max (default n) and first curve c with x^k(c) = c.

    x must be rigid; its powers are then concatenations of twisted copies of
    its factors.
    """
    if canonical_length(x) == 0 or not is_rigid(x):
        raise NotRigidError("round-curve search needs a rigid braid of positive canonical length")
    if k_max is None:
        k_max = x.n
    curves = all_round_curves(x.n)
    for k in range(1, k_max + 1):
        xk = power(x, k)
        for c in curves:
            if transport_round(xk, c) == c:
                logger.debug(f"x^{k} preserves {c}")
                return k, c
    return None


@dataclass
class CrossingProfile:
    """
    For each strand pair (a, b), labelled by starting position, the factors
    (1-based) in which the pair crosses.
    """
    n: int
    l: int
    cross: Dict[Tuple[int, int], FrozenSet[int]] = field(default_factory=dict)

    def crossing_count(self, a: int, b: int) -> int:
        """Number of factors in which strands a and b swap, in either argument order"""
        return len(self.cross[(min(a, b), max(a, b))])


def crossing_profile(factors: Sequence[SimpleBraid]) -> CrossingProfile:
    """Follow every strand through the factors and record where each pair swaps order"""
    if not factors:
        raise CurveError("crossing profile of an empty factor sequence")
    n = factors[0].n
    position = list(range(1, n + 1))  # position[strand-1]
    crossings: Dict[Tuple[int, int], Set[int]] = {pair: set() for pair in itertools.combinations(range(1, n + 1), 2)}
    for index, f in enumerate(factors, start=1):
        if f.n != n:
            raise CurveError("factors on different strand counts")
        moved = [f.perm(pos) for pos in position]
        for a, b in crossings:
            before = position[a - 1] < position[b - 1]
            after = moved[a - 1] < moved[b - 1]
            if before != after:
                crossings[(a, b)].add(index)
        position = moved
    return CrossingProfile(n, len(factors), {pair: frozenset(s) for pair, s in crossings.items()})


def never_crossing_pairs(profile: CrossingProfile) -> Set[Tuple[int, int]]:
    """Pairs that stay in the same order through every factor"""
    return {pair for pair, hits in profile.cross.items() if not hits}


def always_crossing_pairs(profile: CrossingProfile) -> Set[Tuple[int, int]]:
    """Pairs that swap in every factor"""
    return {pair for pair, hits in profile.cross.items() if len(hits) == profile.l}
