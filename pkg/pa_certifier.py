"""
Three-valued Nielsen-Thurston certification for rigid braids

A rigid braid whose factor sequence contains both x_A(n) and x_B(n) as
consecutive subwords is pseudo-Anosov. Otherwise we look for the evidence a
reducible rigid braid would have to leave behind: a power that preserves a
round curve, or a strand pair that never crosses or crosses in every factor.
Finding such evidence does not prove reducibility, so the three outcomes are
kept apart.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from typing import Dict, List, Optional, Sequence, Union

from braid_core import (
    NormalForm,
    NotRigidError,
    SimpleBraid,
    canonical_length,
    is_rigid,
    power,
    tau,
    x_A,
    x_B,
)
from curves import (
    RoundCurve,
    always_crossing_pairs,
    crossing_profile,
    never_crossing_pairs,
    preserved_round_curve_power,
    transport_round,
)

logger = logging.getLogger(__name__)


class VerdictKind(Enum):
    """The three possible outcomes of certify"""
    CERTIFIED_PSEUDO_ANOSOV = "CertifiedPseudoAnosov"
    REDUCIBILITY_WITNESS = "ReducibilityWitness"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class PreservedRoundCurve:
    """x^k sends the round curve back to itself"""
    k: int
    curve: RoundCurve

    def verify(self, x: NormalForm) -> bool:
        """Push the curve through x^k and compare"""
        return transport_round(power(x, self.k), self.curve) == self.curve

    def to_dict(self) -> Dict:
        return {'type': 'PreservedRoundCurve', 'k': self.k, 'curve': self.curve.to_json()}


@dataclass(frozen=True)
class NeverCrossingPair:
    """Strands a and b cross in no factor"""
    a: int
    b: int

    def verify(self, x: NormalForm) -> bool:
        return (self.a, self.b) in never_crossing_pairs(crossing_profile(x.factors))

    def to_dict(self) -> Dict:
        return {'type': 'NeverCrossingPair', 'pair': [self.a, self.b]}


@dataclass(frozen=True)
class AlwaysCrossingPair:
    """Strands a and b cross in every factor"""
    a: int
    b: int

    def verify(self, x: NormalForm) -> bool:
        return (self.a, self.b) in always_crossing_pairs(crossing_profile(x.factors))

    def to_dict(self) -> Dict:
        return {'type': 'AlwaysCrossingPair', 'pair': [self.a, self.b]}


Witness = Union[PreservedRoundCurve, NeverCrossingPair, AlwaysCrossingPair]


@dataclass(frozen=True)
class Verdict:
    """Outcome of certify, with 1-based pattern positions and an optional witness"""
    kind: VerdictKind
    n: int
    inf: int
    length: int
    detail: Optional[Witness] = None
    subword_positions: Dict[str, Optional[int]] = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.kind is VerdictKind.CERTIFIED_PSEUDO_ANOSOV

    def to_dict(self) -> Dict:
        """JSON form; len is the number of factors"""
        return {
            'kind': self.kind.value,
            'detail': self.detail.to_dict() if self.detail is not None else None,
            'subword_positions': dict(self.subword_positions),
            'n': self.n,
            'inf': self.inf,
            'len': self.length,
        }


def contains_subword(x: Union[NormalForm, Sequence[SimpleBraid]], pattern: Sequence[SimpleBraid]) -> Optional[int]:
    """1-based position of the first occurrence of pattern among the factors, or None"""
    factors = x.factors if isinstance(x, NormalForm) else tuple(x)
    pattern = tuple(pattern)
    if not pattern or len(pattern) > len(factors):
        return None
    j = len(pattern)
    for i in range(len(factors) - j + 1):
        if factors[i:i + j] == pattern:
            return i + 1
    return None


def is_periodic_rigid(x: NormalForm) -> bool:
    """A rigid braid is periodic only when it is a power of Delta"""
    if canonical_length(x) == 0:
        return True
    if not is_rigid(x):
        raise NotRigidError("periodicity shortcut only holds for rigid braids")
    return False


def _find(x: NormalForm, pattern: NormalForm, tau_closed: bool) -> Optional[int]:
    """Literal match first; the tau-image only for odd infimum when asked"""
    position = contains_subword(x, pattern.factors)
    if position is None and tau_closed and x.p % 2:
        position = contains_subword(x, [tau(s) for s in pattern.factors])
    return position


def find_witness(x: NormalForm) -> Optional[Witness]:
    """Round curves first, then never-crossing pairs, then always-crossing pairs"""
    found = preserved_round_curve_power(x)
    if found is not None:
        return PreservedRoundCurve(*found)
    profile = crossing_profile(x.factors)
    never = sorted(never_crossing_pairs(profile))
    if never:
        return NeverCrossingPair(*never[0])
    always = sorted(always_crossing_pairs(profile))
    if always:
        return AlwaysCrossingPair(*always[0])
    return None


def certify(x: NormalForm, tau_closed: bool = False) -> Verdict:
    """
    Classify a rigid braid of positive canonical length.

    tau_closed=True also accepts tau-images of the patterns when the infimum
    is odd; by default the factor sequence is matched literally.
    """
    if canonical_length(x) == 0 or not is_rigid(x):
        raise NotRigidError("certify needs a rigid braid of positive canonical length")
    positions = {
        'x_A': _find(x, x_A(x.n), tau_closed),
        'x_B': _find(x, x_B(x.n), tau_closed),
    }
    base = dict(n=x.n, inf=x.p, length=len(x.factors), subword_positions=positions)
    if positions['x_A'] is not None and positions['x_B'] is not None:
        return Verdict(VerdictKind.CERTIFIED_PSEUDO_ANOSOV, **base)
    witness = find_witness(x)
    if witness is not None:
        logger.debug(f"witness for braid of length {len(x.factors)}: {witness}")
        return Verdict(VerdictKind.REDUCIBILITY_WITNESS, detail=witness, **base)
    return Verdict(VerdictKind.INCONCLUSIVE, **base)


def certify_batch(braids: Sequence[NormalForm], workers: int = 1, tau_closed: bool = False,
                  chunk_size: int = 64) -> List[Verdict]:
    """Certify many braids, in worker processes when workers > 1; output order follows input order"""
    if workers <= 1 or len(braids) <= chunk_size:
        return [certify(x, tau_closed) for x in braids]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(partial(certify, tau_closed=tau_closed), braids, chunksize=chunk_size))
