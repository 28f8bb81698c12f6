"""
Braid group arithmetic with the classical Garside structure

Simple braids are stored as permutation braids. image[i] is the final position
of the strand that starts at position i, and braid words act left to right
(the leftmost letter acts first). With this convention the descent criteria
hold exactly as stated:

    i in starting_set(s)   <=>  pi(i) > pi(i+1)
    i in finishing_set(s)  <=>  pi^-1(i) > pi^-1(i+1)

Every braid is kept in left normal form  Delta^p x_1 ... x_r.
"""
import itertools
import logging
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import FrozenSet, Iterable, Iterator, List, Sequence, Tuple

logger = logging.getLogger(__name__)


class BraidError(ValueError):
    """Invalid braid data, or an operation used outside its domain"""


class NotRigidError(BraidError):
    """The operation needs a rigid braid"""


def _check_generator(n: int, i: int):
    if not 1 <= i <= n - 1:
        raise BraidError(f"generator index {i} out of range 1..{n - 1}")


def _same_strands(*braids):
    counts = {b.n for b in braids}
    if len(counts) != 1:
        raise BraidError(f"mismatched strand counts {sorted(counts)}")


@dataclass(frozen=True)
class Permutation:
    """Element of S_n in array form, 1-based"""
    n: int
    image: Tuple[int, ...]

    def __post_init__(self):
        if self.n < 3:
            raise BraidError(f"strand count must be at least 3, got {self.n}")
        if len(self.image) != self.n or set(self.image) != set(range(1, self.n + 1)):
            raise BraidError(f"{self.image} is not a permutation of 1..{self.n}")

    @staticmethod
    def identity(n: int) -> "Permutation":
        return Permutation(n, tuple(range(1, n + 1)))

    @staticmethod
    def transposition(n: int, i: int) -> "Permutation":
        """Permutation of sigma_i (swaps positions i and i+1)"""
        _check_generator(n, i)
        image = list(range(1, n + 1))
        image[i - 1], image[i] = i + 1, i
        return Permutation(n, tuple(image))

    def __call__(self, i: int) -> int:
        return self.image[i - 1]

    def inverse(self) -> "Permutation":
        """Permutation undoing this one"""
        inv = [0] * self.n
        for i, j in enumerate(self.image, start=1):
            inv[j - 1] = i
        return Permutation(self.n, tuple(inv))

    def then(self, other: "Permutation") -> "Permutation":
        """Apply self first, then other"""
        return Permutation(self.n, tuple(other.image[j - 1] for j in self.image))

    def inversions(self) -> int:
        """Number of crossing pairs, the length of the positive braid"""
        img = self.image
        return sum(1 for a, b in itertools.combinations(range(self.n), 2) if img[a] > img[b])


def _swap_values(image: Tuple[int, ...], i: int) -> Tuple[int, ...]:
    # right multiplication by sigma_i
    return tuple(i + 1 if v == i else i if v == i + 1 else v for v in image)


def _swap_positions(image: Tuple[int, ...], i: int) -> Tuple[int, ...]:
    # left multiplication by sigma_i (or its inverse)
    lst = list(image)
    lst[i - 1], lst[i] = lst[i], lst[i - 1]
    return tuple(lst)


@dataclass(frozen=True)
class SimpleBraid:
    """Positive prefix of Delta, identified with its permutation"""
    perm: Permutation

    @property
    def n(self) -> int:
        return self.perm.n

    @staticmethod
    def identity(n: int) -> "SimpleBraid":
        return SimpleBraid(Permutation.identity(n))

    @staticmethod
    def generator(n: int, i: int) -> "SimpleBraid":
        """sigma_i"""
        return SimpleBraid(Permutation.transposition(n, i))

    @staticmethod
    def from_image(image: Sequence[int]) -> "SimpleBraid":
        """Simple braid whose strand starting at i ends at image[i-1]"""
        return SimpleBraid(Permutation(len(image), tuple(image)))

    @staticmethod
    def from_word(n: int, indices: Iterable[int]) -> "SimpleBraid":
        """
        Simple braid spelled by a positive word.

        Raises BraidError if two strands cross twice (the word is not a
        permutation braid).
        """
        image = tuple(range(1, n + 1))
        length = 0
        for i in indices:
            _check_generator(n, i)
            image = _swap_values(image, i)
            length += 1
        perm = Permutation(n, image)
        if perm.inversions() != length:
            raise BraidError(f"positive word of length {length} is not simple in B_{n}")
        return SimpleBraid(perm)

    def is_identity(self) -> bool:
        return self.perm.image == tuple(range(1, self.n + 1))

    def is_delta(self) -> bool:
        return self.perm.image == tuple(range(self.n, 0, -1))

    def length(self) -> int:
        return self.perm.inversions()

    def word(self) -> List[int]:
        """Positive generator word, peeling the smallest starting generator each time"""
        img = self.perm.image
        letters = []
        while True:
            i = next((i for i in range(1, self.n) if img[i - 1] > img[i]), None)
            if i is None:
                return letters
            letters.append(i)
            img = _swap_positions(img, i)

    def __str__(self):
        letters = self.word()
        return " ".join(f"s{i}" for i in letters) if letters else "1"


@dataclass(frozen=True)
class BraidWord:
    """Word in the Artin generators; letters are (index, +1/-1)"""
    n: int
    letters: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.n < 3:
            raise BraidError(f"strand count must be at least 3, got {self.n}")
        for i, sign in self.letters:
            _check_generator(self.n, i)
            if sign not in (1, -1):
                raise BraidError(f"letter sign must be +1 or -1, got {sign}")

    @staticmethod
    def from_signed(n: int, signed: Iterable[int]) -> "BraidWord":
        """[1, -2] means sigma_1 sigma_2^-1"""
        return BraidWord(n, tuple((abs(i), 1 if i > 0 else -1) for i in signed))

    def __add__(self, other: "BraidWord") -> "BraidWord":
        _same_strands(self, other)
        return BraidWord(self.n, self.letters + other.letters)

    def inverse(self) -> "BraidWord":
        """Letters reversed with signs flipped"""
        return BraidWord(self.n, tuple((i, -sign) for i, sign in reversed(self.letters)))

    def __len__(self):
        return len(self.letters)


@dataclass(frozen=True)
class NormalForm:
    """
    Left normal form Delta^p x_1 ... x_r.

    Construction verifies that no factor is 1 or Delta and that every
    adjacent pair is left-weighted.
    """
    n: int
    p: int = 0
    factors: Tuple[SimpleBraid, ...] = ()

    def __post_init__(self):
        if self.n < 3:
            raise BraidError(f"strand count must be at least 3, got {self.n}")
        for f in self.factors:
            if f.n != self.n:
                raise BraidError(f"factor on {f.n} strands inside a braid on {self.n} strands")
            if f.is_identity() or f.is_delta():
                raise BraidError(f"factor '{f}' is the identity or Delta")
        for a, b in zip(self.factors, self.factors[1:]):
            if not is_left_weighted(a, b):
                raise BraidError(f"factors ({a}) . ({b}) are not left-weighted")

    @staticmethod
    def identity(n: int) -> "NormalForm":
        return NormalForm(n)

    @staticmethod
    def delta_power(n: int, k: int) -> "NormalForm":
        return NormalForm(n, k)

    def __str__(self):
        return format_normal_form(self)


def simple_braids(n: int) -> Iterator[SimpleBraid]:
    """All n! simple braids, lexicographic by permutation image"""
    for image in itertools.permutations(range(1, n + 1)):
        yield SimpleBraid(Permutation(n, image))


@lru_cache(maxsize=None)
def starting_set(s: SimpleBraid) -> FrozenSet[int]:
    """{i : sigma_i is a prefix of s}"""
    img = s.perm.image
    return frozenset(i for i in range(1, s.n) if img[i - 1] > img[i])


@lru_cache(maxsize=None)
def finishing_set(s: SimpleBraid) -> FrozenSet[int]:
    """{i : sigma_i is a suffix of s}"""
    inv = s.perm.inverse().image
    return frozenset(i for i in range(1, s.n) if inv[i - 1] > inv[i])


def is_left_weighted(s1: SimpleBraid, s2: SimpleBraid) -> bool:
    """Every generator that can start s2 already ends s1"""
    _same_strands(s1, s2)
    return starting_set(s2) <= finishing_set(s1)


@lru_cache(maxsize=200_000)
def left_weight_pair(a: SimpleBraid, b: SimpleBraid) -> Tuple[SimpleBraid, SimpleBraid]:
    """
    Rewrite the product ab as a'b' with (a', b') left-weighted.

    Generators are slid from the front of b to the back of a one at a time,
    smallest index first. Both sides stay simple by the descent criteria.
    """
    _same_strands(a, b)
    n = a.n
    a_img, b_img = a.perm.image, b.perm.image
    while True:
        movable = starting_set(b) - finishing_set(a)
        if not movable:
            return a, b
        i = min(movable)
        a_img = _swap_values(a_img, i)
        b_img = _swap_positions(b_img, i)
        a = SimpleBraid(Permutation(n, a_img))
        b = SimpleBraid(Permutation(n, b_img))


def delta(n: int) -> SimpleBraid:
    """The half twist Delta, reversing all n strands"""
    return SimpleBraid(Permutation(n, tuple(range(n, 0, -1))))


def delta_ij(i: int, j: int, n: int) -> SimpleBraid:
    """Half-twist on strands i..j: reverses that block, fixes the rest"""
    if not 1 <= i < j <= n:
        raise BraidError(f"need 1 <= i < j <= n, got i={i}, j={j}, n={n}")
    image = list(range(1, n + 1))
    image[i - 1:j] = reversed(image[i - 1:j])
    return SimpleBraid(Permutation(n, tuple(image)))


@lru_cache(maxsize=None)
def tau(s: SimpleBraid) -> SimpleBraid:
    """Conjugation by Delta: sigma_i -> sigma_{n-i}"""
    n, img = s.n, s.perm.image
    return SimpleBraid(Permutation(n, tuple(n + 1 - img[n - i] for i in range(1, n + 1))))


def tau_power(s: SimpleBraid, k: int) -> SimpleBraid:
    """tau^k(s); tau is an involution"""
    return tau(s) if k % 2 else s


@lru_cache(maxsize=None)
def left_complement(s: SimpleBraid) -> SimpleBraid:
    """The simple braid x with x s = Delta"""
    n = s.n
    inv = s.perm.inverse().image
    return SimpleBraid(Permutation(n, tuple(inv[n - i] for i in range(1, n + 1))))


def _absorb(seq: List[SimpleBraid], s: SimpleBraid):
    """Right-multiply a normalised factor list by s, combing back to the left"""
    seq.append(s)
    j = len(seq) - 2
    while j >= 0:
        a, b = left_weight_pair(seq[j], seq[j + 1])
        if a == seq[j] and b == seq[j + 1]:
            break
        seq[j], seq[j + 1] = a, b
        j -= 1


def _finish(n: int, p: int, seq: List[SimpleBraid]) -> NormalForm:
    start = 0
    while start < len(seq) and seq[start].is_delta():
        start += 1
    end = len(seq)
    while end > start and seq[end - 1].is_identity():
        end -= 1
    return NormalForm(n, p + start, tuple(seq[start:end]))


def normal_form(w: BraidWord) -> NormalForm:
    """
    Left normal form of a braid word.

    A negative letter sigma_i^-1 is rewritten Delta^-1 (Delta sigma_i^-1); the
    Delta^-1 is pushed to the front, flipping every factor already collected.
    """
    n = w.n
    p = 0
    seq: List[SimpleBraid] = []
    for i, sign in w.letters:
        if sign > 0:
            _absorb(seq, SimpleBraid.generator(n, i))
        else:
            p -= 1
            seq[:] = [tau(f) for f in seq]
            _absorb(seq, left_complement(SimpleBraid.generator(n, i)))
    return _finish(n, p, seq)


def multiply(x: NormalForm, y: NormalForm) -> NormalForm:
    """
    Normal form of xy. The Delta power of y moves to the front, twisting the
    factors of x, and the factors of y are then absorbed one at a time.
    """
    _same_strands(x, y)
    seq = [tau_power(f, y.p) for f in x.factors]
    for f in y.factors:
        _absorb(seq, f)
    return _finish(x.n, x.p + y.p, seq)


def invert(x: NormalForm) -> NormalForm:
    """Normal form of x^-1, built from left complements of the factors in reverse"""
    p = 0
    seq: List[SimpleBraid] = []
    for f in reversed(x.factors):
        # f^-1 = Delta^-1 . (Delta f^-1)
        p -= 1
        seq[:] = [tau(g) for g in seq]
        _absorb(seq, left_complement(f))
    seq = [tau_power(g, x.p) for g in seq]
    return _finish(x.n, p - x.p, seq)


def power(x: NormalForm, k: int, rigid_fast_path: bool = True) -> NormalForm:
    """
    x^k. For rigid x and k >= 1 the normal form is the concatenation
    Delta^{kp} . tau^{(k-1)p}(x_1..x_r) . ... . (x_1..x_r).
    """
    if k < 0:
        return power(invert(x), -k, rigid_fast_path)
    if k == 0:
        return NormalForm.identity(x.n)
    if rigid_fast_path and x.factors and is_rigid(x):
        factors: List[SimpleBraid] = []
        for j in range(1, k + 1):
            factors.extend(tau_power(f, (k - j) * x.p) for f in x.factors)
        return NormalForm(x.n, k * x.p, tuple(factors))

    result = NormalForm.identity(x.n)
    base = x
    while k:
        if k & 1:
            result = multiply(result, base)
        k >>= 1
        if k:
            base = multiply(base, base)
    return result


def inf(x: NormalForm) -> int:
    """Power of Delta in the normal form"""
    return x.p


def sup(x: NormalForm) -> int:
    """inf(x) plus the number of factors"""
    return x.p + len(x.factors)


def canonical_length(x: NormalForm) -> int:
    """Number of factors after Delta^p"""
    return len(x.factors)


def initial_factor(x: NormalForm) -> SimpleBraid:
    """iota(x) = Delta^p x_1 Delta^-p"""
    if not x.factors:
        raise BraidError("initial factor of a braid of canonical length 0")
    return tau_power(x.factors[0], x.p)


def final_factor(x: NormalForm) -> SimpleBraid:
    """Last factor x_r"""
    if not x.factors:
        raise BraidError("final factor of a braid of canonical length 0")
    return x.factors[-1]


def is_rigid(x: NormalForm) -> bool:
    """(final factor, initial factor) is left-weighted, so x^2 needs no recombing at the join"""
    return is_left_weighted(final_factor(x), initial_factor(x))


def x_A(n: int) -> NormalForm:
    """sigma_1 sigma_3 ... . sigma_1 sigma_3 ... sigma_2 sigma_4 ..."""
    odd = list(range(1, 2 * (n // 2), 2))
    even = list(range(2, 2 * ((n + 1) // 2) - 1, 2))
    first = SimpleBraid.from_word(n, odd)
    second = SimpleBraid.from_word(n, odd + even)
    return NormalForm(n, 0, (first, second))


def x_B(n: int) -> NormalForm:
    """Delta_{2,n} sigma_1 . sigma_1 . sigma_1 ... sigma_{n-1} . sigma_{n-1}"""
    first = SimpleBraid.from_word(n, delta_ij(2, n, n).word() + [1])
    return NormalForm(n, 0, (
        first,
        SimpleBraid.generator(n, 1),
        SimpleBraid.from_word(n, range(1, n)),
        SimpleBraid.generator(n, n - 1),
    ))


def word_of(x: NormalForm) -> BraidWord:
    """Spell a normal form back out as an Artin word"""
    delta_word = delta(x.n).word()
    letters: List[Tuple[int, int]] = []
    if x.p > 0:
        letters.extend((i, 1) for _ in range(x.p) for i in delta_word)
    elif x.p < 0:
        letters.extend((i, -1) for _ in range(-x.p) for i in reversed(delta_word))
    for f in x.factors:
        letters.extend((i, 1) for i in f.word())
    return BraidWord(x.n, tuple(letters))


def format_normal_form(x: NormalForm) -> str:
    """Canonical text form: 'D^p | f1 . f2 . ...'"""
    head = f"D^{x.p} |"
    if not x.factors:
        return head
    return head + " " + " . ".join(str(f) for f in x.factors)


def random_word(n: int, length: int, rng: random.Random) -> BraidWord:
    """Uniform letters sigma_i^{+-1}"""
    return BraidWord(n, tuple(
        (rng.randint(1, n - 1), rng.choice((1, -1))) for _ in range(length)
    ))
